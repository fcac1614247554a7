"""
Classifier heads.

Yomo: basis states are split into K consecutive index groups; class scores
are group means of the basis probabilities (mass per group is also
available, it is the distribution one measured bitstring's class follows).

Vanilla: class scores are softmax of Pauli-string expectations.
"""
import logging
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
from scipy.special import softmax

from app.core.exceptions import ArgumentError, ConfigurationError
from app.quantum import statevector as sv

logger = logging.getLogger(__name__)

DEFAULT_OBSERVABLES = (
    "ZIII", "IZII", "IIZI", "IIIZ", "ZZII",
    "ZIZI", "IZZI", "IIZZ", "YIYI", "IYIY",
)
DISTRIBUTION_TOLERANCE = 1e-6


@dataclass(frozen=True)
class ClassPartition:
    n_q: int
    n_classes: int
    sets: Tuple[Tuple[int, ...], ...]

    @property
    def sizes(self) -> np.ndarray:
        return np.array([len(s) for s in self.sets])

    @property
    def class_of(self) -> np.ndarray:
        """Class label of every basis index."""
        labels = np.empty(1 << self.n_q, dtype=np.int64)
        for k, members in enumerate(self.sets):
            labels[list(members)] = k
        return labels


def build_partition(n_q: int, n_classes: int) -> ClassPartition:
    """Consecutive index blocks; the first r classes get one extra state."""
    dim = 1 << n_q
    if n_classes < 1:
        raise ConfigurationError(f"K must be >= 1, got {n_classes}")
    if n_classes > dim:
        raise ConfigurationError(f"more classes than basis states: K={n_classes} > 2^{n_q}={dim}")
    base = dim // n_classes
    remainder = dim - base * n_classes
    sets = []
    start = 0
    for k in range(n_classes):
        size = base + 1 if k < remainder else base
        sets.append(tuple(range(start, start + size)))
        start += size
    return ClassPartition(n_q=n_q, n_classes=n_classes, sets=tuple(sets))


def _check_distribution(probs: np.ndarray, part: ClassPartition) -> np.ndarray:
    probs = np.asarray(probs, dtype=np.float64)
    if probs.shape != (1 << part.n_q,):
        raise ArgumentError(f"expected {1 << part.n_q} basis probabilities, got shape {probs.shape}")
    if probs.min() < -DISTRIBUTION_TOLERANCE or abs(probs.sum() - 1.0) > DISTRIBUTION_TOLERANCE:
        raise ArgumentError(f"basis probabilities must be non-negative and sum to 1, got sum {probs.sum():.12g}")
    return probs


def aggregate_sum(probs: np.ndarray, part: ClassPartition) -> np.ndarray:
    """Probability mass per class."""
    probs = _check_distribution(probs, part)
    return np.bincount(part.class_of, weights=probs, minlength=part.n_classes)


def aggregate_mean(probs: np.ndarray, part: ClassPartition) -> np.ndarray:
    """Mean basis probability per class."""
    return aggregate_sum(probs, part) / part.sizes


def predict_class(scores: Sequence[float]) -> int:
    """Argmax with ties going to the smallest index."""
    scores = np.asarray(scores, dtype=np.float64)
    if scores.size == 0:
        raise ArgumentError("cannot predict from an empty score vector")
    return int(np.argmax(scores))


@dataclass(frozen=True)
class Observable:
    pauli_string: str

    def __post_init__(self):
        if not self.pauli_string or any(c not in "IXYZ" for c in self.pauli_string):
            raise ArgumentError(f"observable must be a string over I, X, Y, Z: '{self.pauli_string}'")

    @classmethod
    def parse(cls, text: str) -> "Observable":
        return cls(text.strip().upper())

    @property
    def n_q(self) -> int:
        return len(self.pauli_string)

    @property
    def support(self) -> Tuple[int, ...]:
        return tuple(q for q, c in enumerate(self.pauli_string) if c != "I")

    @property
    def letters(self) -> str:
        return "".join(sorted(set(self.pauli_string) - {"I"}))

    def __str__(self) -> str:
        return self.pauli_string


def default_observables(n_q: int, n_classes: int = 10) -> List[Observable]:
    """The fixed observable set, padded with I on the right."""
    if n_q < 4:
        raise ConfigurationError(f"default observables need n_q >= 4, got {n_q}")
    if not 1 <= n_classes <= len(DEFAULT_OBSERVABLES):
        raise ConfigurationError(
            f"default observables support 1..{len(DEFAULT_OBSERVABLES)} classes, got {n_classes}"
        )
    return [Observable(s + "I" * (n_q - 4)) for s in DEFAULT_OBSERVABLES[:n_classes]]


def apply_observable(state: sv.StateVector, obs: Observable) -> sv.StateVector:
    """O|psi> on a copy of the state."""
    if obs.n_q != state.n_q:
        raise ArgumentError(f"observable {obs} has length {obs.n_q}, state has {state.n_q} qubits")
    out = state.copy()
    for qubit in obs.support:
        sv.apply_pauli(out, obs.pauli_string[qubit], qubit)
    return out


def expectation(state: sv.StateVector, obs: Observable) -> float:
    """<psi|O|psi>."""
    return float(np.vdot(state.amplitudes, apply_observable(state, obs).amplitudes).real)


def parity_signs(n_q: int, support: Sequence[int]) -> np.ndarray:
    """(-1)^(sum of the support bits) for every basis index."""
    indices = np.arange(1 << n_q)
    parity = np.zeros(1 << n_q, dtype=np.int64)
    for qubit in support:
        parity ^= (indices >> (n_q - 1 - qubit)) & 1
    return 1.0 - 2.0 * parity


def vanilla_probs(mu: Sequence[float]) -> np.ndarray:
    """softmax(mu)."""
    return softmax(np.asarray(mu, dtype=np.float64))
