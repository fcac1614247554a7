"""
Exact state-vector simulator.

Basis convention: qubit 0 is the most significant bit of the basis index.
Gates act in place on the amplitude array through a ``(left, 2, right)``
view of the target axis, so one gate costs O(2^n_q) and no full matrix is
ever built.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict

import numpy as np

from app.core.config import settings
from app.core.exceptions import ArgumentError, ConfigurationError, QubitIndexError

logger = logging.getLogger(__name__)

AXES = ("x", "y", "z")
PAULIS = ("X", "Y", "Z")


@dataclass
class StateVector:
    """Pure state over ``n_q`` qubits"""
    n_q: int
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.ascontiguousarray(self.amplitudes, dtype=np.complex128)
        if self.amplitudes.shape != (1 << self.n_q,):
            raise ArgumentError(
                f"amplitude vector must have length 2^{self.n_q}, got {self.amplitudes.shape}"
            )

    def copy(self) -> "StateVector":
        return StateVector(self.n_q, self.amplitudes.copy())

    def norm(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def qubit_view(self, qubit: int) -> np.ndarray:
        """View of the amplitudes shaped ``(2^qubit, 2, 2^(n_q-qubit-1))``."""
        check_qubit(self, qubit)
        return self.amplitudes.reshape(1 << qubit, 2, 1 << (self.n_q - qubit - 1))


@dataclass
class BitstringSample:
    """Finite-shot measurement record"""
    counts: Dict[int, int] = field(default_factory=dict)
    total_shots: int = 0

    def frequencies(self, n_q: int) -> np.ndarray:
        freq = np.zeros(1 << n_q)
        for index, count in self.counts.items():
            freq[index] = count
        return freq / self.total_shots


def check_qubit(state: StateVector, qubit: int) -> None:
    if not 0 <= qubit < state.n_q:
        raise QubitIndexError(f"qubit index {qubit} out of range for {state.n_q} qubits")


def init_zero(n_q: int) -> StateVector:
    """|0...0> on ``n_q`` qubits."""
    limit = settings.MAX_STATEVECTOR_QUBITS
    if not 1 <= n_q <= limit:
        raise ConfigurationError(f"n_q must be in [1, {limit}], got {n_q}")
    amplitudes = np.zeros(1 << n_q, dtype=np.complex128)
    amplitudes[0] = 1.0
    return StateVector(n_q, amplitudes)


def rotation_matrix(axis: str, angle: float) -> np.ndarray:
    """exp(-i angle/2 P_axis) as a 2x2 matrix."""
    c = np.cos(angle / 2.0)
    s = np.sin(angle / 2.0)
    if axis == "x":
        return np.array([[c, -1j * s], [-1j * s, c]], dtype=np.complex128)
    if axis == "y":
        return np.array([[c, -s], [s, c]], dtype=np.complex128)
    if axis == "z":
        return np.array([[np.exp(-0.5j * angle), 0.0], [0.0, np.exp(0.5j * angle)]], dtype=np.complex128)
    raise ArgumentError(f"unknown rotation axis '{axis}', expected one of {AXES}")


def apply_matrix(state: StateVector, matrix: np.ndarray, qubit: int) -> StateVector:
    """Apply a 2x2 matrix to one qubit in place."""
    view = state.qubit_view(qubit)
    a0 = view[:, 0, :].copy()
    a1 = view[:, 1, :]
    new0 = matrix[0, 0] * a0 + matrix[0, 1] * a1
    view[:, 1, :] = matrix[1, 0] * a0 + matrix[1, 1] * a1
    view[:, 0, :] = new0
    return state


def apply_rotation(state: StateVector, axis: str, qubit: int, angle: float) -> StateVector:
    """Rotate ``qubit`` about ``axis`` by ``angle`` radians (in place)."""
    if not np.isfinite(angle):
        raise ArgumentError(f"rotation angle must be finite, got {angle}")
    return apply_matrix(state, rotation_matrix(axis, angle), qubit)


def apply_cnot(state: StateVector, control: int, target: int) -> StateVector:
    """Flip ``target`` on the basis states where ``control`` is 1 (in place)."""
    check_qubit(state, control)
    check_qubit(state, target)
    if control == target:
        raise QubitIndexError(f"CNOT control and target must differ, both are {control}")
    tensor = state.amplitudes.reshape((2,) * state.n_q)
    index = [slice(None)] * state.n_q
    index[control] = 1
    index[target] = 0
    zero = tuple(index)
    index[target] = 1
    one = tuple(index)
    tmp = tensor[zero].copy()
    tensor[zero] = tensor[one]
    tensor[one] = tmp
    return state


def apply_pauli(state: StateVector, pauli: str, qubit: int) -> StateVector:
    """Apply X, Y or Z to ``qubit`` (in place); identity factors are the caller's to skip."""
    view = state.qubit_view(qubit)
    if pauli == "X":
        tmp = view[:, 0, :].copy()
        view[:, 0, :] = view[:, 1, :]
        view[:, 1, :] = tmp
    elif pauli == "Y":
        tmp = view[:, 0, :].copy()
        view[:, 0, :] = -1j * view[:, 1, :]
        view[:, 1, :] = 1j * tmp
    elif pauli == "Z":
        view[:, 1, :] *= -1.0
    else:
        raise ArgumentError(f"unknown Pauli '{pauli}', expected one of {PAULIS}")
    return state


def probabilities(state: StateVector) -> np.ndarray:
    """Computational-basis probabilities |amplitude|^2."""
    amps = state.amplitudes
    return amps.real ** 2 + amps.imag ** 2


def sample_distribution(probs: np.ndarray, n_shots: int, rng: np.random.Generator) -> BitstringSample:
    """Draw ``n_shots`` i.i.d. basis indices from a probability vector."""
    if n_shots < 1:
        raise ArgumentError(f"n_shots must be >= 1, got {n_shots}")
    p = np.clip(np.asarray(probs, dtype=np.float64), 0.0, None)
    p = p / p.sum()
    drawn = rng.multinomial(n_shots, p)
    counts = {int(i): int(drawn[i]) for i in np.flatnonzero(drawn)}
    return BitstringSample(counts=counts, total_shots=n_shots)


def sample_bitstrings(state: StateVector, n_shots: int, rng: np.random.Generator) -> BitstringSample:
    """Measure ``state`` ``n_shots`` times in the computational basis."""
    return sample_distribution(probabilities(state), n_shots, rng)
