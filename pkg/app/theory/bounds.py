"""
Shot-complexity calculators for the two heads.

Yomo:     Pr(err) <= exp(-2N(p - 1/2)^2),   N >= ln(1/delta) / (2(p - 1/2)^2)
Vanilla:  Pr(err) <= 2K exp(-2N(Delta/4L)^2), N >= (8L^2/Delta^2) ln(2K/delta)

plus the threshold conditions comparing them and the exact binomial
majority-vote error (even-N ties count as errors).
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import bdtr

from app.core.exceptions import NumericDomainError, UnsupportedConfigurationError
from app.training.model import QuantumClassifier

logger = logging.getLogger(__name__)


def _require_probability(name: str, value: float) -> None:
    if not 0.0 < value < 1.0:
        raise NumericDomainError(f"{name} must lie in (0, 1), got {value}")


def _require_positive(name: str, value: float) -> None:
    if not value > 0.0:
        raise NumericDomainError(f"{name} must be > 0, got {value}")


def _require_classes(n_classes: int) -> None:
    if n_classes < 2:
        raise NumericDomainError(f"K must be >= 2, got {n_classes}")


def _require_shots(n_shots: int) -> None:
    if n_shots < 1:
        raise NumericDomainError(f"N must be >= 1, got {n_shots}")


def _check_vanilla(delta_margin: float, lipschitz: float, n_classes: int) -> None:
    _require_positive("Delta", delta_margin)
    _require_positive("L", lipschitz)
    _require_classes(n_classes)


def yomo_shots(p: float, delta: float) -> int:
    if not p > 0.5:
        raise NumericDomainError(f"bound requires p > 1/2, got p={p}")
    _require_probability("p", p)
    _require_probability("delta", delta)
    return int(math.ceil(math.log(1.0 / delta) / (2.0 * (p - 0.5) ** 2)))


def vanilla_shots(delta_margin: float, lipschitz: float, n_classes: int, delta: float) -> int:
    _check_vanilla(delta_margin, lipschitz, n_classes)
    _require_probability("delta", delta)
    return int(math.ceil(8.0 * lipschitz ** 2 / delta_margin ** 2 * math.log(2.0 * n_classes / delta)))


def yomo_error_bound(p: float, n_shots: int) -> float:
    if not 0.5 <= p < 1.0:
        raise NumericDomainError(f"bound requires p in [1/2, 1), got p={p}")
    _require_shots(n_shots)
    return math.exp(-2.0 * n_shots * (p - 0.5) ** 2)


def vanilla_error_bound(delta_margin: float, lipschitz: float, n_classes: int, n_shots: int) -> float:
    """Union-bound decision error, clipped to 1."""
    _check_vanilla(delta_margin, lipschitz, n_classes)
    _require_shots(n_shots)
    ratio = delta_margin / (4.0 * lipschitz)
    return min(1.0, 2.0 * n_classes * math.exp(-2.0 * n_shots * ratio ** 2))


def fewer_shots_threshold(delta_margin: float, lipschitz: float, n_classes: int, delta: float) -> float:
    """Smallest p at which Yomo needs no more shots than Vanilla for error delta."""
    _check_vanilla(delta_margin, lipschitz, n_classes)
    _require_probability("delta", delta)
    ratio = delta_margin / (4.0 * lipschitz)
    return 0.5 + ratio * math.sqrt(math.log(1.0 / delta) / math.log(2.0 * n_classes / delta))


@dataclass(frozen=True)
class SmallerDeltaThreshold:
    threshold: Optional[float]
    vacuous: bool

    def __str__(self) -> str:
        return "vacuous" if self.vacuous else repr(self.threshold)


def smaller_delta_threshold(delta_margin: float, lipschitz: float, n_classes: int, n_shots: int) -> SmallerDeltaThreshold:
    """p above which Yomo's bound beats Vanilla's at the same N.

    When the radicand is negative every p satisfies the comparison and the
    condition is reported vacuous.
    """
    _check_vanilla(delta_margin, lipschitz, n_classes)
    _require_shots(n_shots)
    radicand = (delta_margin / (4.0 * lipschitz)) ** 2 - math.log(2.0 * n_classes) / (2.0 * n_shots)
    if radicand < 0.0:
        return SmallerDeltaThreshold(threshold=None, vacuous=True)
    return SmallerDeltaThreshold(threshold=0.5 + math.sqrt(radicand), vacuous=False)


def single_shot_threshold(delta_margin: float, lipschitz: float, n_classes: int) -> float:
    _check_vanilla(delta_margin, lipschitz, n_classes)
    return max(0.0, 1.0 - 2.0 * n_classes * math.exp(-delta_margin ** 2 / (8.0 * lipschitz ** 2)))


def yomo_single_shot_error(p: float) -> float:
    _require_probability("p", p)
    return 1.0 - p


def vanilla_single_shot_error_bound(delta_margin: float, lipschitz: float, n_classes: int) -> float:
    return vanilla_error_bound(delta_margin, lipschitz, n_classes, 1)


def majority_vote_error_exact(p: float, n_shots: int) -> float:
    """P(correct votes <= floor(N/2)) for Binomial(N, p), via the regularized incomplete beta."""
    _require_probability("p", p)
    _require_shots(n_shots)
    return float(min(1.0, bdtr(n_shots // 2, n_shots, p)))


def exact_majority_shots(p: float, delta: float) -> int:
    """
    Smallest odd N whose exact majority-vote error is <= delta.

    For p > 1/2 the error over odd N is non-increasing and the Hoeffding
    count already meets delta, so the answer is bisected below it.
    """
    if not p > 0.5:
        raise NumericDomainError(f"majority vote converges only for p > 1/2, got p={p}")
    _require_probability("p", p)
    _require_probability("delta", delta)
    upper = yomo_shots(p, delta)
    # odd N = 2m + 1
    lo, hi = 0, upper // 2
    while lo < hi:
        mid = (lo + hi) // 2
        if majority_vote_error_exact(p, 2 * mid + 1) <= delta:
            hi = mid
        else:
            lo = mid + 1
    return 2 * lo + 1


@dataclass(frozen=True)
class MarginReport:
    per_sample: np.ndarray
    minimum: float
    median: float
    lipschitz: float = 1.0


def top_two_gap(scores: np.ndarray) -> float:
    """Gap between the two largest scores (0 for duplicated maxima)."""
    ordered = np.sort(np.asarray(scores, dtype=np.float64))[::-1]
    if ordered.size < 2:
        raise NumericDomainError("margin needs at least two class scores")
    return float(ordered[0] - ordered[1])


def measure_margin(model: QuantumClassifier, data) -> MarginReport:
    """Infinite-shot top-two gap of the expectation scores (identity score map, L = 1).

    ``data`` is an input array or anything with an ``inputs`` array.
    """
    inputs = getattr(data, "inputs", data)
    if not isinstance(model, QuantumClassifier) or model.head != "vanilla":
        raise UnsupportedConfigurationError("margin is measured on the vanilla head only")
    margins = np.array([
        top_two_gap(model.circuit_outputs(model.state(x))) for x in np.atleast_2d(inputs)
    ])
    return MarginReport(
        per_sample=margins,
        minimum=float(margins.min()),
        median=float(np.median(margins)),
        lipschitz=1.0,
    )
