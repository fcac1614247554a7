"""
Service layer for finite- and infinite-shot prediction and accuracy evaluation
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np

from app.core.config import settings
from app.core.exceptions import ArgumentError
from app.core.random import stream
from app.quantum import heads
from app.quantum import statevector as sv
from app.quantum.noise import NoiseEvalConfig, NoiseModel, noisy_distributions
from app.services.dataset_service import Dataset
from app.training.model import QuantumClassifier

# Configure logging
logger = logging.getLogger(__name__)

Allocation = Literal["round_robin", "all_to_z", "proportional"]
YomoRule = Literal["mean", "sum"]
BASIS_GROUPS: Tuple[str, ...] = ("computational", "y")


@dataclass(frozen=True)
class ShotPlan:
    """Shot budget split across measurement-basis groups. ``total_shots`` None means infinite."""
    total_shots: Optional[int]
    allocations: Dict[str, int] = field(default_factory=dict)
    membership: Tuple[str, ...] = ()

    @property
    def is_infinite(self) -> bool:
        return self.total_shots is None


@dataclass
class PredictionOutcome:
    predicted: int
    scores: np.ndarray
    shots_used: int
    estimates: Optional[np.ndarray] = None


@dataclass(frozen=True)
class AccuracyReport:
    accuracy: float
    std_err: float
    repeat_count: int
    per_repeat: Tuple[float, ...]


def basis_group(obs: heads.Observable) -> str:
    """Measurement group of a Pauli string: Z-only strings share the computational basis, Y-only the rotated one."""
    letters = obs.letters
    if letters in ("", "Z"):
        return "computational"
    if letters == "Y":
        return "y"
    raise ArgumentError(f"observable {obs} cannot be estimated from the computational or Y-rotated basis")


def plan_shots(
    observables: Sequence[heads.Observable],
    n_shots: Optional[int],
    allocation: Allocation = "round_robin",
) -> ShotPlan:
    """
    Split ``n_shots`` between the basis groups the observables need.

    Args:
        observables: vanilla observable set
        n_shots: shot budget, None for infinite
        allocation: round_robin (computational first), all_to_z, or proportional to group size

    Returns:
        ShotPlan whose allocations sum to ``n_shots``
    """
    membership = tuple(basis_group(obs) for obs in observables)
    groups = [g for g in BASIS_GROUPS if g in membership]
    if n_shots is None:
        return ShotPlan(total_shots=None, allocations={}, membership=membership)
    if n_shots < 1:
        raise ArgumentError(f"shots must be >= 1, got {n_shots}")
    if not groups:
        raise ArgumentError("no observables to measure")

    allocations = {g: 0 for g in groups}
    if allocation == "round_robin":
        for shot in range(n_shots):
            allocations[groups[shot % len(groups)]] += 1
    elif allocation == "all_to_z":
        allocations[groups[0]] = n_shots
    elif allocation == "proportional":
        sizes = np.array([membership.count(g) for g in groups], dtype=np.float64)
        exact = n_shots * sizes / sizes.sum()
        floors = np.floor(exact).astype(int)
        # largest remainder; stable sort keeps the computational group first on ties
        order = np.argsort(-(exact - floors), kind="stable")
        for k in order[: n_shots - int(floors.sum())]:
            floors[k] += 1
        allocations = {g: int(n) for g, n in zip(groups, floors)}
    else:
        raise ArgumentError(f"unknown shot allocation '{allocation}'")
    return ShotPlan(total_shots=n_shots, allocations=allocations, membership=membership)


def predict_yomo_shots(
    probs: np.ndarray,
    part: heads.ClassPartition,
    n_shots: Optional[int],
    rng: Optional[np.random.Generator] = None,
    rule: YomoRule = "mean",
) -> PredictionOutcome:
    """
    Majority vote over ``n_shots`` measured bitstrings.

    With ``n_shots`` None the prediction is the argmax of the class means
    (``rule="mean"``) or the class masses (``rule="sum"``).
    """
    if n_shots is None:
        scores = heads.aggregate_mean(probs, part) if rule == "mean" else heads.aggregate_sum(probs, part)
        return PredictionOutcome(predicted=heads.predict_class(scores), scores=scores, shots_used=0)
    if rng is None:
        raise ArgumentError("finite-shot prediction needs a random generator")
    sample = sv.sample_distribution(probs, n_shots, rng)
    votes = np.zeros(part.n_classes, dtype=np.int64)
    class_of = part.class_of
    for index, count in sample.counts.items():
        votes[class_of[index]] += count
    return PredictionOutcome(predicted=heads.predict_class(votes), scores=votes, shots_used=n_shots)


def exact_expectations(
    probs: np.ndarray,
    probs_y: Optional[np.ndarray],
    observables: Sequence[heads.Observable],
) -> np.ndarray:
    """Expectations read off basis distributions as signed eigenvalue sums."""
    n_q = int(round(math.log2(len(probs))))
    mu = np.zeros(len(observables))
    for k, obs in enumerate(observables):
        group = basis_group(obs)
        dist = probs if group == "computational" else probs_y
        if dist is None:
            raise ArgumentError(f"observable {obs} needs the Y-rotated distribution")
        mu[k] = float(np.dot(dist, heads.parity_signs(n_q, obs.support)))
    return mu


def predict_vanilla_shots(
    probs: np.ndarray,
    probs_y: Optional[np.ndarray],
    observables: Sequence[heads.Observable],
    n_shots: Optional[int],
    rng: Optional[np.random.Generator] = None,
    allocation: Allocation = "round_robin",
) -> PredictionOutcome:
    """
    Estimate every observable from its basis group's samples, softmax, argmax.

    Observables whose group receives no shots are estimated as 0.
    """
    plan = plan_shots(observables, n_shots, allocation)
    if plan.is_infinite:
        mu = exact_expectations(probs, probs_y, observables)
        scores = heads.vanilla_probs(mu)
        return PredictionOutcome(predicted=heads.predict_class(scores), scores=scores, shots_used=0, estimates=mu)
    if rng is None:
        raise ArgumentError("finite-shot prediction needs a random generator")

    n_q = int(round(math.log2(len(probs))))
    frequencies: Dict[str, np.ndarray] = {}
    for group in BASIS_GROUPS:
        shots = plan.allocations.get(group, 0)
        if shots == 0:
            continue
        dist = probs if group == "computational" else probs_y
        if dist is None:
            raise ArgumentError("Y-string estimation needs the Y-rotated distribution")
        frequencies[group] = sv.sample_distribution(dist, shots, rng).frequencies(n_q)

    mu = np.zeros(len(observables))
    for k, (obs, group) in enumerate(zip(observables, plan.membership)):
        if group in frequencies:
            mu[k] = float(np.dot(frequencies[group], heads.parity_signs(n_q, obs.support)))
    scores = heads.vanilla_probs(mu)
    return PredictionOutcome(
        predicted=heads.predict_class(scores),
        scores=scores,
        shots_used=sum(plan.allocations.values()),
        estimates=mu,
    )


def sample_distributions(
    model: QuantumClassifier,
    x: np.ndarray,
    noise: Optional[NoiseModel],
    trajectories: int,
    noise_seed: int,
) -> List[np.ndarray]:
    """[P] for yomo or [P, P_y] for vanilla; trajectory-averaged under noise."""
    bases = ("computational",) if model.head == "yomo" else ("computational", "y")
    if noise is None:
        dists = model.measurement_distributions(x)
        return dists[: len(bases)]
    z, _ = model.encode(x)
    cfg = NoiseEvalConfig(trajectories=trajectories, seed=noise_seed)
    return noisy_distributions(model.circuit, z, model.theta, noise, cfg, bases)


def _predict(
    model: QuantumClassifier,
    dists: List[np.ndarray],
    n_shots: Optional[int],
    rng: Optional[np.random.Generator],
    yomo_rule: YomoRule,
    allocation: Allocation,
) -> int:
    if model.head == "yomo":
        return predict_yomo_shots(dists[0], model.partition, n_shots, rng, yomo_rule).predicted
    return predict_vanilla_shots(dists[0], dists[1], model.observables, n_shots, rng, allocation).predicted


def evaluate_accuracy(
    model: QuantumClassifier,
    dataset: Dataset,
    n_shots: Optional[int],
    noise: Optional[NoiseModel] = None,
    repeats: int = 1,
    seed: int = 0,
    trajectories: Optional[int] = None,
    yomo_rule: YomoRule = "mean",
    allocation: Allocation = "round_robin",
    threads: Optional[int] = None,
) -> AccuracyReport:
    """
    Test accuracy at a shot budget, mean and standard error over repeats.

    Sample i, repeat r draws its shots from stream (seed, "sample", i, r);
    its noise trajectories use a seed drawn from (seed, "noise-seed", i).
    Infinite shots are deterministic and report a single repeat with std_err 0.

    Args:
        model: trained classifier
        dataset: evaluation split
        n_shots: shot budget, None for infinite
        noise: depolarizing model, None for noiseless
        repeats: independent shot draws per sample
        seed: evaluation seed
        trajectories: Monte-Carlo trajectories under noise
        yomo_rule: infinite-shot yomo aggregation
        allocation: vanilla basis-group allocation
        threads: worker threads over samples

    Returns:
        AccuracyReport
    """
    if repeats < 1:
        raise ArgumentError(f"repeats must be >= 1, got {repeats}")
    if len(dataset) == 0:
        raise ArgumentError("cannot evaluate on an empty dataset")
    if model.head == "vanilla":
        plan_shots(model.observables, n_shots, allocation)
    repeat_count = 1 if n_shots is None else repeats
    trajectories = trajectories or settings.NOISE_TRAJECTORIES

    def evaluate_sample(i: int) -> np.ndarray:
        noise_seed = int(stream(seed, "noise-seed", i).integers(0, 2 ** 63))
        dists = sample_distributions(model, dataset.inputs[i], noise, trajectories, noise_seed)
        label = int(dataset.labels[i])
        correct = np.zeros(repeat_count)
        for r in range(repeat_count):
            rng = None if n_shots is None else stream(seed, "sample", i, r)
            correct[r] = _predict(model, dists, n_shots, rng, yomo_rule, allocation) == label
        return correct

    workers = max(1, threads or settings.THREADS)
    if workers == 1:
        rows = [evaluate_sample(i) for i in range(len(dataset))]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(evaluate_sample, range(len(dataset))))

    per_repeat = np.vstack(rows).mean(axis=0)
    accuracy = float(per_repeat.mean())
    std_err = float(per_repeat.std(ddof=1) / math.sqrt(repeat_count)) if repeat_count > 1 else 0.0
    shots_label = "inf" if n_shots is None else n_shots
    logger.info(
        f"Evaluated {model.head} head on {len(dataset)} samples at shots={shots_label}, "
        f"noise={noise.name if noise else 'none'}: accuracy={accuracy:.4f} +/- {std_err:.4f}"
    )
    return AccuracyReport(
        accuracy=accuracy,
        std_err=std_err,
        repeat_count=repeat_count,
        per_repeat=tuple(float(a) for a in per_repeat),
    )
