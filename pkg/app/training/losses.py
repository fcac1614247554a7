"""
Training losses and their gradients with respect to class scores.

total = CE + gamma * PS + omega * E, natural logs, probabilities clamped at
1e-12 before any log. PS uses the predicted-class probability and treats
the set {i : p_i > tau} as constant when differentiating.
"""
import logging
from dataclasses import dataclass
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from app.core.exceptions import ArgumentError

logger = logging.getLogger(__name__)

PROB_FLOOR = 1e-12


class LossConfig(BaseModel):
    tau: float = Field(default=0.6, gt=0.0, lt=1.0, description="Sharpening threshold")
    gamma: float = Field(default=0.05, ge=0.0, description="Sharpening weight")
    omega: float = Field(default=0.05, ge=0.0, description="Entropy weight")
    head: Literal["yomo", "vanilla"] = "yomo"
    entropy_mode: Literal["correct_class", "distribution"] = Field(
        default="correct_class",
        description="correct_class: -p log p of the true-class score; distribution: entropy over all K scores",
    )

    model_config = ConfigDict(frozen=True)

    @property
    def effective_gamma(self) -> float:
        return self.gamma if self.head == "yomo" else 0.0

    @property
    def effective_omega(self) -> float:
        return self.omega if self.head == "yomo" else 0.0


@dataclass
class BatchPrediction:
    """Per-sample class scores plus true labels"""
    scores: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        self.scores = np.atleast_2d(np.asarray(self.scores, dtype=np.float64))
        self.labels = np.asarray(self.labels, dtype=np.int64).reshape(-1)
        if self.scores.shape[0] != self.labels.shape[0]:
            raise ArgumentError(f"{self.scores.shape[0]} score rows for {self.labels.shape[0]} labels")
        if np.any(self.labels < 0) or np.any(self.labels >= self.scores.shape[1]):
            raise ArgumentError(f"labels must lie in [0, {self.scores.shape[1]})")

    @property
    def n_samples(self) -> int:
        return self.labels.shape[0]

    @property
    def rows(self) -> np.ndarray:
        return np.arange(self.n_samples)

    @property
    def predicted(self) -> np.ndarray:
        return np.argmax(self.scores, axis=1)

    @property
    def correct_probs(self) -> np.ndarray:
        return self.scores[self.rows, self.labels]

    @property
    def predicted_probs(self) -> np.ndarray:
        return self.scores[self.rows, self.predicted]


@dataclass
class LossBreakdown:
    ce: float
    ps: float
    entropy: float
    total: float

    def as_dict(self) -> dict:
        return {"ce": self.ce, "ps": self.ps, "entropy": self.entropy, "total": self.total}


def ce_loss(batch: BatchPrediction) -> float:
    return float(-np.mean(np.log(np.maximum(batch.correct_probs, PROB_FLOOR))))


def ps_loss(batch: BatchPrediction, tau: float) -> float:
    probs = batch.predicted_probs
    qualifying = probs[probs > tau]
    if qualifying.size == 0:
        return 1.0
    return float(1.0 - qualifying.mean())


def _xlogx(p: np.ndarray) -> np.ndarray:
    return p * np.log(np.maximum(p, PROB_FLOOR))


def entropy_loss(batch: BatchPrediction, mode: str = "correct_class") -> float:
    if mode == "distribution":
        return float(-np.sum(_xlogx(batch.scores)) / batch.n_samples)
    return float(-np.mean(_xlogx(batch.correct_probs)))


def total_loss(batch: BatchPrediction, cfg: LossConfig) -> LossBreakdown:
    ce = ce_loss(batch)
    ps = ps_loss(batch, cfg.tau)
    ent = entropy_loss(batch, cfg.entropy_mode)
    total = ce + cfg.effective_gamma * ps + cfg.effective_omega * ent
    return LossBreakdown(ce=ce, ps=ps, entropy=ent, total=total)


def total_loss_grad(batch: BatchPrediction, cfg: LossConfig) -> np.ndarray:
    """d total / d scores, shape (N_s, K)."""
    n = batch.n_samples
    rows = batch.rows
    grad = np.zeros_like(batch.scores)

    correct = batch.correct_probs
    safe = correct > PROB_FLOOR
    grad[rows[safe], batch.labels[safe]] -= 1.0 / (n * correct[safe])

    gamma = cfg.effective_gamma
    if gamma > 0.0:
        predicted = batch.predicted
        probs = batch.predicted_probs
        qualifying = probs > cfg.tau
        count = int(qualifying.sum())
        if count > 0:
            grad[rows[qualifying], predicted[qualifying]] -= gamma / count

    omega = cfg.effective_omega
    if omega > 0.0:
        if cfg.entropy_mode == "distribution":
            p = batch.scores
            grad -= omega * np.where(p > PROB_FLOOR, np.log(np.maximum(p, PROB_FLOOR)) + 1.0, np.log(PROB_FLOOR)) / n
        else:
            d = np.where(safe, np.log(np.maximum(correct, PROB_FLOOR)) + 1.0, np.log(PROB_FLOOR))
            grad[rows, batch.labels] -= omega * d / n

    return grad
