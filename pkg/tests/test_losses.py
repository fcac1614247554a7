"""
Training losses and score gradients
"""
import numpy as np
import pytest
from pydantic import ValidationError

from app.core.exceptions import ArgumentError
from app.training.losses import (
    BatchPrediction,
    LossConfig,
    ce_loss,
    entropy_loss,
    ps_loss,
    total_loss,
    total_loss_grad,
)


def numeric_score_grad(batch, cfg, step=1e-6):
    grad = np.zeros_like(batch.scores)
    for idx in np.ndindex(*batch.scores.shape):
        plus = batch.scores.copy()
        minus = batch.scores.copy()
        plus[idx] += step
        minus[idx] -= step
        grad[idx] = (
            total_loss(BatchPrediction(plus, batch.labels), cfg).total
            - total_loss(BatchPrediction(minus, batch.labels), cfg).total
        ) / (2 * step)
    return grad


@pytest.fixture
def batch():
    scores = np.array([
        [0.70, 0.10, 0.15, 0.05],
        [0.20, 0.45, 0.25, 0.10],
        [0.05, 0.05, 0.80, 0.10],
    ])
    return BatchPrediction(scores=scores, labels=np.array([0, 2, 2]))


# =============================================================================
# Values
# =============================================================================

def test_ce_of_even_split():
    assert ce_loss(BatchPrediction([[0.5, 0.5]], [0])) == pytest.approx(np.log(2))


def test_ce_clamps_zero_probability():
    assert ce_loss(BatchPrediction([[0.0, 1.0]], [0])) == pytest.approx(-np.log(1e-12))


def test_ps_uses_qualifying_predictions(batch):
    # predicted-class probabilities 0.70, 0.45, 0.80; above tau: 0.70 and 0.80
    assert ps_loss(batch, 0.6) == pytest.approx(1 - 0.75)


def test_ps_without_qualifying_samples():
    assert ps_loss(BatchPrediction([[0.5, 0.5]], [1]), 0.6) == 1.0


def test_entropy_correct_class(batch):
    p = np.array([0.70, 0.25, 0.80])
    assert entropy_loss(batch) == pytest.approx(float(np.mean(-p * np.log(p))))


def test_entropy_distribution(batch):
    s = batch.scores
    assert entropy_loss(batch, "distribution") == pytest.approx(float(-np.sum(s * np.log(s)) / 3))


def test_total_combines_terms(batch):
    cfg = LossConfig(tau=0.6, gamma=0.1, omega=0.2)
    parts = total_loss(batch, cfg)
    assert parts.total == pytest.approx(parts.ce + 0.1 * parts.ps + 0.2 * parts.entropy)


def test_vanilla_head_is_pure_cross_entropy(batch):
    cfg = LossConfig(gamma=0.5, omega=0.5, head="vanilla")
    assert total_loss(batch, cfg).total == pytest.approx(ce_loss(batch))


# =============================================================================
# Gradients
# =============================================================================

@pytest.mark.parametrize("entropy_mode", ["correct_class", "distribution"])
def test_score_gradient_matches_finite_differences(batch, entropy_mode):
    cfg = LossConfig(tau=0.6, gamma=0.3, omega=0.2, entropy_mode=entropy_mode)
    np.testing.assert_allclose(total_loss_grad(batch, cfg), numeric_score_grad(batch, cfg), atol=1e-6)


def test_vanilla_score_gradient(batch):
    cfg = LossConfig(head="vanilla")
    np.testing.assert_allclose(total_loss_grad(batch, cfg), numeric_score_grad(batch, cfg), atol=1e-6)


# =============================================================================
# Validation
# =============================================================================

@pytest.mark.parametrize("tau", [0.0, 1.0, 1.5])
def test_tau_range(tau):
    with pytest.raises(ValidationError):
        LossConfig(tau=tau)


def test_labels_in_range():
    with pytest.raises(ArgumentError):
        BatchPrediction([[0.5, 0.5]], [2])


def test_row_count_must_match_labels():
    with pytest.raises(ArgumentError):
        BatchPrediction([[0.5, 0.5]], [0, 1])
