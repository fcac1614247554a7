"""
Finite-shot inference for both heads and accuracy evaluation
"""
import numpy as np
import pytest

from app.core.exceptions import ArgumentError
from app.core.random import stream
from app.quantum.heads import Observable, aggregate_sum, build_partition, default_observables
from app.quantum.noise import NoiseModel
from app.services.inference_service import (
    basis_group,
    evaluate_accuracy,
    exact_expectations,
    plan_shots,
    predict_vanilla_shots,
    predict_yomo_shots,
)
from tests.conftest import make_model


def zero_state_probs(n_q):
    probs = np.zeros(1 << n_q)
    probs[0] = 1.0
    return probs


# =============================================================================
# Yomo
# =============================================================================

@pytest.mark.parametrize("n_shots", [1, 2, 7, 100])
def test_yomo_one_hot_distribution(n_shots):
    probs = np.zeros(16)
    probs[5] = 1.0
    outcome = predict_yomo_shots(probs, build_partition(4, 4), n_shots, stream(0, "shots"))
    assert outcome.predicted == 1
    assert list(outcome.scores) == [0, n_shots, 0, 0]


def test_yomo_infinite_uniform_goes_to_class_zero():
    outcome = predict_yomo_shots(np.full(16, 1 / 16), build_partition(4, 4), None)
    assert outcome.predicted == 0
    assert outcome.shots_used == 0


def test_yomo_mean_and_sum_rules_differ_on_uneven_partition():
    part = build_partition(2, 3)
    probs = np.array([0.2, 0.2, 0.35, 0.25])
    assert predict_yomo_shots(probs, part, None, rule="mean").predicted == 1
    assert predict_yomo_shots(probs, part, None, rule="sum").predicted == 0


def test_yomo_finite_shots_need_stream():
    with pytest.raises(ArgumentError):
        predict_yomo_shots(np.full(4, 0.25), build_partition(2, 2), 3)


def test_yomo_votes_are_reproducible():
    probs = np.array([0.1, 0.2, 0.3, 0.4])
    a = predict_yomo_shots(probs, build_partition(2, 2), 11, stream(5, "sample", 0, 0))
    b = predict_yomo_shots(probs, build_partition(2, 2), 11, stream(5, "sample", 0, 0))
    assert np.array_equal(a.scores, b.scores)
    assert a.scores.sum() == 11


def test_single_shot_prediction_follows_class_mass():
    part = build_partition(3, 3)
    rng = stream(9, "single-shot")
    for b in range(8):
        basis = np.zeros(8)
        basis[b] = 1.0
        assert predict_yomo_shots(basis, part, 1, rng).predicted == part.class_of[b]

    probs = stream(9, "probs").dirichlet(np.ones(8))
    enumerated = np.array([
        sum(probs[b] for b in range(8) if part.class_of[b] == c) for c in range(part.n_classes)
    ])
    np.testing.assert_allclose(enumerated, aggregate_sum(probs, part), atol=1e-12)

    draws = 20000
    counts = np.bincount([predict_yomo_shots(probs, part, 1, rng).predicted for _ in range(draws)], minlength=3)
    np.testing.assert_allclose(counts / draws, enumerated, atol=0.015)


# =============================================================================
# Vanilla
# =============================================================================

def test_basis_groups():
    assert basis_group(Observable("ZZII")) == "computational"
    assert basis_group(Observable("IIII")) == "computational"
    assert basis_group(Observable("YIYI")) == "y"
    with pytest.raises(ArgumentError):
        basis_group(Observable("XIII"))
    with pytest.raises(ArgumentError):
        basis_group(Observable("ZYII"))


def test_vanilla_infinite_on_zero_state():
    observables = default_observables(4, 10)
    probs_y = np.full(16, 1 / 16)
    outcome = predict_vanilla_shots(zero_state_probs(4), probs_y, observables, None)
    assert outcome.predicted == 0
    np.testing.assert_allclose(outcome.estimates, [1.0] * 8 + [0.0, 0.0], atol=1e-12)


def test_vanilla_single_shot_on_zero_state():
    observables = default_observables(4, 10)
    outcome = predict_vanilla_shots(zero_state_probs(4), np.full(16, 1 / 16), observables, 1, stream(0))
    assert outcome.shots_used == 1
    assert outcome.predicted == 0
    # the Y group got no shot and reads 0
    np.testing.assert_allclose(outcome.estimates[8:], [0.0, 0.0])


def test_exact_expectations_need_y_distribution():
    with pytest.raises(ArgumentError):
        exact_expectations(zero_state_probs(4), None, default_observables(4, 10))


def test_estimator_variance_scales_with_shots():
    probs = np.array([0.8, 0.2])  # <Z> = 0.6, single-shot variance 0.64
    observables = [Observable("Z")]
    n_shots = 100
    estimates = [
        predict_vanilla_shots(probs, None, observables, n_shots, stream(3, "scale", r)).estimates[0]
        for r in range(2000)
    ]
    assert np.mean(estimates) == pytest.approx(0.6, abs=0.01)
    assert np.std(estimates) == pytest.approx(0.8 / np.sqrt(n_shots), rel=0.1)


def test_estimator_rmse_shrinks_with_root_shots():
    rng = stream(4, "rmse")
    probs = rng.dirichlet(np.ones(16))
    probs_y = rng.dirichlet(np.ones(16))
    observables = default_observables(4, 10)
    exact = exact_expectations(probs, probs_y, observables)
    rmse = {}
    for n_shots in (100, 10000):
        estimates = np.array([
            predict_vanilla_shots(probs, probs_y, observables, n_shots, stream(4, "rmse", n_shots, r)).estimates
            for r in range(200)
        ])
        rmse[n_shots] = np.sqrt(np.mean((estimates - exact) ** 2, axis=0))
    ratio = rmse[100] / rmse[10000]
    assert np.all(ratio > 5.0) and np.all(ratio < 20.0), ratio


@pytest.mark.parametrize("n_shots", [50, 200])
@pytest.mark.parametrize("eps", [0.1, 0.2])
def test_estimator_deviation_within_hoeffding(n_shots, eps):
    # Z-only strings share the computational group, so each sees every shot
    observables = default_observables(4, 8)
    probs = stream(6, "hoeffding").dirichlet(np.ones(16))
    exact = exact_expectations(probs, None, observables)
    repeats = 2000
    estimates = np.array([
        predict_vanilla_shots(probs, None, observables, n_shots, stream(6, "hoeffding", n_shots, r)).estimates
        for r in range(repeats)
    ])
    exceed = np.mean(np.abs(estimates - exact) >= eps, axis=0)
    # +-1 outcomes: range 2
    bound = min(1.0, 2.0 * np.exp(-n_shots * eps ** 2 / 2.0))
    assert np.all(exceed <= bound + 0.01), exceed


# =============================================================================
# Shot allocation
# =============================================================================

@pytest.mark.parametrize("allocation,n_shots,expected", [
    ("round_robin", 1, {"computational": 1, "y": 0}),
    ("round_robin", 5, {"computational": 3, "y": 2}),
    ("all_to_z", 5, {"computational": 5, "y": 0}),
    ("proportional", 10, {"computational": 8, "y": 2}),
    ("proportional", 1, {"computational": 1, "y": 0}),
])
def test_plan_shots(allocation, n_shots, expected):
    plan = plan_shots(default_observables(4, 10), n_shots, allocation)
    assert plan.allocations == expected
    assert sum(plan.allocations.values()) == n_shots


@pytest.mark.parametrize("n_shots", [1, 2, 3, 17, 100])
@pytest.mark.parametrize("allocation", ["round_robin", "all_to_z", "proportional"])
def test_plan_always_spends_budget(allocation, n_shots):
    plan = plan_shots(default_observables(4, 10), n_shots, allocation)
    assert sum(plan.allocations.values()) == n_shots


def test_plan_infinite():
    plan = plan_shots(default_observables(4, 10), None)
    assert plan.is_infinite
    assert plan.allocations == {}


def test_plan_rejects_bad_inputs():
    with pytest.raises(ArgumentError):
        plan_shots(default_observables(4, 4), 0)
    with pytest.raises(ArgumentError):
        plan_shots(default_observables(4, 4), 3, "greedy")


# =============================================================================
# Accuracy evaluation
# =============================================================================

@pytest.fixture
def blob_model():
    return make_model("yomo", n_q=4, n_blocks=2, n_classes=4, input_dim=8, seed=2)


def test_infinite_shots_single_repeat(blob_model, blobs):
    _, test = blobs
    report = evaluate_accuracy(blob_model, test, None, repeats=5)
    assert report.repeat_count == 1
    assert report.std_err == 0.0
    assert 0.0 <= report.accuracy <= 1.0


def test_finite_shot_repeats(blob_model, blobs):
    _, test = blobs
    report = evaluate_accuracy(blob_model, test, 1, repeats=3, seed=4)
    assert report.repeat_count == 3
    assert len(report.per_repeat) == 3
    assert report.accuracy == pytest.approx(np.mean(report.per_repeat))


def test_evaluation_is_reproducible_across_thread_counts(blob_model, blobs):
    _, test = blobs
    a = evaluate_accuracy(blob_model, test, 3, repeats=2, seed=9, threads=1)
    b = evaluate_accuracy(blob_model, test, 3, repeats=2, seed=9, threads=3)
    assert a == b


def test_zero_noise_matches_noiseless(blob_model, blobs):
    _, test = blobs
    clean = evaluate_accuracy(blob_model, test, None)
    noisy = evaluate_accuracy(blob_model, test, None, noise=NoiseModel(name="zero", p1=0.0, p2=0.0), trajectories=3)
    assert noisy.accuracy == clean.accuracy


def test_vanilla_accuracy(blobs):
    _, test = blobs
    model = make_model("vanilla", n_q=4, n_blocks=2, n_classes=4, input_dim=8, seed=3)
    report = evaluate_accuracy(model, test, 1, repeats=2, allocation="proportional")
    assert 0.0 <= report.accuracy <= 1.0


def test_evaluation_guards(blob_model, blobs):
    _, test = blobs
    with pytest.raises(ArgumentError):
        evaluate_accuracy(blob_model, test, 1, repeats=0)
    with pytest.raises(ArgumentError):
        evaluate_accuracy(blob_model, test.select(np.array([], dtype=int)), 1)
