"""
Training, checkpoint evaluation, sweeps and the run registry
"""
import os
from pathlib import Path

import numpy as np
import pytest
from sqlalchemy.orm import sessionmaker

from app.db.database import init_db, make_engine
from app.models.runs import EvaluationRecord, TrainingRun
from app.quantum.noise import NoiseModel, resolve_preset
from app.schemas.experiment import build_config
from app.schemas.results import EVALUATION_COLUMNS, LOSS_TRACE_COLUMNS, EvaluationRow
from app.services import evaluation_service, results_service, sweep_service, training_service
from app.services.checkpoint_service import load_checkpoint
from app.services.inference_service import evaluate_accuracy


def with_values(config, **values):
    return build_config({**config.model_dump(), **values})


# =============================================================================
# Training
# =============================================================================

def test_train_writes_checkpoint_and_trace(quick_config):
    results = training_service.run_train(quick_config)
    assert len(results) == 1
    result = results[0]
    assert result.checkpoint_path.name == training_service.CHECKPOINT_FILE
    assert result.checkpoint_path.parent.name == quick_config.run_id(0)

    rows = results_service.read_csv(result.trace_path)
    assert len(rows) == 2
    assert list(rows[0].keys()) == list(LOSS_TRACE_COLUMNS)
    assert [r["epoch"] for r in rows] == ["1", "2"]
    for row in rows:
        assert float(row["total"]) > 0
        assert row["test_loss"] != ""


def test_training_is_bit_reproducible(quick_config, tmp_path):
    a = training_service.run_train(quick_config, out_dir=str(tmp_path / "a"))[0]
    b = training_service.run_train(quick_config, out_dir=str(tmp_path / "b"))[0]
    assert a.checkpoint_path.read_bytes() == b.checkpoint_path.read_bytes()
    assert a.trace == b.trace


def test_one_run_per_seed(quick_config):
    results = training_service.run_train(with_values(quick_config, seeds=[0, 1], epochs=1))
    assert [r.checkpoint.seed for r in results] == [0, 1]
    assert results[0].checkpoint.run_id != results[1].checkpoint.run_id


def test_trace_total_combines_terms(quick_config):
    train, test = training_service.load_datasets(quick_config)
    _, trace = training_service.train_model(quick_config, 0, train, test)
    for row in trace:
        expected = row.ce + quick_config.gamma * row.ps + quick_config.omega * row.entropy
        assert row.total == pytest.approx(expected)


def test_vanilla_training(quick_config):
    config = with_values(quick_config, head="vanilla", epochs=1)
    result = training_service.run_train(config)[0]
    assert result.model.head == "vanilla"
    assert len(result.trace) == 1


# =============================================================================
# Evaluation
# =============================================================================

def test_eval_rows_cover_the_grid(quick_config):
    result = training_service.run_train(quick_config)[0]
    rows = evaluation_service.run_eval(result.checkpoint_path, quick_config)
    assert [(r.noise_name, r.shots) for r in rows] == [("none", 1), ("none", None)]
    finite, infinite = rows
    assert finite.repeat_count == 2
    assert infinite.repeat_count == 1
    assert infinite.std_err == 0.0

    table = results_service.read_csv(result.checkpoint_path.parent / evaluation_service.EVALUATION_FILE)
    assert list(table[0].keys()) == list(EVALUATION_COLUMNS)
    assert [r["shots"] for r in table] == ["1", "inf"]
    assert table[0]["run_id"] == result.checkpoint.run_id


def test_eval_with_several_seeds_and_noise(quick_config, tmp_path):
    result = training_service.run_train(quick_config)[0]
    config = with_values(quick_config, seeds=[0, 1], noise="Quantinuum H1-1", shots=[1])
    rows = evaluation_service.run_eval(result.checkpoint_path, config, out_path=tmp_path / "eval.csv")
    assert [(r.noise_name, r.shots, r.seed) for r in rows] == [
        ("Quantinuum H1-1", 1, 0), ("Quantinuum H1-1", 1, 1)
    ]
    assert (tmp_path / "eval.csv").is_file()


def test_infinite_shot_accuracy_matches_direct_argmax(quick_config):
    result = training_service.run_train(quick_config)[0]
    _, test = training_service.load_datasets(quick_config)
    direct = np.mean([
        np.argmax(result.model.scores(x)) == y for x, y in zip(test.inputs, test.labels)
    ])
    assert evaluate_accuracy(result.model, test, None).accuracy == pytest.approx(direct)


def test_eval_rejects_structural_mismatch(quick_config):
    from app.core.exceptions import DataFormatError

    result = training_service.run_train(quick_config)[0]
    with pytest.raises(DataFormatError):
        evaluation_service.run_eval(result.checkpoint_path, with_values(quick_config, n_q=5))


def test_checkpoint_records_history(quick_config):
    result = training_service.run_train(quick_config)[0]
    ckpt = load_checkpoint(result.checkpoint_path)
    assert ckpt.epochs_trained == 2
    assert ckpt.final_loss == result.trace[-1].total


# =============================================================================
# Sweeps
# =============================================================================

def test_shots_sweep_reuses_one_model(quick_config):
    rows = sweep_service.run_sweep(quick_config, "shots", ["1", "3", "inf"])
    assert [r.axis_value for r in rows] == ["1", "3", "inf"]
    assert len({r.evaluation.run_id for r in rows}) == 1
    table = results_service.read_csv(f"{quick_config.out_dir}/sweep_shots.csv")
    assert len(table) == 3
    assert table[0]["axis"] == "shots"


def test_tau_sweep_retrains(quick_config):
    config = with_values(quick_config, epochs=1, shots=["inf"])
    rows = sweep_service.run_sweep(config, "tau", ["0.5", "0.7"])
    assert [r.axis_value for r in rows] == ["0.5", "0.7"]
    assert rows[0].evaluation.run_id != rows[1].evaluation.run_id
    assert [r.evaluation.tau for r in rows] == [0.5, 0.7]


def test_failed_cell_leaves_error_row(quick_config):
    config = with_values(quick_config, epochs=1, shots=["inf"], threads=2)
    rows = sweep_service.run_sweep(config, "N_b", ["0", "1"])
    assert rows[0].error is not None
    assert rows[0].evaluation is None
    assert rows[1].error is None
    assert rows[1].evaluation.n_blocks == 1


def test_failed_shared_training_leaves_error_rows(quick_config, monkeypatch):
    train_and_save = sweep_service.train_and_save

    def diverge_on_seed_one(config, seed, *args, **kwargs):
        if seed == 1:
            raise RuntimeError("loss diverged")
        return train_and_save(config, seed, *args, **kwargs)

    monkeypatch.setattr(sweep_service, "train_and_save", diverge_on_seed_one)
    config = with_values(quick_config, seeds=[0, 1], epochs=1)
    rows = sweep_service.run_sweep(config, "shots", ["1", "inf"])
    assert [(r.axis_value, r.error is None) for r in rows] == [
        ("1", True), ("1", False), ("inf", True), ("inf", False),
    ]
    assert all("seed 1" in r.error and "loss diverged" in r.error for r in rows if r.error)
    assert all(r.evaluation.seed == 0 for r in rows if r.evaluation)
    table = results_service.read_csv(f"{config.out_dir}/sweep_shots.csv")
    assert len(table) == 4
    assert [row["error"] != "" for row in table] == [False, True, False, True]


def test_sweep_axis_validation(quick_config):
    from app.core.exceptions import ConfigurationError

    with pytest.raises(ConfigurationError):
        sweep_service.run_sweep(quick_config, "learning_rate", ["0.1"])
    with pytest.raises(ConfigurationError):
        sweep_service.run_sweep(quick_config, "shots", [])
    with pytest.raises(ConfigurationError):
        sweep_service.run_sweep(quick_config, "noise", ["rigetti"])


# =============================================================================
# Run registry
# =============================================================================

@pytest.fixture
def registry(tmp_path):
    engine = make_engine(f"sqlite:///{tmp_path}/registry.db")
    init_db(engine)
    session = sessionmaker(bind=engine)()
    yield session
    session.close()


def registry_row(**overrides):
    values = dict(
        run_id="abc", head="yomo", n_q=4, n_blocks=2, tau=0.6, noise_name="none",
        shots=None, repeat_count=1, accuracy=0.5, std_err=0.0, seed=0,
    )
    values.update(overrides)
    return EvaluationRow(**values)


def test_record_training_run_upserts(registry):
    run = {"run_id": "abc", "head": "yomo", "n_q": 4, "n_blocks": 2, "n_classes": 4, "seed": 0, "epochs": 2}
    assert results_service.record_training_run(registry, run)["inserted"] == 1
    assert results_service.record_training_run(registry, {**run, "epochs": 5})["updated"] == 1
    assert registry.query(TrainingRun).one().epochs == 5


def test_record_evaluations_keyed_by_cell(registry):
    stats = results_service.record_evaluations(registry, [registry_row(), registry_row(shots=10)])
    assert stats == {"inserted": 2, "updated": 0, "errors": 0}
    stats = results_service.record_evaluations(registry, [registry_row(accuracy=0.75)])
    assert stats["updated"] == 1
    infinite = registry.query(EvaluationRecord).filter(EvaluationRecord.shots == "inf").one()
    assert infinite.accuracy == 0.75
    assert infinite.to_dict()["shots"] == "inf"


# =============================================================================
# Trends
# =============================================================================

TREND_SEEDS = [0, 1, 2, 3, 4]
TREND_BASE = {
    "n_q": 4, "n_blocks": 5, "n_classes": 4, "synth_dim": 8, "synth_per_class": 30,
    "synth_spread": 0.1, "tau": 0.6, "gamma": 0.05, "omega": 0.05,
    "epochs": 40, "batch_size": 16, "learning_rate": 0.02,
}


def train_per_seed(values, tmp_path):
    """One trained model per trend seed, with the shared test split."""
    config = build_config({**TREND_BASE, **values, "seeds": TREND_SEEDS, "out_dir": str(tmp_path)})
    _, test = training_service.load_datasets(config)
    return [result.model for result in training_service.run_train(config)], test


def accuracies(models, test, n_shots, noise=None, repeats=5):
    return np.array([
        evaluate_accuracy(model, test, n_shots, noise=noise, repeats=repeats, seed=seed).accuracy
        for seed, model in zip(TREND_SEEDS, models)
    ])


def std_err(values):
    return float(np.std(values, ddof=1) / np.sqrt(len(values)))


def test_training_loss_decreases_over_first_epochs(quick_config):
    config = with_values(quick_config, synth_per_class=20, epochs=30, batch_size=1000, learning_rate=2e-3)
    train, test = training_service.load_datasets(config)
    _, trace = training_service.train_model(config, 0, train, test)
    totals = [row.total for row in trace]
    assert len(totals) == 30
    assert all(later < earlier for earlier, later in zip(totals[:4], totals[1:5])), totals[:5]
    assert totals[-1] < totals[0]


@pytest.mark.slow
def test_single_shot_yomo_beats_vanilla(tmp_path):
    yomo, test = train_per_seed({"head": "yomo"}, tmp_path / "yomo")
    vanilla, _ = train_per_seed({"head": "vanilla"}, tmp_path / "vanilla")
    yomo_single = accuracies(yomo, test, 1)
    vanilla_single = accuracies(vanilla, test, 1)
    yomo_infinite = accuracies(yomo, test, None)
    assert yomo_single.mean() >= vanilla_single.mean() + 0.15
    assert yomo_single.mean() >= yomo_infinite.mean() - 0.10


@pytest.mark.slow
@pytest.mark.parametrize("head", ["yomo", "vanilla"])
def test_accuracy_grows_with_shots(head, tmp_path):
    models, test = train_per_seed({"head": head}, tmp_path)
    grid = [accuracies(models, test, n_shots) for n_shots in (1, 10, 100, None)]
    for fewer, more in zip(grid, grid[1:]):
        slack = 3 * np.hypot(std_err(fewer), std_err(more))
        assert more.mean() >= fewer.mean() - slack


@pytest.mark.slow
def test_accuracy_degrades_with_two_qubit_noise(tmp_path):
    models, test = train_per_seed({"head": "yomo", "n_blocks": 3}, tmp_path)
    means = [
        accuracies(models, test, None, noise=NoiseModel(name=f"p2={p2:g}", p1=0.0, p2=p2)).mean()
        for p2 in (0.0, 0.004, 0.04, 0.4)
    ]
    for weaker, stronger in zip(means, means[1:]):
        assert stronger <= weaker + 0.02, means


@pytest.mark.slow
def test_quantinuum_preset_at_least_as_accurate_as_ionq_on_deep_circuits(tmp_path):
    models, test = train_per_seed({"head": "yomo", "n_blocks": 30, "epochs": 20}, tmp_path)
    quantinuum = accuracies(models, test, None, noise=resolve_preset("Quantinuum H1-1"))
    ionq = accuracies(models, test, None, noise=resolve_preset("IonQ Forte"))
    gap = quantinuum - ionq
    assert gap.mean() >= -std_err(gap)


MNIST_DIR = os.environ.get("LAB_MNIST_DIR")


def mnist_config(tmp_path, **values):
    root = Path(MNIST_DIR)
    return build_config({
        "dataset": "idx", "dataset_preset": "mnist", "n_classes": 10, "n_q": 4, "n_blocks": 5,
        "train_images": str(root / "train-images-idx3-ubyte"),
        "train_labels": str(root / "train-labels-idx1-ubyte"),
        "test_images": str(root / "t10k-images-idx3-ubyte"),
        "test_labels": str(root / "t10k-labels-idx1-ubyte"),
        "downsample_side": 14, "train_subset": 2000, "test_subset": 500,
        "epochs": 5, "out_dir": str(tmp_path), **values,
    })


@pytest.mark.slow
@pytest.mark.skipif(not MNIST_DIR, reason="LAB_MNIST_DIR not set")
def test_mnist_subset_single_shot_beats_chance(tmp_path):
    config = mnist_config(tmp_path)
    result = training_service.run_train(config)[0]
    _, test = training_service.load_datasets(config)
    assert test.input_dim == 196
    assert evaluate_accuracy(result.model, test, 1, repeats=3).accuracy > 0.15


@pytest.mark.slow
@pytest.mark.skipif(not MNIST_DIR, reason="LAB_MNIST_DIR not set")
def test_mnist_sharpening_helps_single_shot(tmp_path):
    reports = {}
    for gamma in (0.05, 0.0):
        config = mnist_config(tmp_path / f"gamma-{gamma}", gamma=gamma)
        result = training_service.run_train(config)[0]
        _, test = training_service.load_datasets(config)
        reports[gamma] = evaluate_accuracy(result.model, test, 1, repeats=5)
    sharpened, plain = reports[0.05], reports[0.0]
    assert sharpened.accuracy >= plain.accuracy - max(sharpened.std_err, plain.std_err)
