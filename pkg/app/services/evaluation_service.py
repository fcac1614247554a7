"""
Service layer for evaluating checkpoints across shot budgets, noise models and seeds
"""
import logging
from pathlib import Path
from typing import List, Optional, Sequence, Union

from app.quantum.noise import NoiseModel
from app.schemas.experiment import NOISELESS, ExperimentConfig
from app.schemas.results import EVALUATION_COLUMNS, EvaluationRow
from app.services import checkpoint_service, results_service
from app.services.checkpoint_service import ModelCheckpoint
from app.services.dataset_service import Dataset
from app.services.inference_service import evaluate_accuracy
from app.services.training_service import load_datasets
from app.training.model import QuantumClassifier

# Configure logging
logger = logging.getLogger(__name__)

EVALUATION_FILE = "evaluation.csv"


def noise_label(noise: Optional[NoiseModel]) -> str:
    return noise.name if noise is not None else NOISELESS


def evaluate_model(
    model: QuantumClassifier,
    ckpt: ModelCheckpoint,
    test: Dataset,
    config: ExperimentConfig,
    noises: Sequence[Optional[NoiseModel]],
) -> List[EvaluationRow]:
    """
    One row per (noise, shots, seed) in that nesting order.

    Args:
        model: restored classifier
        ckpt: its checkpoint, for the run id and structure
        test: evaluation split
        config: evaluation settings (shots, repeats, seeds, trajectories, rules)
        noises: noise models, None for noiseless

    Returns:
        Evaluation rows
    """
    rows = []
    for noise in noises:
        for shots in config.shots:
            for seed in config.seeds:
                report = evaluate_accuracy(
                    model,
                    test,
                    shots,
                    noise=noise,
                    repeats=config.repeats,
                    seed=seed,
                    trajectories=config.trajectories,
                    yomo_rule=config.yomo_rule,
                    allocation=config.allocation,
                    threads=config.threads,
                )
                rows.append(EvaluationRow(
                    run_id=ckpt.run_id,
                    head=ckpt.config.head,
                    n_q=ckpt.config.n_q,
                    n_blocks=ckpt.config.n_blocks,
                    tau=ckpt.config.tau,
                    noise_name=noise_label(noise),
                    shots=shots,
                    repeat_count=report.repeat_count,
                    accuracy=report.accuracy,
                    std_err=report.std_err,
                    seed=seed,
                ))
    return rows


def evaluate_checkpoint(
    ckpt: ModelCheckpoint,
    config: ExperimentConfig,
    noises: Optional[Sequence[Optional[NoiseModel]]] = None,
    test: Optional[Dataset] = None,
) -> List[EvaluationRow]:
    checkpoint_service.check_compatible(ckpt, config)
    model = checkpoint_service.restore_model(ckpt)
    if test is None:
        _, test = load_datasets(ckpt.config)
    if noises is None:
        noises = [config.noise_model()]
    return evaluate_model(model, ckpt, test, config, noises)


def write_evaluation(rows: Sequence[EvaluationRow], path: Union[str, Path]) -> Path:
    path = results_service.write_csv(path, EVALUATION_COLUMNS, (row.csv_values() for row in rows))
    results_service.persist(results_service.record_evaluations, list(rows))
    return path


def run_eval(
    checkpoint_path: Union[str, Path],
    config: ExperimentConfig,
    out_path: Optional[Union[str, Path]] = None,
) -> List[EvaluationRow]:
    """
    Evaluate a saved checkpoint and write the results CSV.

    Args:
        checkpoint_path: file written by ``run_train``
        config: evaluation settings; structural fields set here must match the checkpoint
        out_path: CSV destination, default next to the checkpoint

    Returns:
        The evaluation rows written

    Raises:
        DataFormatError: unreadable checkpoint or checkpoint/config mismatch
    """
    ckpt = checkpoint_service.load_checkpoint(checkpoint_path)
    rows = evaluate_checkpoint(ckpt, config)
    target = Path(out_path) if out_path else Path(checkpoint_path).parent / EVALUATION_FILE
    write_evaluation(rows, target)
    return rows
