"""
Service layer for training classifiers and writing checkpoints and loss traces
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np

from app.core.random import stream
from app.quantum.circuits import describe_circuit
from app.schemas.experiment import ExperimentConfig
from app.schemas.results import LOSS_TRACE_COLUMNS, LossTraceRow
from app.services import checkpoint_service, dataset_service, results_service
from app.services.base import run_digest
from app.services.dataset_service import Dataset
from app.training.gradients import backprop_gradients
from app.training.losses import total_loss
from app.training.model import QuantumClassifier, build_model
from app.training.optimizer import adam_step, init_optimizer

# Configure logging
logger = logging.getLogger(__name__)

CHECKPOINT_FILE = "checkpoint.bin"
LOSS_TRACE_FILE = "loss_trace.csv"


@dataclass
class TrainResult:
    checkpoint: checkpoint_service.ModelCheckpoint
    model: QuantumClassifier
    trace: List[LossTraceRow]
    checkpoint_path: Path
    trace_path: Path


def load_datasets(config: ExperimentConfig) -> Tuple[Dataset, Dataset]:
    """
    Build the train/test splits a config describes.

    Args:
        config: experiment configuration

    Returns:
        (train, test) datasets
    """
    if config.dataset == "synth":
        return dataset_service.synth_blobs(
            config.n_classes, config.synth_dim, config.synth_per_class, config.synth_spread, config.data_seed
        )

    train = dataset_service.load_idx(config.train_images, config.train_labels, config.n_classes)
    test = dataset_service.load_idx(config.test_images, config.test_labels, config.n_classes)
    if config.train_subset:
        train = dataset_service.subset(train, config.train_subset, config.data_seed)
    if config.test_subset:
        test = dataset_service.subset(test, config.test_subset, config.data_seed + 1)
    if config.downsample_side:
        train = dataset_service.downsample(train, config.downsample_side)
        test = dataset_service.downsample(test, config.downsample_side)
    return (
        Dataset(train.inputs, train.labels, train.n_classes, "train", train.image_side),
        Dataset(test.inputs, test.labels, test.n_classes, "test", test.image_side),
    )


def init_model(config: ExperimentConfig, input_dim: int, seed: int) -> QuantumClassifier:
    return build_model(
        head=config.head,
        n_q=config.n_q,
        n_blocks=config.n_blocks,
        n_classes=config.n_classes,
        extractor_config=config.extractor_config(input_dim),
        rng=stream(seed, "init"),
        encoding_mode=config.encoding_mode,
        renormalize_scores=config.renormalize_scores,
    )


def epoch_seed(seed: int, epoch: int) -> int:
    return int(stream(seed, "epoch", epoch).integers(0, 2 ** 63))


def train_model(
    config: ExperimentConfig,
    seed: int,
    train: Dataset,
    test: Optional[Dataset] = None,
) -> Tuple[QuantumClassifier, List[LossTraceRow]]:
    """
    Mini-batch Adam on the head's loss with exact noiseless simulation.

    Each trace row holds the sample-weighted mean of the pre-update batch
    losses over the epoch, plus the end-of-epoch test loss.
    """
    loss_cfg = config.loss_config()
    model = init_model(config, train.input_dim, seed)
    opt = init_optimizer(model.n_params, config.resolved_learning_rate)
    logger.info(
        f"Training {config.head} head, seed={seed}, {model.n_params} parameters, "
        f"{len(train)} samples, batch={config.resolved_batch_size}, lr={config.resolved_learning_rate}"
    )
    logger.debug(describe_circuit(model.circuit))

    trace: List[LossTraceRow] = []
    for epoch in range(1, config.epochs + 1):
        sums = np.zeros(4)
        for batch in dataset_service.batches(train, config.resolved_batch_size, epoch_seed(seed, epoch)):
            bundle = backprop_gradients(model, batch.inputs, batch.labels, loss_cfg)
            params, opt = adam_step(opt, model.parameters(), bundle.flat())
            model = model.with_parameters(params)
            loss = bundle.loss
            sums += len(batch) * np.array([loss.ce, loss.ps, loss.entropy, loss.total])
        means = sums / len(train)

        test_loss = None
        if test is not None and len(test):
            test_loss = total_loss(model.predict_batch(test.inputs, test.labels), loss_cfg).total
        row = LossTraceRow(
            epoch=epoch, ce=means[0], ps=means[1], entropy=means[2], total=means[3], test_loss=test_loss
        )
        trace.append(row)
        logger.info(
            f"epoch {epoch}/{config.epochs}: ce={row.ce:.5f} ps={row.ps:.5f} "
            f"entropy={row.entropy:.5f} total={row.total:.5f} test={test_loss if test_loss is None else round(test_loss, 5)}"
        )
    return model, trace


def run_dir(config: ExperimentConfig, seed: int, out_dir: Optional[str] = None) -> Path:
    return Path(out_dir or config.out_dir) / config.run_id(seed)


def train_and_save(
    config: ExperimentConfig,
    seed: int,
    train: Dataset,
    test: Optional[Dataset] = None,
    out_dir: Optional[str] = None,
) -> TrainResult:
    model, trace = train_model(config, seed, train, test)
    history_digest = run_digest([row.csv_values() for row in trace])
    ckpt = checkpoint_service.checkpoint_from_model(
        model, config, seed, train.input_dim, len(trace), trace[-1].total, history_digest
    )
    target = run_dir(config, seed, out_dir)
    ckpt_path = checkpoint_service.save_checkpoint(ckpt, target / CHECKPOINT_FILE)
    trace_path = results_service.write_csv(
        target / LOSS_TRACE_FILE, LOSS_TRACE_COLUMNS, (row.csv_values() for row in trace)
    )
    results_service.persist(results_service.record_training_run, {
        "run_id": ckpt.run_id,
        "head": config.head,
        "n_q": config.n_q,
        "n_blocks": config.n_blocks,
        "n_classes": config.n_classes,
        "seed": seed,
        "epochs": len(trace),
        "final_loss": ckpt.final_loss,
        "checkpoint_path": str(ckpt_path),
    })
    return TrainResult(ckpt, model, trace, ckpt_path, trace_path)


def run_train(config: ExperimentConfig, out_dir: Optional[str] = None) -> List[TrainResult]:
    """
    Train one model per configured seed.

    Args:
        config: validated experiment configuration
        out_dir: overrides config.out_dir

    Returns:
        One TrainResult per seed, in seed order
    """
    train, test = load_datasets(config)
    results = []
    for seed in config.seeds:
        try:
            results.append(train_and_save(config, seed, train, test, out_dir))
        except Exception as e:
            logger.error(f"Training failed for seed {seed}: {str(e)}")
            raise
    logger.info(f"Training complete: {len(results)} run(s) written under {out_dir or config.out_dir}")
    return results
