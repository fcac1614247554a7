"""
Service layer for the binary checkpoint format

Layout (all integers little-endian):
    magic        8 bytes  b"SSQLCKPT"
    version      uint32
    header_len   uint32
    header       UTF-8 JSON, sorted keys, no timestamps
    theta_c      float64 x n_extractor_params
    theta        float64 x n_theta
Any layout change requires a FORMAT_VERSION bump.
"""
import json
import logging
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Union

import numpy as np

from app.core.exceptions import ConfigurationError, DataFormatError
from app.core.random import stream
from app.schemas.experiment import ExperimentConfig, build_config
from app.training.extractor import parameter_count
from app.training.model import QuantumClassifier, build_model

logger = logging.getLogger(__name__)

MAGIC = b"SSQLCKPT"
FORMAT_VERSION = 1
_PREAMBLE = struct.Struct("<8sII")
STRUCTURAL_FIELDS = (
    "head", "n_q", "n_blocks", "n_classes", "n_features", "extractor",
    "extractor_hidden", "encoding_mode", "renormalize_scores",
)


@dataclass(frozen=True)
class ModelCheckpoint:
    config: ExperimentConfig
    seed: int
    run_id: str
    input_dim: int
    extractor_params: np.ndarray
    theta: np.ndarray
    epochs_trained: int
    final_loss: float
    history_digest: str
    format_version: int = FORMAT_VERSION

    def header(self) -> Dict[str, Any]:
        return {
            "format_version": self.format_version,
            "config": self.config.training_echo(),
            "seed": self.seed,
            "run_id": self.run_id,
            "input_dim": self.input_dim,
            "n_extractor_params": int(self.extractor_params.shape[0]),
            "n_theta": int(self.theta.shape[0]),
            "history": {
                "epochs": self.epochs_trained,
                "final_loss": self.final_loss,
                "digest": self.history_digest,
            },
        }


def _check_counts(config: ExperimentConfig, input_dim: int, n_c: int, n_theta: int) -> None:
    expected_c = parameter_count(config.extractor_config(input_dim))
    expected_theta = config.n_blocks * config.n_q
    if n_c != expected_c or n_theta != expected_theta:
        raise DataFormatError(
            f"parameter counts ({n_c}, {n_theta}) do not match the config ({expected_c}, {expected_theta})"
        )


def checkpoint_from_model(
    model: QuantumClassifier,
    config: ExperimentConfig,
    seed: int,
    input_dim: int,
    epochs_trained: int,
    final_loss: float,
    history_digest: str,
) -> ModelCheckpoint:
    return ModelCheckpoint(
        config=config,
        seed=seed,
        run_id=config.run_id(seed),
        input_dim=input_dim,
        extractor_params=model.extractor.params.copy(),
        theta=np.asarray(model.theta, dtype=np.float64).copy(),
        epochs_trained=epochs_trained,
        final_loss=float(final_loss),
        history_digest=history_digest,
    )


def encode_checkpoint(ckpt: ModelCheckpoint) -> bytes:
    header = json.dumps(ckpt.header(), sort_keys=True, separators=(",", ":")).encode("utf-8")
    return b"".join([
        _PREAMBLE.pack(MAGIC, ckpt.format_version, len(header)),
        header,
        ckpt.extractor_params.astype("<f8").tobytes(),
        ckpt.theta.astype("<f8").tobytes(),
    ])


def save_checkpoint(ckpt: ModelCheckpoint, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_checkpoint(ckpt))
    logger.info(f"Saved checkpoint {ckpt.run_id} to {path}")
    return path


def decode_checkpoint(blob: bytes, source: str = "<bytes>") -> ModelCheckpoint:
    """
    Parse checkpoint bytes.

    Raises:
        DataFormatError: bad magic, unknown version, truncation, or a header
            whose config or parameter counts are inconsistent
    """
    if len(blob) < _PREAMBLE.size:
        raise DataFormatError(f"{source}: truncated preamble at offset {len(blob)}")
    magic, version, header_len = _PREAMBLE.unpack_from(blob, 0)
    if magic != MAGIC:
        raise DataFormatError(f"{source}: bad magic {magic!r} at offset 0")
    if version != FORMAT_VERSION:
        raise DataFormatError(f"{source}: unsupported format version {version} at offset 8")

    offset = _PREAMBLE.size
    if len(blob) < offset + header_len:
        raise DataFormatError(f"{source}: truncated header at offset {len(blob)}, expected {offset + header_len}")
    try:
        header = json.loads(blob[offset:offset + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise DataFormatError(f"{source}: unreadable header at offset {offset}: {e}")
    offset += header_len

    try:
        config = build_config(header["config"])
        n_c = int(header["n_extractor_params"])
        n_theta = int(header["n_theta"])
        input_dim = int(header["input_dim"])
        history = header["history"]
    except (KeyError, TypeError, ValueError) as e:
        raise DataFormatError(f"{source}: incomplete header: {e}")
    except ConfigurationError as e:
        raise DataFormatError(f"{source}: config in header is invalid: {e.message}")
    _check_counts(config, input_dim, n_c, n_theta)

    expected_end = offset + 8 * (n_c + n_theta)
    if len(blob) != expected_end:
        raise DataFormatError(f"{source}: parameter blocks end at offset {len(blob)}, expected {expected_end}")
    extractor_params = np.frombuffer(blob, dtype="<f8", count=n_c, offset=offset).astype(np.float64)
    theta = np.frombuffer(blob, dtype="<f8", count=n_theta, offset=offset + 8 * n_c).astype(np.float64)

    return ModelCheckpoint(
        config=config,
        seed=int(header["seed"]),
        run_id=str(header["run_id"]),
        input_dim=input_dim,
        extractor_params=extractor_params,
        theta=theta,
        epochs_trained=int(history["epochs"]),
        final_loss=float(history["final_loss"]),
        history_digest=str(history["digest"]),
        format_version=version,
    )


def load_checkpoint(path: Union[str, Path]) -> ModelCheckpoint:
    path = Path(path)
    if not path.is_file():
        raise DataFormatError(f"checkpoint not found: {path}")
    ckpt = decode_checkpoint(path.read_bytes(), str(path))
    logger.info(f"Loaded checkpoint {ckpt.run_id} from {path}")
    return ckpt


def check_compatible(ckpt: ModelCheckpoint, config: ExperimentConfig) -> None:
    """Structural fields set explicitly in ``config`` must agree with the checkpoint."""
    for name in STRUCTURAL_FIELDS:
        if name in config.model_fields_set and getattr(config, name) != getattr(ckpt.config, name):
            raise DataFormatError(
                f"{name}: checkpoint has {getattr(ckpt.config, name)!r}, config asks for {getattr(config, name)!r}"
            )


def restore_model(ckpt: ModelCheckpoint) -> QuantumClassifier:
    cfg = ckpt.config
    skeleton = build_model(
        head=cfg.head,
        n_q=cfg.n_q,
        n_blocks=cfg.n_blocks,
        n_classes=cfg.n_classes,
        extractor_config=cfg.extractor_config(ckpt.input_dim),
        rng=stream(ckpt.seed, "restore"),
        encoding_mode=cfg.encoding_mode,
        renormalize_scores=cfg.renormalize_scores,
    )
    return skeleton.with_parameters(np.concatenate([ckpt.extractor_params, ckpt.theta]))
