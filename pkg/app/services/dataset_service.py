"""
Service layer for loading, shaping and batching datasets
"""
import logging
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import List, Literal, Optional, Tuple, Union

import numpy as np

from app.core.exceptions import ArgumentError, ConfigurationError, DataFormatError
from app.core.random import stream

# Configure logging
logger = logging.getLogger(__name__)

IDX_IMAGE_MAGIC = 0x00000803
IDX_LABEL_MAGIC = 0x00000801

PathLike = Union[str, Path]


@dataclass(frozen=True)
class Dataset:
    """Inputs in [0, 1] with integer labels"""
    inputs: np.ndarray
    labels: np.ndarray
    n_classes: int
    split: Literal["train", "test", "all"] = "all"
    image_side: Optional[int] = None

    def __post_init__(self):
        if self.inputs.ndim != 2:
            raise ArgumentError(f"inputs must be a 2-D array, got shape {self.inputs.shape}")
        if self.inputs.shape[0] != self.labels.shape[0]:
            raise ArgumentError(f"{self.inputs.shape[0]} inputs for {self.labels.shape[0]} labels")
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= self.n_classes):
            raise ArgumentError(f"labels must lie in [0, {self.n_classes})")

    def __len__(self) -> int:
        return self.labels.shape[0]

    @property
    def input_dim(self) -> int:
        return self.inputs.shape[1]

    def select(self, indices: np.ndarray, split: Optional[str] = None) -> "Dataset":
        return Dataset(
            inputs=self.inputs[indices],
            labels=self.labels[indices],
            n_classes=self.n_classes,
            split=split or self.split,
            image_side=self.image_side,
        )


def _read_header(blob: bytes, offset: int, fields: int, path: PathLike) -> Tuple[int, ...]:
    end = offset + 4 * fields
    if len(blob) < end:
        raise DataFormatError(f"{path}: truncated header, expected {end} bytes, file has {len(blob)} (offset {len(blob)})")
    return struct.unpack(f">{fields}I", blob[offset:end])


def load_idx(images_path: PathLike, labels_path: PathLike, n_classes: int = 10) -> Dataset:
    """
    Load an IDX image/label file pair.

    Args:
        images_path: IDX3 file (magic 0x00000803, count, rows, cols, u8 pixels)
        labels_path: IDX1 file (magic 0x00000801, count, u8 labels)
        n_classes: label range

    Returns:
        Dataset with pixels scaled to [0, 1] and d = rows * cols

    Raises:
        DataFormatError: bad magic, truncation or count mismatch
    """
    images_blob = Path(images_path).read_bytes()
    labels_blob = Path(labels_path).read_bytes()

    (magic,) = _read_header(images_blob, 0, 1, images_path)
    if magic != IDX_IMAGE_MAGIC:
        raise DataFormatError(f"{images_path}: bad magic 0x{magic:08x} at offset 0, expected 0x{IDX_IMAGE_MAGIC:08x}")
    count, rows, cols = _read_header(images_blob, 4, 3, images_path)

    (magic,) = _read_header(labels_blob, 0, 1, labels_path)
    if magic != IDX_LABEL_MAGIC:
        raise DataFormatError(f"{labels_path}: bad magic 0x{magic:08x} at offset 0, expected 0x{IDX_LABEL_MAGIC:08x}")
    (label_count,) = _read_header(labels_blob, 4, 1, labels_path)

    if count != label_count:
        raise DataFormatError(f"image count {count} (offset 4) does not match label count {label_count} (offset 4)")

    pixel_bytes = count * rows * cols
    if len(images_blob) < 16 + pixel_bytes:
        raise DataFormatError(f"{images_path}: truncated pixel data at offset {len(images_blob)}, expected {16 + pixel_bytes} bytes")
    if len(labels_blob) < 8 + count:
        raise DataFormatError(f"{labels_path}: truncated label data at offset {len(labels_blob)}, expected {8 + count} bytes")

    pixels = np.frombuffer(images_blob, dtype=np.uint8, count=pixel_bytes, offset=16)
    labels = np.frombuffer(labels_blob, dtype=np.uint8, count=count, offset=8).astype(np.int64)
    if labels.size and labels.max() >= n_classes:
        raise DataFormatError(f"{labels_path}: label {labels.max()} outside [0, {n_classes})")

    inputs = pixels.reshape(count, rows * cols).astype(np.float64) / 255.0
    logger.info(f"Loaded {count} images of {rows}x{cols} from {images_path}")
    return Dataset(
        inputs=inputs,
        labels=labels,
        n_classes=n_classes,
        image_side=rows if rows == cols else None,
    )


def write_idx(ds: Dataset, images_path: PathLike, labels_path: PathLike, rows: int, cols: int) -> None:
    """Write a dataset as an IDX pair; inputs are quantized to bytes."""
    if rows * cols != ds.input_dim:
        raise ArgumentError(f"{rows}x{cols} does not match input dimension {ds.input_dim}")
    pixels = np.rint(np.clip(ds.inputs, 0.0, 1.0) * 255.0).astype(np.uint8)
    Path(images_path).write_bytes(
        struct.pack(">4I", IDX_IMAGE_MAGIC, len(ds), rows, cols) + pixels.tobytes()
    )
    Path(labels_path).write_bytes(
        struct.pack(">2I", IDX_LABEL_MAGIC, len(ds)) + ds.labels.astype(np.uint8).tobytes()
    )


def downsample(ds: Dataset, side: int) -> Dataset:
    """Block-mean pooling of square images down to ``side`` x ``side``."""
    original = ds.image_side or int(round(np.sqrt(ds.input_dim)))
    if original * original != ds.input_dim:
        raise ArgumentError(f"inputs of dimension {ds.input_dim} are not square images")
    if side < 1 or original % side != 0:
        raise ArgumentError(f"target side {side} must divide the original side {original}")
    factor = original // side
    pooled = ds.inputs.reshape(len(ds), side, factor, side, factor).mean(axis=(2, 4))
    return Dataset(
        inputs=pooled.reshape(len(ds), side * side),
        labels=ds.labels,
        n_classes=ds.n_classes,
        split=ds.split,
        image_side=side,
    )


def subset(ds: Dataset, size: int, seed: int) -> Dataset:
    """Deterministic random subset of ``size`` samples."""
    if size >= len(ds):
        return ds
    order = stream(seed, "subset").permutation(len(ds))[:size]
    return ds.select(np.sort(order))


def synth_blobs(n_classes: int, dim: int, n_per_class: int, spread: float, seed: int) -> Tuple[Dataset, Dataset]:
    """
    Gaussian clusters around the unit vectors e_k, clipped to [0, 1].

    Each class is shuffled and split 80/20 into train/test.
    """
    if n_classes < 2:
        raise ConfigurationError(f"synth_blobs needs K >= 2, got {n_classes}")
    if n_classes > dim:
        raise ConfigurationError(f"synth_blobs places centers on coordinate axes: K={n_classes} > d={dim}")
    if n_per_class < 2:
        raise ConfigurationError(f"synth_blobs needs at least 2 samples per class, got {n_per_class}")
    rng = stream(seed, "synth_blobs")
    n_train = int(round(0.8 * n_per_class))
    n_train = min(max(n_train, 1), n_per_class - 1)

    train_x, train_y, test_x, test_y = [], [], [], []
    for k in range(n_classes):
        center = np.zeros(dim)
        center[k] = 1.0
        points = np.clip(center + spread * rng.standard_normal((n_per_class, dim)), 0.0, 1.0)
        order = rng.permutation(n_per_class)
        train_x.append(points[order[:n_train]])
        test_x.append(points[order[n_train:]])
        train_y.append(np.full(n_train, k))
        test_y.append(np.full(n_per_class - n_train, k))

    train = Dataset(np.vstack(train_x), np.concatenate(train_y), n_classes, "train")
    test = Dataset(np.vstack(test_x), np.concatenate(test_y), n_classes, "test")
    logger.info(f"Generated synth_blobs K={n_classes} d={dim}: {len(train)} train / {len(test)} test")
    return train, test


def batches(ds: Dataset, batch_size: int, epoch_seed: int) -> List[Dataset]:
    """Shuffled mini-batches; the last partial batch is kept."""
    if batch_size < 1:
        raise ArgumentError(f"batch_size must be >= 1, got {batch_size}")
    order = stream(epoch_seed, "batches").permutation(len(ds))
    return [ds.select(order[start:start + batch_size]) for start in range(0, len(ds), batch_size)]
