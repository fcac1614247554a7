"""
Classical feature extractor z = f(x) feeding the encoder angles.

Architectures:
  affine: z = pi * tanh(W x + b)
  mlp:    h = tanh(W1 x + b1); z = pi * tanh(W2 h + b2)

Parameters live in one flat vector, weights row-major then biases, layer
by layer.
"""
import logging
from dataclasses import dataclass
from typing import Dict, List, Literal, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from app.core.exceptions import ArgumentError

logger = logging.getLogger(__name__)

Architecture = Literal["affine", "mlp"]


class ExtractorConfig(BaseModel):
    architecture: Architecture = "affine"
    input_dim: int = Field(..., ge=1)
    output_dim: int = Field(..., ge=1)
    hidden: int = Field(default=16, ge=1, description="Hidden width of the mlp architecture")

    model_config = ConfigDict(frozen=True)


def layer_shapes(cfg: ExtractorConfig) -> List[Tuple[int, int]]:
    """(out, in) per layer."""
    if cfg.architecture == "affine":
        return [(cfg.output_dim, cfg.input_dim)]
    return [(cfg.hidden, cfg.input_dim), (cfg.output_dim, cfg.hidden)]


def parameter_count(cfg: ExtractorConfig) -> int:
    return sum(out * inp + out for out, inp in layer_shapes(cfg))


@dataclass
class FeatureExtractor:
    config: ExtractorConfig
    params: np.ndarray

    def __post_init__(self):
        self.params = np.asarray(self.params, dtype=np.float64).reshape(-1)
        expected = parameter_count(self.config)
        if self.params.shape[0] != expected:
            raise ArgumentError(
                f"{self.config.architecture} extractor needs {expected} parameters, got {self.params.shape[0]}"
            )

    @property
    def input_dim(self) -> int:
        return self.config.input_dim

    @property
    def output_dim(self) -> int:
        return self.config.output_dim

    def layers(self) -> List[Tuple[np.ndarray, np.ndarray]]:
        """(W, b) views into the flat parameter vector."""
        out = []
        offset = 0
        for rows, cols in layer_shapes(self.config):
            w = self.params[offset:offset + rows * cols].reshape(rows, cols)
            offset += rows * cols
            b = self.params[offset:offset + rows]
            offset += rows
            out.append((w, b))
        return out


def init(cfg: ExtractorConfig, rng: np.random.Generator) -> FeatureExtractor:
    """Weights uniform in +-1/sqrt(fan_in), biases zero."""
    blocks = []
    for rows, cols in layer_shapes(cfg):
        bound = 1.0 / np.sqrt(cols)
        blocks.append(rng.uniform(-bound, bound, size=rows * cols))
        blocks.append(np.zeros(rows))
    return FeatureExtractor(cfg, np.concatenate(blocks))


def forward(ext: FeatureExtractor, x: np.ndarray) -> Tuple[np.ndarray, Dict[str, np.ndarray]]:
    """Return z in [-pi, pi]^n_f and the cache needed by ``backward``."""
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if x.shape[0] != ext.input_dim:
        raise ArgumentError(f"extractor expects input of length {ext.input_dim}, got {x.shape[0]}")
    cache = {"x": x}
    layers = ext.layers()
    hidden = x
    if ext.config.architecture == "mlp":
        w1, b1 = layers[0]
        hidden = np.tanh(w1 @ x + b1)
        cache["h"] = hidden
    w, b = layers[-1]
    squashed = np.tanh(w @ hidden + b)
    cache["t"] = squashed
    return np.pi * squashed, cache


def backward(ext: FeatureExtractor, cache: Dict[str, np.ndarray], dz: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Return (dL/dparams, dL/dx) given dL/dz."""
    dz = np.asarray(dz, dtype=np.float64).reshape(-1)
    if dz.shape[0] != ext.output_dim:
        raise ArgumentError(f"dL/dz must have length {ext.output_dim}, got {dz.shape[0]}")
    layers = ext.layers()
    da = dz * np.pi * (1.0 - cache["t"] ** 2)

    if ext.config.architecture == "affine":
        w, _ = layers[0]
        grads = [np.outer(da, cache["x"]).ravel(), da]
        return np.concatenate(grads), w.T @ da

    (w1, _), (w2, _) = layers
    h = cache["h"]
    dh = w2.T @ da
    dpre = dh * (1.0 - h ** 2)
    grads = [np.outer(dpre, cache["x"]).ravel(), dpre, np.outer(da, h).ravel(), da]
    return np.concatenate(grads), w1.T @ dpre
