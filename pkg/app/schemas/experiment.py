"""
Pydantic schemas for experiment configuration
"""
import logging
from pathlib import Path
from typing import Any, Dict, List, Literal, Mapping, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from app.core.config import settings
from app.core.exceptions import ConfigurationError, DataFormatError
from app.quantum.circuits import EncodingMode
from app.quantum.heads import DEFAULT_OBSERVABLES
from app.quantum.noise import NoiseModel, resolve_preset
from app.services.base import format_shots, parse_shots, run_digest
from app.training.extractor import Architecture, ExtractorConfig
from app.training.losses import LossConfig

logger = logging.getLogger(__name__)

DATASET_PRESETS: Dict[str, Dict[str, Any]] = {
    "mnist": {"learning_rate": 5e-3, "batch_size": 128},
    "cifar10": {"learning_rate": 1e-3, "batch_size": 64},
}
DEFAULT_LEARNING_RATE = 5e-3
DEFAULT_BATCH_SIZE = 128
NOISELESS = "none"
NOISY_DEFAULT_SHOTS = (1, 100, None)


class ExperimentConfig(BaseModel):
    """One experiment: dataset, model, loss, optimizer and evaluation grid"""
    head: Literal["yomo", "vanilla"] = Field(default="yomo", description="Classifier head")

    # dataset
    dataset: Literal["synth", "idx"] = Field(default="synth", description="Synthetic blobs or IDX files")
    dataset_preset: Optional[Literal["mnist", "cifar10"]] = Field(
        default=None, description="Learning-rate and batch-size defaults"
    )
    train_images: Optional[str] = None
    train_labels: Optional[str] = None
    test_images: Optional[str] = None
    test_labels: Optional[str] = None
    downsample_side: Optional[int] = Field(default=None, ge=1, description="Target image side after pooling")
    train_subset: Optional[int] = Field(default=None, ge=1)
    test_subset: Optional[int] = Field(default=None, ge=1)
    synth_dim: int = Field(default=8, ge=2, description="Synthetic input dimension d")
    synth_per_class: int = Field(default=50, ge=2)
    synth_spread: float = Field(default=0.15, ge=0.0)
    data_seed: int = Field(default=0, ge=0, description="Seed for synthetic data and subsets")

    # model
    n_q: int = Field(default=4, ge=2, le=settings.MAX_STATEVECTOR_QUBITS, description="Qubit count")
    n_blocks: int = Field(default=5, ge=1, description="Ansatz block count N_b")
    n_classes: int = Field(default=4, ge=2, description="Class count K")
    n_features: Optional[int] = Field(default=None, ge=1, description="Encoder feature count, default 2 * n_q")
    extractor: Architecture = "affine"
    extractor_hidden: int = Field(default=16, ge=1)
    encoding_mode: EncodingMode = "layer"
    renormalize_scores: bool = False

    # loss
    tau: float = Field(default=0.6, gt=0.0, lt=1.0, description="Sharpening threshold")
    gamma: float = Field(default=0.05, ge=0.0)
    omega: float = Field(default=0.05, ge=0.0)
    entropy_mode: Literal["correct_class", "distribution"] = "correct_class"

    # optimizer
    learning_rate: Optional[float] = Field(default=None, gt=0.0)
    epochs: int = Field(default=100, ge=1)
    batch_size: Optional[int] = Field(default=None, ge=1)

    # evaluation
    shots: List[Optional[int]] = Field(default_factory=lambda: [1, 10, 100, None])
    noise: str = Field(default=NOISELESS, description="Preset name, 'none', or a label for p1/p2")
    p1: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    p2: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    trajectories: int = Field(default=settings.NOISE_TRAJECTORIES, ge=1)
    repeats: int = Field(default=5, ge=1)
    seeds: List[int] = Field(default_factory=lambda: [settings.DEFAULT_SEED])
    yomo_rule: Literal["mean", "sum"] = "mean"
    allocation: Literal["round_robin", "all_to_z", "proportional"] = "round_robin"

    # output
    out_dir: str = Field(default=settings.OUTPUT_DIR)
    threads: int = Field(default=settings.THREADS, ge=1)

    model_config = ConfigDict(extra="forbid", frozen=True)

    @model_validator(mode="before")
    @classmethod
    def noisy_shot_defaults(cls, values):
        if not isinstance(values, dict) or "shots" in values:
            return values
        noisy = str(values.get("noise") or NOISELESS).strip().lower() != NOISELESS
        if noisy or values.get("p1") is not None:
            values = {**values, "shots": list(NOISY_DEFAULT_SHOTS)}
        return values

    @field_validator("shots", mode="before")
    @classmethod
    def parse_shot_budgets(cls, value):
        if isinstance(value, (str, int, float)):
            value = [value]
        try:
            parsed = [parse_shots(v) for v in value]
        except ConfigurationError as e:
            raise ValueError(e.message)
        if not parsed:
            raise ValueError("at least one shot budget is required")
        return parsed

    @field_validator("seeds", mode="before")
    @classmethod
    def parse_seeds(cls, value):
        if isinstance(value, int):
            value = [value]
        return value

    @field_validator("seeds")
    @classmethod
    def check_seeds(cls, value: List[int]) -> List[int]:
        if not value:
            raise ValueError("at least one seed is required")
        if any(s < 0 for s in value):
            raise ValueError(f"seeds must be non-negative, got {value}")
        return value

    @field_validator("noise")
    @classmethod
    def check_noise_name(cls, value: str) -> str:
        return value.strip() or NOISELESS

    @model_validator(mode="after")
    def check_consistency(self) -> "ExperimentConfig":
        if self.head == "yomo" and self.n_classes > 2 ** self.n_q:
            raise ValueError(f"n_classes: K={self.n_classes} exceeds 2^n_q={2 ** self.n_q} basis states")
        if self.head == "vanilla":
            if self.n_q < 4:
                raise ValueError(f"n_q: vanilla observables need n_q >= 4, got {self.n_q}")
            if self.n_classes > len(DEFAULT_OBSERVABLES):
                raise ValueError(f"n_classes: vanilla head supports at most {len(DEFAULT_OBSERVABLES)} classes")
        if self.dataset == "synth" and self.n_classes > self.synth_dim:
            raise ValueError(f"synth_dim: needs at least K={self.n_classes} dimensions, got {self.synth_dim}")
        if self.dataset == "idx":
            for name in ("train_images", "train_labels", "test_images", "test_labels"):
                if not getattr(self, name):
                    raise ValueError(f"{name}: required when dataset = 'idx'")
        if (self.p1 is None) != (self.p2 is None):
            raise ValueError("p1: p1 and p2 must be given together")
        if self.p1 is None and self.noise.lower() != NOISELESS:
            try:
                resolve_preset(self.noise)
            except ConfigurationError as e:
                raise ValueError(f"noise: {e.message}")
        return self

    @property
    def resolved_learning_rate(self) -> float:
        if self.learning_rate is not None:
            return self.learning_rate
        if self.dataset_preset:
            return DATASET_PRESETS[self.dataset_preset]["learning_rate"]
        return DEFAULT_LEARNING_RATE

    @property
    def resolved_batch_size(self) -> int:
        if self.batch_size is not None:
            return self.batch_size
        if self.dataset_preset:
            return DATASET_PRESETS[self.dataset_preset]["batch_size"]
        return DEFAULT_BATCH_SIZE

    @property
    def resolved_n_features(self) -> int:
        return self.n_features or 2 * self.n_q

    def noise_model(self) -> Optional[NoiseModel]:
        """Explicit p1/p2 take precedence over the preset name."""
        if self.p1 is not None:
            label = self.noise if self.noise.lower() != NOISELESS else "custom"
            return NoiseModel(name=label, p1=self.p1, p2=self.p2)
        if self.noise.lower() == NOISELESS:
            return None
        return resolve_preset(self.noise)

    def loss_config(self) -> LossConfig:
        return LossConfig(
            tau=self.tau,
            gamma=self.gamma,
            omega=self.omega,
            head=self.head,
            entropy_mode=self.entropy_mode,
        )

    def extractor_config(self, input_dim: int) -> ExtractorConfig:
        return ExtractorConfig(
            architecture=self.extractor,
            input_dim=input_dim,
            output_dim=self.resolved_n_features,
            hidden=self.extractor_hidden,
        )

    def echo(self) -> Dict[str, Any]:
        """JSON-safe dump with shots spelled 'inf'."""
        data = self.model_dump()
        data["shots"] = [format_shots(s) for s in self.shots]
        return data

    def training_echo(self) -> Dict[str, Any]:
        """Fields that determine a trained model; evaluation-only fields are left out."""
        data = self.echo()
        for key in ("shots", "noise", "p1", "p2", "trajectories", "repeats", "seeds",
                    "yomo_rule", "allocation", "out_dir", "threads"):
            data.pop(key)
        return data

    def run_id(self, seed: int) -> str:
        return run_digest({"config": self.training_echo(), "seed": seed})


def flatten_sections(document: Mapping[str, Any]) -> Dict[str, Any]:
    """Merge ``[section]`` tables into one flat mapping; duplicate keys are rejected."""
    flat: Dict[str, Any] = {}
    for key, value in document.items():
        items = value.items() if isinstance(value, dict) else [(key, value)]
        for name, item in items:
            if name in flat:
                raise ConfigurationError(f"{name}: defined more than once in the config file")
            flat[name] = item
    return flat


def read_config_file(path: Union[str, Path]) -> Dict[str, Any]:
    try:
        with open(path, "rb") as f:
            document = tomllib.load(f)
    except FileNotFoundError:
        raise DataFormatError(f"config file not found: {path}")
    except tomllib.TOMLDecodeError as e:
        raise DataFormatError(f"{path}: {e}")
    return flatten_sections(document)


def build_config(values: Mapping[str, Any]) -> ExperimentConfig:
    """Validate a flat mapping, converting pydantic errors to ConfigurationError."""
    try:
        return ExperimentConfig(**values)
    except ValidationError as e:
        errors = [
            {"field": ".".join(str(part) for part in err["loc"]) or "config", "message": err["msg"]}
            for err in e.errors()
        ]
        summary = "; ".join(f"{err['field']}: {err['message']}" for err in errors)
        raise ConfigurationError(f"invalid configuration: {summary}", details={"errors": errors})


def load_config(path: Optional[Union[str, Path]] = None, overrides: Optional[Mapping[str, Any]] = None) -> ExperimentConfig:
    """
    Build an ExperimentConfig with precedence overrides > file > defaults.

    Args:
        path: optional TOML file
        overrides: CLI values; None entries are ignored

    Returns:
        Validated ExperimentConfig
    """
    values: Dict[str, Any] = read_config_file(path) if path else {}
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    config = build_config(values)
    logger.info(f"Loaded configuration (head={config.head}, n_q={config.n_q}, N_b={config.n_blocks}, K={config.n_classes})")
    return config
