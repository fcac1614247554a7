"""
Hybrid classifier: extractor -> encoder + ansatz -> head.
"""
import logging
from dataclasses import dataclass, replace
from typing import List, Literal, Optional, Sequence, Tuple

import numpy as np

from app.core.exceptions import ArgumentError, ConfigurationError
from app.quantum import heads
from app.quantum import statevector as sv
from app.quantum.circuits import CircuitSpec, EncodingMode, build_ansatz, build_encoder, compose, execute
from app.quantum.noise import measurement_distribution
from app.training import extractor as fx
from app.training.losses import BatchPrediction

logger = logging.getLogger(__name__)

Head = Literal["yomo", "vanilla"]


@dataclass(frozen=True)
class QuantumClassifier:
    extractor: fx.FeatureExtractor
    circuit: CircuitSpec
    theta: np.ndarray
    head: Head
    n_classes: int
    partition: Optional[heads.ClassPartition] = None
    observables: Tuple[heads.Observable, ...] = ()
    renormalize_scores: bool = False

    def __post_init__(self):
        if self.extractor.output_dim != self.circuit.n_f:
            raise ConfigurationError(
                f"extractor emits {self.extractor.output_dim} features, circuit binds {self.circuit.n_f}"
            )
        if np.asarray(self.theta).shape != (self.circuit.n_theta,):
            raise ArgumentError(f"expected {self.circuit.n_theta} ansatz angles, got {np.shape(self.theta)}")
        if self.head == "yomo" and self.partition is None:
            raise ConfigurationError("yomo head needs a class partition")
        if self.head == "vanilla" and len(self.observables) != self.n_classes:
            raise ConfigurationError(f"vanilla head needs {self.n_classes} observables, got {len(self.observables)}")

    @property
    def n_q(self) -> int:
        return self.circuit.n_q

    @property
    def n_extractor_params(self) -> int:
        return self.extractor.params.shape[0]

    @property
    def n_params(self) -> int:
        return self.n_extractor_params + self.circuit.n_theta

    def parameters(self) -> np.ndarray:
        """Joint vector (theta_c, theta)."""
        return np.concatenate([self.extractor.params, self.theta])

    def with_parameters(self, params: np.ndarray) -> "QuantumClassifier":
        params = np.asarray(params, dtype=np.float64)
        if params.shape != (self.n_params,):
            raise ArgumentError(f"expected {self.n_params} parameters, got {params.shape}")
        n_c = self.n_extractor_params
        return replace(
            self,
            extractor=fx.FeatureExtractor(self.extractor.config, params[:n_c].copy()),
            theta=params[n_c:].copy(),
        )

    def encode(self, x: np.ndarray):
        return fx.forward(self.extractor, x)

    def state(self, x: np.ndarray) -> sv.StateVector:
        z, _ = self.encode(x)
        return execute(self.circuit, z, self.theta)

    def circuit_outputs(self, state: sv.StateVector) -> np.ndarray:
        """Basis probabilities (yomo) or observable expectations (vanilla)."""
        if self.head == "yomo":
            return sv.probabilities(state)
        return np.array([heads.expectation(state, obs) for obs in self.observables])

    def scores_from_outputs(self, outputs: np.ndarray) -> np.ndarray:
        if self.head == "yomo":
            scores = heads.aggregate_mean(outputs, self.partition)
            if self.renormalize_scores:
                scores = scores / scores.sum()
            return scores
        return heads.vanilla_probs(outputs)

    def scores(self, x: np.ndarray) -> np.ndarray:
        return self.scores_from_outputs(self.circuit_outputs(self.state(x)))

    def predict_batch(self, inputs: np.ndarray, labels: Sequence[int]) -> BatchPrediction:
        scores = np.array([self.scores(x) for x in np.atleast_2d(inputs)])
        return BatchPrediction(scores=scores, labels=np.asarray(labels))

    def measurement_distributions(self, x: np.ndarray) -> List[np.ndarray]:
        """Noiseless [computational, y-rotated] basis distributions."""
        state = self.state(x)
        return [measurement_distribution(state, "computational"), measurement_distribution(state, "y")]


def build_model(
    head: Head,
    n_q: int,
    n_blocks: int,
    n_classes: int,
    extractor_config: fx.ExtractorConfig,
    rng: np.random.Generator,
    encoding_mode: EncodingMode = "layer",
    renormalize_scores: bool = False,
) -> QuantumClassifier:
    """Fresh model: extractor init, then ansatz angles uniform in [-pi, pi)."""
    circuit = compose(build_encoder(n_q, extractor_config.output_dim, encoding_mode), build_ansatz(n_q, n_blocks))
    extractor = fx.init(extractor_config, rng)
    theta = rng.uniform(-np.pi, np.pi, size=circuit.n_theta)
    partition = heads.build_partition(n_q, n_classes) if head == "yomo" else None
    observables = tuple(heads.default_observables(n_q, n_classes)) if head == "vanilla" else ()
    return QuantumClassifier(
        extractor=extractor,
        circuit=circuit,
        theta=theta,
        head=head,
        n_classes=n_classes,
        partition=partition,
        observables=observables,
        renormalize_scores=renormalize_scores,
    )
