"""
End-to-end gradients of the training loss.

The primary path is an adjoint reverse pass over the state vector: after
the forward run, walk the gates backwards, undoing each gate on both the
state and the loss cotangent, and read off each rotation's derivative as
Im<lambda|P phi>. Parameter-shift and central finite differences are
independent oracles for the same quantity.
"""
import logging
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from app.core.exceptions import ArgumentError, UnsupportedConfigurationError
from app.quantum import heads
from app.quantum import statevector as sv
from app.quantum.circuits import CircuitSpec, apply_gate, check_inputs, execute
from app.training import extractor as fx
from app.training.losses import BatchPrediction, LossBreakdown, LossConfig, total_loss, total_loss_grad
from app.training.model import QuantumClassifier

logger = logging.getLogger(__name__)

SHIFT = np.pi / 2


@dataclass
class GradientBundle:
    d_theta_c: np.ndarray
    d_theta: np.ndarray
    loss: LossBreakdown

    def flat(self) -> np.ndarray:
        return np.concatenate([self.d_theta_c, self.d_theta])


def outputs_cotangent(model: QuantumClassifier, outputs: np.ndarray, d_scores: np.ndarray) -> np.ndarray:
    """dL/d(circuit outputs) from dL/d(class scores) for one sample."""
    if model.head == "yomo":
        part = model.partition
        d_mean = d_scores
        if model.renormalize_scores:
            mean = heads.aggregate_mean(outputs, part)
            total = mean.sum()
            scores = mean / total
            d_mean = (d_scores - np.dot(d_scores, scores)) / total
        return (d_mean / part.sizes)[part.class_of]
    probs = heads.vanilla_probs(outputs)
    return probs * (d_scores - np.dot(d_scores, probs))


def state_cotangent(model: QuantumClassifier, state: sv.StateVector, d_outputs: np.ndarray) -> sv.StateVector:
    """lambda = dL/d(conj psi)."""
    if model.head == "yomo":
        return sv.StateVector(state.n_q, d_outputs * state.amplitudes)
    lam = np.zeros_like(state.amplitudes)
    for weight, obs in zip(d_outputs, model.observables):
        lam += weight * heads.apply_observable(state, obs).amplitudes
    return sv.StateVector(state.n_q, lam)


def adjoint_angle_gradients(
    circuit: CircuitSpec,
    z: np.ndarray,
    theta: np.ndarray,
    state: sv.StateVector,
    cotangent: sv.StateVector,
) -> Tuple[np.ndarray, np.ndarray]:
    """Reverse pass returning (dL/dz, dL/dtheta)."""
    z, theta = check_inputs(circuit, z, theta)
    phi = state.copy()
    lam = cotangent.copy()
    d_z = np.zeros(circuit.n_f)
    d_theta = np.zeros(circuit.n_theta)
    for gate in reversed(circuit.gates):
        if gate.is_rotation:
            angle = gate.binding.resolve(z, theta)
            generator_phi = sv.apply_pauli(phi.copy(), gate.axis.upper(), gate.qubits[0])
            derivative = float(np.vdot(lam.amplitudes, generator_phi.amplitudes).imag)
            if gate.binding.source == "feature":
                d_z[gate.binding.index] += derivative
            elif gate.binding.source == "theta":
                d_theta[gate.binding.index] += derivative
            apply_gate(phi, gate, angle, inverse=True)
            apply_gate(lam, gate, angle, inverse=True)
        else:
            apply_gate(phi, gate)
            apply_gate(lam, gate)
    return d_z, d_theta


def _forward_batch(model: QuantumClassifier, inputs: np.ndarray, labels: Sequence[int]):
    records = []
    for x in np.atleast_2d(inputs):
        z, cache = model.encode(x)
        state = execute(model.circuit, z, model.theta)
        outputs = model.circuit_outputs(state)
        records.append((z, cache, state, outputs))
    scores = np.array([model.scores_from_outputs(r[3]) for r in records])
    return records, BatchPrediction(scores=scores, labels=np.asarray(labels))


def backprop_gradients(
    model: QuantumClassifier,
    inputs: np.ndarray,
    labels: Sequence[int],
    loss_cfg: LossConfig,
    noise=None,
) -> GradientBundle:
    """Exact gradient of the total loss over (theta_c, theta)."""
    if noise is not None:
        raise UnsupportedConfigurationError("training runs on exact noiseless simulation only")
    records, batch = _forward_batch(model, inputs, labels)
    breakdown = total_loss(batch, loss_cfg)
    d_scores = total_loss_grad(batch, loss_cfg)

    d_theta_c = np.zeros(model.n_extractor_params)
    d_theta = np.zeros(model.circuit.n_theta)
    # fixed per-sample summation order keeps runs bit-reproducible
    for i, (z, cache, state, outputs) in enumerate(records):
        d_outputs = outputs_cotangent(model, outputs, d_scores[i])
        lam = state_cotangent(model, state, d_outputs)
        d_z, d_th = adjoint_angle_gradients(model.circuit, z, model.theta, state, lam)
        d_params, _ = fx.backward(model.extractor, cache, d_z)
        d_theta_c += d_params
        d_theta += d_th
    return GradientBundle(d_theta_c=d_theta_c, d_theta=d_theta, loss=breakdown)


def shifted_output_derivative(
    circuit: CircuitSpec,
    z: np.ndarray,
    theta: np.ndarray,
    source: str,
    index: int,
    outputs: Callable[[sv.StateVector], np.ndarray],
) -> np.ndarray:
    """[f(angle + pi/2) - f(angle - pi/2)] / 2 for every scalar output f."""
    z, theta = check_inputs(circuit, z, theta)
    plus_z, minus_z = z.copy(), z.copy()
    plus_t, minus_t = theta.copy(), theta.copy()
    if source == "feature":
        plus_z[index] += SHIFT
        minus_z[index] -= SHIFT
    elif source == "theta":
        plus_t[index] += SHIFT
        minus_t[index] -= SHIFT
    else:
        raise ArgumentError(f"parameter-shift applies to rotation angles only, got source '{source}'")
    plus = outputs(execute(circuit, plus_z, plus_t))
    minus = outputs(execute(circuit, minus_z, minus_t))
    return (plus - minus) / 2.0


def parameter_shift_gradient(
    model: QuantumClassifier,
    inputs: np.ndarray,
    labels: Sequence[int],
    loss_cfg: LossConfig,
    param_index: int,
) -> float:
    """dL/d(joint parameter ``param_index``) via the parameter-shift rule.

    Ansatz angles are shifted directly. Extractor parameters get dL/dz from
    shifting every encoder angle, then the extractor's chain rule.
    """
    n_c = model.n_extractor_params
    if not 0 <= param_index < model.n_params:
        raise ArgumentError(f"parameter index {param_index} outside [0, {model.n_params})")
    records, batch = _forward_batch(model, inputs, labels)
    d_scores = total_loss_grad(batch, loss_cfg)

    total = 0.0
    for i, (z, cache, _, outputs) in enumerate(records):
        d_outputs = outputs_cotangent(model, outputs, d_scores[i])
        if param_index >= n_c:
            d_out = shifted_output_derivative(
                model.circuit, z, model.theta, "theta", param_index - n_c, model.circuit_outputs
            )
            total += float(np.dot(d_outputs, d_out))
        else:
            d_z = np.array([
                np.dot(d_outputs, shifted_output_derivative(
                    model.circuit, z, model.theta, "feature", f, model.circuit_outputs
                ))
                for f in range(model.circuit.n_f)
            ])
            d_params, _ = fx.backward(model.extractor, cache, d_z)
            total += float(d_params[param_index])
    return total


def loss_at(model: QuantumClassifier, params: np.ndarray, inputs: np.ndarray, labels: Sequence[int], loss_cfg: LossConfig) -> float:
    return total_loss(model.with_parameters(params).predict_batch(inputs, labels), loss_cfg).total


def finite_difference_gradient(
    model: QuantumClassifier,
    inputs: np.ndarray,
    labels: Sequence[int],
    loss_cfg: LossConfig,
    step: float = 1e-5,
    indices: Optional[Sequence[int]] = None,
) -> np.ndarray:
    """Central differences of the total loss over the joint parameter vector."""
    base = model.parameters()
    indices = range(model.n_params) if indices is None else indices
    grad = np.zeros(model.n_params)
    for k in indices:
        plus = base.copy()
        minus = base.copy()
        plus[k] += step
        minus[k] -= step
        grad[k] = (
            loss_at(model, plus, inputs, labels, loss_cfg) - loss_at(model, minus, inputs, labels, loss_cfg)
        ) / (2.0 * step)
    return grad
