"""
Depolarizing noise: hardware presets, Pauli-trajectory sampling and an
exact density-matrix oracle for small systems.

Operational definition of both channels: with probability p apply a
uniformly random non-identity Pauli (3 choices on one qubit, 15 on two),
otherwise do nothing. The channel follows every gate, encoder included.
"""
import csv
import io
import logging
from itertools import product
from typing import List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from app.core.config import settings
from app.core.exceptions import ArgumentError, ConfigurationError
from app.core.random import stream
from app.quantum import statevector as sv
from app.quantum.circuits import CircuitSpec, GateOp, check_inputs, execute

logger = logging.getLogger(__name__)

PAULI_PAIRS: Tuple[Tuple[str, str], ...] = tuple(
    (a, b) for a, b in product("IXYZ", repeat=2) if (a, b) != ("I", "I")
)
MeasurementBasis = Literal["computational", "y"]

# Hardware reference table, kept as decimal strings so the CSV export is exact
_PRESET_TABLE = (
    ("IBM_Pittsburgh", "2.02e-4", "1.69e-3"),
    ("Google Willow", "3.5e-4", "3.3e-3"),
    ("Quantinuum H1-1", "1.8e-5", "9.7e-4"),
    ("IonQ Forte", "2e-4", "4e-3"),
)


class NoiseModel(BaseModel):
    """1Q/2Q depolarizing probabilities"""
    name: str = Field(..., description="Label used in result files")
    p1: float = Field(..., ge=0.0, le=1.0, description="1-qubit depolarizing probability")
    p2: float = Field(..., ge=0.0, le=1.0, description="2-qubit depolarizing probability")

    model_config = ConfigDict(frozen=True)

    def scaled(self, factor: float) -> "NoiseModel":
        return NoiseModel(
            name=f"{self.name} x{factor:g}",
            p1=min(1.0, self.p1 * factor),
            p2=min(1.0, self.p2 * factor),
        )


class NoiseEvalConfig(BaseModel):
    """Monte-Carlo trajectory settings"""
    trajectories: int = Field(default=settings.NOISE_TRAJECTORIES, ge=1)
    seed: int = Field(default=0, ge=0, lt=2 ** 64)

    model_config = ConfigDict(frozen=True)


def presets() -> List[NoiseModel]:
    """The four hardware presets."""
    return [NoiseModel(name=name, p1=float(p1), p2=float(p2)) for name, p1, p2 in _PRESET_TABLE]


def resolve_preset(name: str) -> NoiseModel:
    for model in presets():
        if model.name.lower() == name.strip().lower():
            return model
    known = ", ".join(n for n, _, _ in _PRESET_TABLE)
    raise ConfigurationError(f"unknown noise preset '{name}' (known: {known})")


def presets_csv() -> str:
    """Preset table as CSV (name, p1, p2) with the reference decimal strings."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["name", "p1", "p2"])
    for row in _PRESET_TABLE:
        writer.writerow(row)
    return buffer.getvalue()


def sample_noise_1q(p1: float, rng: np.random.Generator) -> Optional[str]:
    """None with probability 1 - p1, else X, Y or Z with p1/3 each."""
    if rng.random() >= p1:
        return None
    return sv.PAULIS[int(rng.integers(3))]


def sample_noise_2q(p2: float, rng: np.random.Generator) -> Optional[Tuple[str, str]]:
    """None with probability 1 - p2, else one of the 15 non-identity pairs."""
    if rng.random() >= p2:
        return None
    return PAULI_PAIRS[int(rng.integers(len(PAULI_PAIRS)))]


def apply_noise_after(state: sv.StateVector, gate: GateOp, noise: NoiseModel, rng: np.random.Generator) -> None:
    """Insert one trajectory draw of the channel that follows ``gate``."""
    if gate.is_rotation:
        pauli = sample_noise_1q(noise.p1, rng)
        if pauli is not None:
            sv.apply_pauli(state, pauli, gate.qubits[0])
    else:
        pair = sample_noise_2q(noise.p2, rng)
        if pair is not None:
            for qubit, pauli in zip(gate.qubits, pair):
                if pauli != "I":
                    sv.apply_pauli(state, pauli, qubit)


def rotate_to_y_basis(state: sv.StateVector) -> sv.StateVector:
    """Y -> Z basis change on every qubit (RX(pi/2) maps Y eigenstates onto Z)."""
    for qubit in range(state.n_q):
        sv.apply_rotation(state, "x", qubit, np.pi / 2)
    return state


def measurement_distribution(state: sv.StateVector, basis: MeasurementBasis = "computational") -> np.ndarray:
    if basis == "computational":
        return sv.probabilities(state)
    if basis == "y":
        return sv.probabilities(rotate_to_y_basis(state.copy()))
    raise ArgumentError(f"unknown measurement basis '{basis}'")


def noisy_distributions(
    circuit: CircuitSpec,
    z: Sequence[float],
    theta: Sequence[float],
    noise: NoiseModel,
    cfg: NoiseEvalConfig,
    bases: Sequence[MeasurementBasis] = ("computational",),
) -> List[np.ndarray]:
    """Trajectory-averaged distributions, one per requested basis.

    Trajectory t draws from stream (seed, "noise", t); all bases share the
    same noise realizations.
    """
    z, theta = check_inputs(circuit, z, theta)
    totals = [np.zeros(1 << circuit.n_q) for _ in bases]
    for t in range(cfg.trajectories):
        state = execute(circuit, z, theta, noise=noise, rng=stream(cfg.seed, "noise", t))
        for total, basis in zip(totals, bases):
            total += measurement_distribution(state, basis)
    return [total / cfg.trajectories for total in totals]


def noisy_probabilities(
    circuit: CircuitSpec,
    z: Sequence[float],
    theta: Sequence[float],
    noise: NoiseModel,
    cfg: NoiseEvalConfig,
) -> np.ndarray:
    """Average of computational-basis probabilities over M trajectories."""
    return noisy_distributions(circuit, z, theta, noise, cfg)[0]


# Density-matrix oracle. rho is held as a tensor with n ket axes then n bra axes.

_PAULI_MATRICES = {
    "I": np.eye(2, dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}
_CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=np.complex128
).reshape(2, 2, 2, 2)


def _conjugate_1q(rho: np.ndarray, matrix: np.ndarray, qubit: int, n_q: int) -> np.ndarray:
    rho = np.moveaxis(np.tensordot(matrix, rho, axes=([1], [qubit])), 0, qubit)
    return np.moveaxis(np.tensordot(matrix.conj(), rho, axes=([1], [n_q + qubit])), 0, n_q + qubit)


def _conjugate_2q(rho: np.ndarray, matrix: np.ndarray, q0: int, q1: int, n_q: int) -> np.ndarray:
    rho = np.moveaxis(np.tensordot(matrix, rho, axes=([2, 3], [q0, q1])), [0, 1], [q0, q1])
    return np.moveaxis(
        np.tensordot(matrix.conj(), rho, axes=([2, 3], [n_q + q0, n_q + q1])),
        [0, 1],
        [n_q + q0, n_q + q1],
    )


def _depolarize_1q(rho: np.ndarray, p: float, qubit: int, n_q: int) -> np.ndarray:
    if p == 0.0:
        return rho
    mixed = sum(_conjugate_1q(rho, _PAULI_MATRICES[P], qubit, n_q) for P in sv.PAULIS)
    return (1.0 - p) * rho + (p / 3.0) * mixed


def _depolarize_2q(rho: np.ndarray, p: float, q0: int, q1: int, n_q: int) -> np.ndarray:
    if p == 0.0:
        return rho
    mixed = np.zeros_like(rho)
    for a, b in PAULI_PAIRS:
        term = _conjugate_1q(rho, _PAULI_MATRICES[a], q0, n_q)
        mixed += _conjugate_1q(term, _PAULI_MATRICES[b], q1, n_q)
    return (1.0 - p) * rho + (p / 15.0) * mixed


def density_matrix_probabilities(
    circuit: CircuitSpec,
    z: Sequence[float],
    theta: Sequence[float],
    noise: NoiseModel,
) -> np.ndarray:
    """Exact diagonal of rho after composing gates and depolarizing channels."""
    limit = settings.MAX_DENSITY_MATRIX_QUBITS
    if circuit.n_q > limit:
        raise ConfigurationError(f"density-matrix oracle supports n_q <= {limit}, got {circuit.n_q}")
    z, theta = check_inputs(circuit, z, theta)
    n_q = circuit.n_q
    dim = 1 << n_q
    rho = np.zeros((dim, dim), dtype=np.complex128)
    rho[0, 0] = 1.0
    rho = rho.reshape((2,) * (2 * n_q))

    for gate in circuit.gates:
        if gate.is_rotation:
            q = gate.qubits[0]
            rho = _conjugate_1q(rho, sv.rotation_matrix(gate.axis, gate.binding.resolve(z, theta)), q, n_q)
            rho = _depolarize_1q(rho, noise.p1, q, n_q)
        else:
            q0, q1 = gate.qubits
            rho = _conjugate_2q(rho, _CNOT, q0, q1, n_q)
            rho = _depolarize_2q(rho, noise.p2, q0, q1, n_q)

    return np.real(np.diagonal(rho.reshape(dim, dim))).copy()
