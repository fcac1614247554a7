"""
Encoder and variational ansatz as explicit gate programs.

Encoder: feature i is a rotation on qubit (i mod n_q). In the default
"layer" mode the axis follows the encoding layer floor(i / n_q) through
the cycle (y, z, x); in "gate" mode it follows i mod 3.

Ansatz: per block, R_y(theta) on every qubit, then the open CNOT ladder
(i, i+1). Theta index of block b (0-based), qubit j is b * n_q + j.
"""
import logging
from dataclasses import dataclass, field
from typing import Literal, Optional, Sequence, Tuple

import numpy as np

from app.core.exceptions import ArgumentError, ConfigurationError
from app.quantum import statevector as sv

logger = logging.getLogger(__name__)

AXIS_CYCLE = ("y", "z", "x")
EncodingMode = Literal["layer", "gate"]


@dataclass(frozen=True)
class Binding:
    """Where a gate angle comes from"""
    source: Literal["feature", "theta", "fixed"]
    index: int = -1
    angle: float = 0.0

    def resolve(self, z: np.ndarray, theta: np.ndarray) -> float:
        if self.source == "feature":
            return float(z[self.index])
        if self.source == "theta":
            return float(theta[self.index])
        return self.angle

    def __str__(self) -> str:
        if self.source == "fixed":
            return f"fixed({self.angle:.6g})"
        return f"{self.source}[{self.index}]"


@dataclass(frozen=True)
class GateOp:
    kind: Literal["rotation", "cnot"]
    qubits: Tuple[int, ...]
    axis: Optional[str] = None
    binding: Optional[Binding] = None

    def __post_init__(self):
        if self.kind == "rotation":
            if len(self.qubits) != 1 or self.axis not in sv.AXES or self.binding is None:
                raise ArgumentError(f"rotation needs one qubit, an axis and a binding: {self}")
        elif self.kind == "cnot":
            if len(self.qubits) != 2 or self.qubits[0] == self.qubits[1]:
                raise ArgumentError(f"cnot needs two distinct qubits: {self}")
        else:
            raise ArgumentError(f"unknown gate kind '{self.kind}'")

    @property
    def is_rotation(self) -> bool:
        return self.kind == "rotation"


@dataclass(frozen=True)
class CircuitSpec:
    """Ordered gate program; application order is list order"""
    n_q: int
    n_f: int
    n_theta: int
    n_blocks: int
    gates: Tuple[GateOp, ...] = field(default_factory=tuple)

    def __post_init__(self):
        features = sorted(g.binding.index for g in self.gates if g.is_rotation and g.binding.source == "feature")
        thetas = sorted(g.binding.index for g in self.gates if g.is_rotation and g.binding.source == "theta")
        if features != list(range(self.n_f)):
            raise ConfigurationError(f"feature bindings must cover [0, {self.n_f}) exactly once")
        if thetas != list(range(self.n_theta)):
            raise ConfigurationError(f"theta bindings must cover [0, {self.n_theta}) exactly once")
        for gate in self.gates:
            if any(not 0 <= q < self.n_q for q in gate.qubits):
                raise ConfigurationError(f"gate {gate} touches a qubit outside [0, {self.n_q})")

    @property
    def n_cnots(self) -> int:
        return sum(1 for g in self.gates if g.kind == "cnot")


def encoder_axis(i: int, n_q: int, mode: EncodingMode = "layer") -> str:
    if mode == "layer":
        return AXIS_CYCLE[(i // n_q) % 3]
    if mode == "gate":
        return AXIS_CYCLE[i % 3]
    raise ConfigurationError(f"unknown encoding mode '{mode}'")


def build_encoder(n_q: int, n_f: int, mode: EncodingMode = "layer") -> CircuitSpec:
    """Angle encoder V(z): one rotation per feature."""
    if n_f < 1:
        raise ArgumentError(f"n_f must be >= 1, got {n_f}")
    if n_q < 1:
        raise ConfigurationError(f"n_q must be >= 1, got {n_q}")
    gates = tuple(
        GateOp("rotation", (i % n_q,), encoder_axis(i, n_q, mode), Binding("feature", i))
        for i in range(n_f)
    )
    return CircuitSpec(n_q=n_q, n_f=n_f, n_theta=0, n_blocks=0, gates=gates)


def build_ansatz(n_q: int, n_blocks: int) -> CircuitSpec:
    """Variational ansatz U(theta): R_y layer plus CNOT ladder per block."""
    if n_q < 2:
        raise ConfigurationError(f"ansatz needs n_q >= 2 for its entangler, got {n_q}")
    if n_blocks < 1:
        raise ConfigurationError(f"N_b must be >= 1, got {n_blocks}")
    gates = []
    for block in range(n_blocks):
        for j in range(n_q):
            gates.append(GateOp("rotation", (j,), "y", Binding("theta", block * n_q + j)))
        for i in range(n_q - 1):
            gates.append(GateOp("cnot", (i, i + 1)))
    return CircuitSpec(n_q=n_q, n_f=0, n_theta=n_blocks * n_q, n_blocks=n_blocks, gates=tuple(gates))


def compose(encoder: CircuitSpec, ansatz: CircuitSpec) -> CircuitSpec:
    """U(theta) V(z): encoder gates first."""
    if encoder.n_f < 1:
        raise ArgumentError("encoder must bind at least one feature")
    if encoder.n_q != ansatz.n_q:
        raise ConfigurationError(f"qubit count mismatch: encoder {encoder.n_q}, ansatz {ansatz.n_q}")
    return CircuitSpec(
        n_q=encoder.n_q,
        n_f=encoder.n_f,
        n_theta=ansatz.n_theta,
        n_blocks=ansatz.n_blocks,
        gates=encoder.gates + ansatz.gates,
    )


def check_inputs(circuit: CircuitSpec, z: Sequence[float], theta: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
    z = np.asarray(z, dtype=np.float64).reshape(-1)
    theta = np.asarray(theta, dtype=np.float64).reshape(-1)
    if z.shape[0] != circuit.n_f:
        raise ArgumentError(f"expected {circuit.n_f} features, got {z.shape[0]}")
    if theta.shape[0] != circuit.n_theta:
        raise ArgumentError(f"expected {circuit.n_theta} ansatz angles, got {theta.shape[0]}")
    return z, theta


def apply_gate(state: sv.StateVector, gate: GateOp, angle: float = 0.0, inverse: bool = False) -> sv.StateVector:
    if gate.is_rotation:
        return sv.apply_rotation(state, gate.axis, gate.qubits[0], -angle if inverse else angle)
    return sv.apply_cnot(state, gate.qubits[0], gate.qubits[1])


def execute(
    circuit: CircuitSpec,
    z: Sequence[float],
    theta: Sequence[float],
    noise=None,
    rng: Optional[np.random.Generator] = None,
) -> sv.StateVector:
    """Run the circuit on |0...0>.

    With a noise model, one Pauli-trajectory draw follows every gate: the
    1-qubit channel on the rotated qubit, the 2-qubit channel on both CNOT
    qubits. ``rng`` is required exactly when ``noise`` is given.
    """
    z, theta = check_inputs(circuit, z, theta)
    if noise is not None and rng is None:
        raise ArgumentError("a random stream is required when a noise model is given")

    # imported here: noise builds on this module
    from app.quantum.noise import apply_noise_after

    state = sv.init_zero(circuit.n_q)
    for gate in circuit.gates:
        angle = gate.binding.resolve(z, theta) if gate.is_rotation else 0.0
        apply_gate(state, gate, angle)
        if noise is not None:
            apply_noise_after(state, gate, noise, rng)
    return state


def describe_circuit(circuit: CircuitSpec) -> str:
    """Text listing: one gate per line (kind, qubits, binding)."""
    lines = [
        f"# n_q={circuit.n_q} n_f={circuit.n_f} n_theta={circuit.n_theta} "
        f"N_b={circuit.n_blocks} gates={len(circuit.gates)}"
    ]
    for position, gate in enumerate(circuit.gates):
        qubits = ",".join(str(q) for q in gate.qubits)
        if gate.is_rotation:
            lines.append(f"{position:4d}  R{gate.axis}  q{qubits}  {gate.binding}")
        else:
            lines.append(f"{position:4d}  CNOT  q{qubits}")
    return "\n".join(lines)
