"""
Gate-level construction of the partial diffusion operator and of the whole
search circuit, plus dense checks against the operator definition.

Qubit q of a width-w circuit is axis q of the (2,)*w state tensor, so qubit 0
is the most significant bit and the workspace (qubit w-1) the least, matching
the 2*i + w layout of the statevector simulator.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import reduce
from typing import List, Literal, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.services.errors import ShapeError, SizeError
from src.services.statevector import MarkedSet, StateVector, apply_partial_diffusion, check_register_size

logger = logging.getLogger(__name__)

BUILD_MAX_QUBITS = 10
VERIFY_MAX_QUBITS = 8
MATRIX_MAX_WIDTH = 11
UNITARY_TOL = 1e-12
CIRCUIT_TOL = 1e-12

_H = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)
_X = np.array([[0.0, 1.0], [1.0, 0.0]])
PHASE_U = np.diag([-1.0, 1.0])
PHASE_V = np.diag([-1.0, -1.0])
_FIXED_PAYLOADS = {"H": _H, "X": _X}

GateKind = Literal["H", "X", "CU"]


def _pairs(matrix: np.ndarray) -> Tuple[Tuple[float, float], ...]:
    flat = np.asarray(matrix, dtype=np.complex128).reshape(-1)
    return tuple((float(z.real), float(z.imag)) for z in flat)


class Gate(BaseModel):
    """
    One gate. `matrix` is the 2x2 single-qubit payload as four [re, im] pairs
    in row-major order; a CU gate applies it to `target` when every control
    qubit is 1 (with no controls it is unconditional).
    """

    model_config = ConfigDict(frozen=True)

    kind: GateKind
    target: int = Field(ge=0)
    controls: Tuple[int, ...] = ()
    matrix: Tuple[Tuple[float, float], ...]

    @field_validator("controls")
    @classmethod
    def sort_controls(cls, v: Tuple[int, ...]) -> Tuple[int, ...]:
        if len(set(v)) != len(v):
            raise ValueError("duplicate control qubits")
        if any(c < 0 for c in v):
            raise ValueError(f"control qubits must be non-negative, got {v}")
        return tuple(sorted(v))

    @field_validator("matrix")
    @classmethod
    def check_unitary(cls, v: Tuple[Tuple[float, float], ...]) -> Tuple[Tuple[float, float], ...]:
        if len(v) != 4:
            raise ValueError("payload must have exactly four entries")
        payload = np.array([complex(re, im) for re, im in v]).reshape(2, 2)
        if np.max(np.abs(payload.conj().T @ payload - np.eye(2))) > UNITARY_TOL:
            raise ValueError("payload matrix is not unitary")
        return v

    @model_validator(mode="after")
    def check_target(self) -> "Gate":
        if self.target in self.controls:
            raise ValueError(f"target qubit {self.target} is also a control")
        if self.kind != "CU" and self.controls:
            raise ValueError(f"{self.kind} gates take no controls")
        fixed = _FIXED_PAYLOADS.get(self.kind)
        if fixed is not None and np.max(np.abs(self.payload - fixed)) > UNITARY_TOL:
            raise ValueError(f"{self.kind} gate payload does not match the {self.kind} matrix")
        return self

    @property
    def payload(self) -> np.ndarray:
        return np.array([complex(re, im) for re, im in self.matrix]).reshape(2, 2)


def hadamard(target: int) -> Gate:
    return Gate(kind="H", target=target, matrix=_pairs(_H))


def pauli_x(target: int) -> Gate:
    return Gate(kind="X", target=target, matrix=_pairs(_X))


def controlled(target: int, controls: Tuple[int, ...], matrix: np.ndarray) -> Gate:
    return Gate(kind="CU", target=target, controls=tuple(controls), matrix=_pairs(matrix))


class GateList(BaseModel):
    width: int = Field(ge=1)
    gates: List[Gate] = Field(default_factory=list)

    @model_validator(mode="after")
    def check_qubits(self) -> "GateList":
        for gate in self.gates:
            if gate.target >= self.width or any(c >= self.width for c in gate.controls):
                raise ValueError(f"gate {gate.kind} on {gate.target} with controls {gate.controls} exceeds width {self.width}")
        return self

    def __len__(self) -> int:
        return len(self.gates)


def _partial_diffusion_gates(n: int) -> List[Gate]:
    index = range(n)
    workspace = n
    return [
        *(hadamard(k) for k in index),
        *(pauli_x(k) for k in index),
        controlled(workspace, tuple(index), PHASE_U),
        # unconditional V = -I supplies the global -1 of 2|0><0| - I
        controlled(workspace, (), PHASE_V),
        *(pauli_x(k) for k in index),
        *(hadamard(k) for k in index),
    ]


def build_partial_diffusion_circuit(n: int) -> GateList:
    n = check_register_size(n, BUILD_MAX_QUBITS)
    return GateList(width=n + 1, gates=_partial_diffusion_gates(n))


def _oracle_gates(marked: MarkedSet) -> List[Gate]:
    """Workspace XOR f(i): one X-conjugated n-controlled X per marked item."""
    n = marked.n
    gates: List[Gate] = []
    for item in marked.members:
        flips = [pauli_x(k) for k in range(n) if not (item >> (n - 1 - k)) & 1]
        gates.extend(flips)
        gates.append(controlled(n, tuple(range(n)), _X))
        gates.extend(flips)
    return gates


def build_search_circuit(n: int, marked: MarkedSet, q: int) -> GateList:
    """Index-register Hadamards, then q rounds of oracle gates followed by D_p gates."""
    n = check_register_size(n, BUILD_MAX_QUBITS)
    if marked.n != n:
        raise ShapeError(f"marked set is for n={marked.n}, circuit has n={n}")
    if q < 0:
        raise SizeError(f"iteration count must be non-negative, got {q}")
    gates = [hadamard(k) for k in range(n)]
    round_gates = _oracle_gates(marked) + _partial_diffusion_gates(n)
    for _ in range(q):
        gates.extend(round_gates)
    return GateList(width=n + 1, gates=gates)


def _apply_gate(tensor: np.ndarray, gate: Gate) -> np.ndarray:
    """Applies one gate to a (2,)*width + (columns,) tensor."""
    selector = [slice(None)] * tensor.ndim
    for c in gate.controls:
        selector[c] = 1
    selector = tuple(selector)
    block = tensor[selector]
    # the controls' axes are gone from `block`, so the target axis shifts left
    axis = gate.target - sum(c < gate.target for c in gate.controls)
    updated = np.moveaxis(np.tensordot(gate.payload, block, axes=([1], [axis])), 0, axis)
    out = tensor.copy()
    out[selector] = updated
    return out


def apply_gatelist(gates: GateList, vectors: np.ndarray) -> np.ndarray:
    """Applies the gates in order to a vector, or to each column of a 2^width x k array."""
    dim = 2**gates.width
    vectors = np.asarray(vectors, dtype=np.complex128)
    columns = vectors.reshape(dim, -1)
    tensor = columns.reshape((2,) * gates.width + (columns.shape[1],))
    for gate in gates.gates:
        tensor = _apply_gate(tensor, gate)
    return tensor.reshape(vectors.shape)


def gatelist_to_matrix(gates: GateList) -> np.ndarray:
    """The product G_k ... G_1 of the gate embeddings, first gate applied first."""
    if gates.width > MATRIX_MAX_WIDTH:
        raise SizeError(f"width {gates.width} exceeds the dense-matrix limit of {MATRIX_MAX_WIDTH}")
    return apply_gatelist(gates, np.eye(2**gates.width, dtype=np.complex128))


def partial_diffusion_matrix(n: int) -> np.ndarray:
    """(H^n (x) I)(2|0><0| - I)(H^n (x) I) as an explicit 2^(n+1) square matrix."""
    h_index = reduce(np.kron, [_H] * n)
    h_full = np.kron(h_index, np.eye(2))
    reflection = -np.eye(2 ** (n + 1))
    reflection[0, 0] = 1.0
    return h_full @ reflection @ h_full


def simulated_partial_diffusion_matrix(n: int) -> np.ndarray:
    """Columns are the simulator's D_p applied to each basis vector."""
    dim = 2 ** (n + 1)
    columns = []
    for k in range(dim):
        basis = np.zeros(dim)
        basis[k] = 1.0
        columns.append(apply_partial_diffusion(StateVector(n=n, amplitudes=basis)).amplitudes)
    return np.stack(columns, axis=1)


@dataclass(frozen=True)
class CircuitCheck:
    n: int
    gate_count: int
    deviation_operator: float
    deviation_simulator: float

    @property
    def max_deviation(self) -> float:
        return max(self.deviation_operator, self.deviation_simulator)

    @property
    def passed(self) -> bool:
        return self.max_deviation <= CIRCUIT_TOL


def check_partial_diffusion(n: int) -> CircuitCheck:
    n = check_register_size(n, VERIFY_MAX_QUBITS)
    circuit = build_partial_diffusion_circuit(n)
    built = gatelist_to_matrix(circuit)
    check = CircuitCheck(
        n=n,
        gate_count=len(circuit),
        deviation_operator=float(np.max(np.abs(built - partial_diffusion_matrix(n)))),
        deviation_simulator=float(np.max(np.abs(built - simulated_partial_diffusion_matrix(n)))),
    )
    logger.debug("D_p circuit check n=%d: %r", n, check)
    return check


def verify_partial_diffusion(n: int) -> float:
    """Largest deviation of the gate-level D_p from both the operator and the simulator."""
    return check_partial_diffusion(n).max_deviation


def verify_search_circuit(n: int, marked: MarkedSet, q: int, simulated: StateVector) -> float:
    """Deviation of the full search circuit applied to |0...0> from a simulated state."""
    circuit = build_search_circuit(n, marked, q)
    start = np.zeros(2**circuit.width, dtype=np.complex128)
    start[0] = 1.0
    return float(np.max(np.abs(apply_gatelist(circuit, start) - simulated.amplitudes)))
