"""
Dense statevector simulation of the partial-diffusion search register.

The register holds n index qubits plus one workspace qubit. Basis state
(item i, workspace w) sits at position 2*i + w, so the workspace is the least
significant bit and the workspace-0 / workspace-1 subspaces are the even and
odd positions of the amplitude vector.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Iterable, List, Optional, Tuple

import numpy as np

from src.services.errors import DomainError, InvariantError, ShapeError, SizeError
from utils.rng import make_rng

logger = logging.getLogger(__name__)

MAX_QUBITS = 24
NORM_TOL = 1e-10
IMAG_TOL = 1e-12
STRUCTURE_TOL = 1e-9

_HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)


def check_register_size(n: int, limit: int = MAX_QUBITS) -> int:
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
        raise SizeError(f"register size must be an integer, got {n!r}")
    if not 1 <= n <= limit:
        raise SizeError(f"register size n={n} outside supported range [1, {limit}]")
    return int(n)


@dataclass(frozen=True)
class MarkedSet:
    """The oracle: item indices i with f(i) = 1 in a register of n index qubits."""

    n: int
    members: Tuple[int, ...] = ()

    def __post_init__(self) -> None:
        check_register_size(self.n)
        members = tuple(sorted({int(i) for i in self.members}))
        if members and (members[0] < 0 or members[-1] >= 2**self.n):
            raise ShapeError(f"marked items must lie in [0, {2**self.n - 1}], got {list(members)}")
        object.__setattr__(self, "members", members)

    @classmethod
    def from_indices(cls, n: int, indices: Iterable[int]) -> "MarkedSet":
        return cls(n=n, members=tuple(indices))

    @classmethod
    def all_items(cls, n: int) -> "MarkedSet":
        return cls(n=n, members=tuple(range(2**check_register_size(n))))

    @classmethod
    def random(cls, n: int, count: int, seed: int) -> "MarkedSet":
        """Place `count` distinct marked items uniformly at random, reproducibly."""
        size = 2 ** check_register_size(n)
        if not 0 <= count <= size:
            raise DomainError(f"cannot mark {count} items in a list of {size}")
        chosen = make_rng(seed).choice(size, size=count, replace=False)
        return cls(n=n, members=tuple(int(i) for i in chosen))

    @property
    def N(self) -> int:
        return 2**self.n

    @property
    def M(self) -> int:
        return len(self.members)

    @cached_property
    def indices(self) -> np.ndarray:
        return np.asarray(self.members, dtype=np.int64)

    @cached_property
    def _lookup(self) -> frozenset[int]:
        return frozenset(self.members)

    def contains(self, item: int) -> bool:
        """The classical check f(i) = 1."""
        return int(item) in self._lookup


@dataclass(frozen=True)
class StateVector:
    """Amplitudes of the (n+1)-qubit register; `iterations` records how many
    oracle + diffusion rounds produced it when built by `run_search`."""

    n: int
    amplitudes: np.ndarray = field(repr=False)
    iterations: int = 0

    def __post_init__(self) -> None:
        check_register_size(self.n)
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != (2 ** (self.n + 1),):
            raise ShapeError(f"expected {2 ** (self.n + 1)} amplitudes for n={self.n}, got shape {amps.shape}")
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise InvariantError(f"state norm drifted to {norm!r}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def N(self) -> int:
        return 2**self.n

    @property
    def even(self) -> np.ndarray:
        """Workspace-0 amplitudes (the alphas), one per item."""
        return self.amplitudes[0::2]

    @property
    def odd(self) -> np.ndarray:
        """Workspace-1 amplitudes (the betas), one per item."""
        return self.amplitudes[1::2]

    def norm(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)


@dataclass(frozen=True)
class AmplitudeTriple:
    """
    The three distinct amplitudes after q iterations: `a` on unmarked items
    (workspace 0), `b` on marked items (workspace 0), `c` on marked items
    (workspace 1). A component is None when its group of items is empty.
    """

    a: Optional[float]
    b: Optional[float]
    c: Optional[float]
    q: int = 0

    def normalization(self, N: int, M: int) -> float:
        a = self.a or 0.0
        b = self.b or 0.0
        c = self.c or 0.0
        return (N - M) * a * a + M * b * b + M * c * c

    def max_deviation(self, other: "AmplitudeTriple") -> float:
        """Largest componentwise gap, over the components both triples define."""
        gaps = [
            abs(mine - theirs)
            for mine, theirs in ((self.a, other.a), (self.b, other.b), (self.c, other.c))
            if mine is not None and theirs is not None
        ]
        return max(gaps, default=0.0)


def _finish(n: int, amps: np.ndarray, iterations: int = 0) -> StateVector:
    if np.max(np.abs(amps.imag), initial=0.0) > IMAG_TOL:
        raise InvariantError("simulated amplitudes acquired an imaginary part")
    return StateVector(n=n, amplitudes=amps, iterations=iterations)


def _require_matching(state: StateVector, marked: MarkedSet) -> None:
    if marked.n != state.n:
        raise ShapeError(f"marked set is for n={marked.n}, state has n={state.n}")


def new_register(n: int) -> StateVector:
    """|0...0>|0> on n index qubits plus the workspace."""
    n = check_register_size(n)
    amps = np.zeros(2 ** (n + 1), dtype=np.complex128)
    amps[0] = 1.0
    return StateVector(n=n, amplitudes=amps)


def apply_walsh_init(state: StateVector) -> StateVector:
    """Hadamard on every index qubit; the workspace axis is left alone."""
    n = state.n
    psi = state.amplitudes.reshape((2,) * (n + 1))
    for axis in range(n):
        psi = np.moveaxis(np.tensordot(_HADAMARD, psi, axes=([1], [axis])), 0, axis)
    return _finish(n, np.ascontiguousarray(psi).reshape(-1), state.iterations)


def apply_oracle(state: StateVector, marked: MarkedSet) -> StateVector:
    """Workspace XOR f(i): swaps positions 2i and 2i+1 for every marked i."""
    _require_matching(state, marked)
    amps = state.amplitudes.copy()
    if marked.M:
        idx = marked.indices
        amps[2 * idx], amps[2 * idx + 1] = state.amplitudes[2 * idx + 1], state.amplitudes[2 * idx]
    return _finish(state.n, amps, state.iterations)


def apply_partial_diffusion(state: StateVector) -> StateVector:
    """Inversion about the mean on the even positions, sign flip on the odd ones."""
    amps = np.empty_like(state.amplitudes)
    even = state.even
    mean = even.mean()
    amps[0::2] = 2.0 * mean - even
    amps[1::2] = -state.odd
    return _finish(state.n, amps, state.iterations)


def run_search(n: int, marked: MarkedSet, q: int) -> StateVector:
    if q < 0:
        raise SizeError(f"iteration count must be non-negative, got {q}")
    state = apply_walsh_init(new_register(n))
    _require_matching(state, marked)
    for _ in range(q):
        state = apply_partial_diffusion(apply_oracle(state, marked))
    logger.debug("ran %d iterations on n=%d with M=%d", q, n, marked.M)
    return replace(state, iterations=q)


def measure_item_probabilities(state: StateVector) -> np.ndarray:
    """Probability of reading item i from the index register, for every i."""
    weights = np.abs(state.amplitudes) ** 2
    return weights.reshape(state.N, 2).sum(axis=1)


def success_probability(state: StateVector, marked: MarkedSet) -> float:
    _require_matching(state, marked)
    if not marked.M:
        return 0.0
    return float(measure_item_probabilities(state)[marked.indices].sum())


def _common_value(values: np.ndarray, label: str) -> Optional[float]:
    if values.size == 0:
        return None
    reference = values[0]
    if np.max(np.abs(values - reference)) > STRUCTURE_TOL:
        raise ShapeError(f"{label} amplitudes are not all equal")
    return float(reference.real)


def extract_amplitude_triple(state: StateVector, marked: MarkedSet) -> AmplitudeTriple:
    """Read (a, b, c) back out of a state produced by `run_search`."""
    _require_matching(state, marked)
    is_marked = np.zeros(state.N, dtype=bool)
    if marked.M:
        is_marked[marked.indices] = True
    even, odd = state.even, state.odd
    if np.max(np.abs(odd[~is_marked]), initial=0.0) > STRUCTURE_TOL:
        raise ShapeError("unmarked items carry amplitude on workspace 1")
    return AmplitudeTriple(
        a=_common_value(even[~is_marked], "unmarked workspace-0"),
        b=_common_value(even[is_marked], "marked workspace-0"),
        c=_common_value(odd[is_marked], "marked workspace-1"),
        q=state.iterations,
    )


@dataclass(frozen=True)
class TraceStep:
    iteration: int
    step: str  # "init" | "oracle" | "diffusion"
    triple: AmplitudeTriple
    p_success: float


def trace_search(n: int, marked: MarkedSet, q: int) -> List[TraceStep]:
    """
    Step-by-step walk of the algorithm: the triple after initialisation, then
    after each oracle call and each partial diffusion. After an oracle call
    the marked amplitudes are the previous (c, b) pair, swapped.
    """
    if q < 0:
        raise SizeError(f"iteration count must be non-negative, got {q}")
    state = apply_walsh_init(new_register(n))
    _require_matching(state, marked)
    steps = [TraceStep(0, "init", extract_amplitude_triple(state, marked), success_probability(state, marked))]
    for k in range(1, q + 1):
        state = replace(apply_oracle(state, marked), iterations=k - 1)
        steps.append(TraceStep(k, "oracle", extract_amplitude_triple(state, marked), success_probability(state, marked)))
        state = replace(apply_partial_diffusion(state), iterations=k)
        steps.append(TraceStep(k, "diffusion", extract_amplitude_triple(state, marked), success_probability(state, marked)))
    return steps
