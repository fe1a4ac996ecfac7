"""
Grover's algorithm as the comparison baseline: the textbook formulas and a
small dense simulation (phase-flip oracle, inversion about the mean over all
N items, no workspace qubit) to cross-check them.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from src.services.errors import DomainError, InvariantError, ShapeError, SizeError
from src.services.statevector import MarkedSet, check_register_size

logger = logging.getLogger(__name__)

GROVER_BOUND_COEFF = math.pi / 4.0
BOUND_SLACK = 1e-9


@dataclass(frozen=True)
class GroverShape:
    ratio: float
    theta_g: float
    N: Optional[int] = None
    M: Optional[int] = None

    @classmethod
    def of(cls, N: int, M: int) -> "GroverShape":
        if M < 1:
            raise DomainError("Grover's formulas need at least one match (M >= 1)")
        if M > N:
            raise DomainError(f"M={M} exceeds N={N}")
        shape = cls.from_ratio(M / N)
        return cls(ratio=shape.ratio, theta_g=shape.theta_g, N=N, M=M)

    @classmethod
    def from_ratio(cls, ratio: float) -> "GroverShape":
        if not 0.0 < ratio <= 1.0:
            raise DomainError(f"ratio M/N must lie in (0, 1], got {ratio}")
        return cls(ratio=ratio, theta_g=math.asin(math.sqrt(ratio)))


def grover_iterations(shape: GroverShape) -> int:
    """q_G = floor(pi / 4 theta_G)."""
    q_g = math.floor(math.pi / (4.0 * shape.theta_g))
    if q_g > GROVER_BOUND_COEFF * math.sqrt(1.0 / shape.ratio) + BOUND_SLACK:
        raise InvariantError(f"q_G={q_g} exceeds (pi/4) sqrt(N/M) at M/N={shape.ratio}")
    return q_g


def grover_success(q_g: int, shape: GroverShape) -> float:
    """sin^2((2 q_G + 1) theta_G)."""
    if q_g < 0:
        raise DomainError(f"iteration count must be non-negative, got {q_g}")
    return math.sin((2 * q_g + 1) * shape.theta_g) ** 2


def grover_simulate(n: int, marked: MarkedSet, q_g: int) -> float:
    """Total marked probability after q_g dense Grover iterations from the uniform state."""
    n = check_register_size(n)
    if marked.n != n:
        raise ShapeError(f"marked set is for n={marked.n}, register has n={n}")
    if marked.M < 1:
        raise DomainError("Grover's search needs at least one match (M >= 1)")
    if q_g < 0:
        raise SizeError(f"iteration count must be non-negative, got {q_g}")
    idx = marked.indices
    amps = np.full(2**n, 1.0 / math.sqrt(2**n))
    for _ in range(q_g):
        amps[idx] *= -1.0
        amps = 2.0 * amps.mean() - amps
    logger.debug("Grover: %d iterations on n=%d with M=%d", q_g, n, marked.M)
    return float(np.sum(amps[idx] ** 2))


def grover_curve(ratios: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Vectorized (q_G, P at q_G) over an array of ratios in (0, 1]."""
    ratios = np.asarray(ratios, dtype=float)
    if ratios.size and (ratios.min() <= 0.0 or ratios.max() > 1.0):
        raise DomainError("ratios must lie in (0, 1]")
    theta_g = np.arcsin(np.sqrt(ratios))
    q_g = np.floor(np.pi / (4.0 * theta_g)).astype(np.int64)
    return q_g, np.sin((2 * q_g + 1) * theta_g) ** 2
