"""
Closed forms for the partial-diffusion search.

With y = 1 - M/N = cos(theta) and s = 1/sqrt(N), the amplitudes after q
iterations are a_q = s(U_q - U_{q-1}), b_q = s U_q, c_q = -s U_{q-1}, where
U_q is the Chebyshev polynomial of the second kind evaluated at y.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from src.services.errors import DomainError, InvariantError
from src.services.statevector import AmplitudeTriple

logger = logging.getLogger(__name__)

ITERATION_BOUND_COEFF = math.pi / (2.0 * math.sqrt(2.0))
RECURRENCE_SEED_TOL = 1e-12
BOUND_SLACK = 1e-9


def _is_power_of_two(value: int) -> bool:
    return value >= 1 and value & (value - 1) == 0


@dataclass(frozen=True)
class SearchShape:
    """
    The derived scalars of a search problem.

    Integer shapes carry N (a power of two) and M; ratio-only shapes, used by
    the sweeps, carry just M/N and have no `s`.
    """

    ratio: float
    y: float
    theta: float
    N: Optional[int] = None
    M: Optional[int] = None

    @classmethod
    def of(cls, N: int, M: int) -> "SearchShape":
        if not _is_power_of_two(N):
            raise DomainError(f"list size N={N} is not a power of two")
        if M < 1:
            raise DomainError("the analytic forms assume at least one match (M >= 1)")
        if M > N:
            raise DomainError(f"M={M} exceeds N={N}")
        shape = cls.from_ratio(M / N)
        return cls(ratio=shape.ratio, y=shape.y, theta=shape.theta, N=N, M=M)

    @classmethod
    def from_ratio(cls, ratio: float) -> "SearchShape":
        if not 0.0 < ratio <= 1.0:
            raise DomainError(f"ratio M/N must lie in (0, 1], got {ratio}")
        y = 1.0 - ratio
        theta = math.acos(min(1.0, max(-1.0, y)))
        return cls(ratio=ratio, y=y, theta=theta)

    @property
    def s(self) -> float:
        if self.N is None:
            raise DomainError("s = 1/sqrt(N) needs an integer shape, not a bare ratio")
        return 1.0 / math.sqrt(self.N)


@dataclass(frozen=True)
class IterationPlan:
    q: int
    q_exact: float
    q_bar: float
    p_success: float
    p_lower_bound: float


def chebyshev_u(q: int, y: float) -> float:
    """U_q(y) = sin((q+1) theta) / sin(theta) with y = cos(theta), U_{-1} = 0."""
    if q < -1:
        raise DomainError(f"Chebyshev index must be >= -1, got {q}")
    if not 0.0 <= y <= 1.0:
        raise DomainError(f"y must lie in [0, 1], got {y}")
    if q == -1:
        return 0.0
    if y == 1.0:
        # theta -> 0 limit; only reachable with M = 0
        return float(q + 1)
    theta = math.acos(y)
    return math.sin((q + 1) * theta) / math.sin(theta)


def chebyshev_u_table(q_max: int, y: float) -> np.ndarray:
    """U_0 .. U_{q_max} at y by the three-term recurrence U_{k+1} = 2y U_k - U_{k-1}."""
    table = np.zeros(q_max + 1)
    table[0] = 1.0
    if q_max >= 1:
        table[1] = 2.0 * y
    for k in range(2, q_max + 1):
        table[k] = 2.0 * y * table[k - 1] - table[k - 2]
    return table


def closed_amplitudes(q: int, shape: SearchShape) -> AmplitudeTriple:
    if q < 0:
        raise DomainError(f"iteration count must be non-negative, got {q}")
    s = shape.s
    u_q = chebyshev_u(q, shape.y)
    u_prev = chebyshev_u(q - 1, shape.y)
    return AmplitudeTriple(a=s * (u_q - u_prev), b=s * u_q, c=-s * u_prev, q=q)


def recurrence_amplitudes(q: int, shape: SearchShape) -> AmplitudeTriple:
    """
    Iterates the amplitude recurrences from a_0 = b_0 = s, c_0 = 0:
    <alpha_q> = y a_{q-1} + (1 - y) c_{q-1}, a_q = 2<alpha_q> - a_{q-1},
    b_q = 2<alpha_q> - c_{q-1}, c_q = -b_{q-1}.
    """
    if q < 0:
        raise DomainError(f"iteration count must be non-negative, got {q}")
    s, y = shape.s, shape.y
    a, b, c = s, s, 0.0
    for k in range(1, q + 1):
        mean = y * a + (1.0 - y) * c
        a, b, c = 2.0 * mean - a, 2.0 * mean - c, -b
        if k == 1:
            seeds = (s * (2.0 * y - 1.0), 2.0 * s * y, -s)
            if max(abs(got - want) for got, want in zip((a, b, c), seeds)) > RECURRENCE_SEED_TOL:
                raise InvariantError("recurrence does not reproduce the first-iteration amplitudes")
    return AmplitudeTriple(a=a, b=b, c=c, q=q)


def _success_from_angle(q, y, theta):
    sin_t = np.sin(theta)
    return (1.0 - y) * (np.sin((q + 1) * theta) ** 2 + np.sin(q * theta) ** 2) / sin_t**2


def success_prob(q: int, shape: SearchShape) -> float:
    """P_s = (1 - cos theta)(U_q^2 + U_{q-1}^2)."""
    if q < 0:
        raise DomainError(f"iteration count must be non-negative, got {q}")
    u_q = chebyshev_u(q, shape.y)
    u_prev = chebyshev_u(q - 1, shape.y)
    return (1.0 - shape.y) * (u_q * u_q + u_prev * u_prev)


def failure_prob(q: int, shape: SearchShape) -> float:
    """P_ns = cos theta (U_q - U_{q-1})^2."""
    if q < 0:
        raise DomainError(f"iteration count must be non-negative, got {q}")
    gap = chebyshev_u(q, shape.y) - chebyshev_u(q - 1, shape.y)
    return shape.y * gap * gap


def success_prob_cosine(q: float, shape: SearchShape) -> float:
    """The same probability as (1 - cos theta cos((2q+1) theta)) / (1 + cos theta); accepts real q."""
    return (1.0 - shape.y * math.cos((2.0 * q + 1.0) * shape.theta)) / (1.0 + shape.y)


def first_iteration_success(ratio: float) -> float:
    """5r - 8r^2 + 4r^3 with r = M/N."""
    if not 0.0 < ratio <= 1.0:
        raise DomainError(f"ratio M/N must lie in (0, 1], got {ratio}")
    return 5.0 * ratio - 8.0 * ratio**2 + 4.0 * ratio**3


def optimal_real_iterations(shape: SearchShape) -> float:
    """The real q-bar = (pi - theta) / 2 theta at which P_s reaches exactly 1."""
    return (math.pi - shape.theta) / (2.0 * shape.theta)


def iteration_bound(ratio: float) -> float:
    """(pi / 2 sqrt 2) sqrt(N/M), the O(sqrt(N/M)) ceiling on q."""
    return ITERATION_BOUND_COEFF * math.sqrt(1.0 / ratio)


def success_lower_bound(shape: SearchShape) -> float:
    """(1 + cos^2 theta) / (1 + cos theta), guaranteed at the required q."""
    return (1.0 + shape.y * shape.y) / (1.0 + shape.y)


def required_iterations(shape: SearchShape) -> IterationPlan:
    q_exact = math.pi / (2.0 * shape.theta)
    q = math.floor(q_exact)
    if q > iteration_bound(shape.ratio) + BOUND_SLACK:
        raise InvariantError(f"q={q} exceeds the O(sqrt(N/M)) bound at M/N={shape.ratio}")
    plan = IterationPlan(
        q=q,
        q_exact=q_exact,
        q_bar=optimal_real_iterations(shape),
        p_success=success_prob(q, shape),
        p_lower_bound=success_lower_bound(shape),
    )
    logger.debug("M/N=%r -> q=%d (pi/2theta=%r), P_s=%r", shape.ratio, q, q_exact, plan.p_success)
    return plan


def required_iterations_curve(ratios: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Vectorized (q, P_s at q) over an array of ratios in (0, 1]."""
    ratios = np.asarray(ratios, dtype=float)
    if ratios.size and (ratios.min() <= 0.0 or ratios.max() > 1.0):
        raise DomainError("ratios must lie in (0, 1]")
    y = 1.0 - ratios
    theta = np.arccos(np.clip(y, -1.0, 1.0))
    q = np.floor(np.pi / (2.0 * theta)).astype(np.int64)
    return q, _success_from_angle(q, y, theta)


def lower_bound_curve(ratios: np.ndarray) -> np.ndarray:
    y = 1.0 - np.asarray(ratios, dtype=float)
    return (1.0 + y * y) / (1.0 + y)


def ratio_grid(step: float, lower: float = 0.0, upper: float = 1.0) -> np.ndarray:
    """Grid points k*step in (lower, upper], snapped to 1e-12 so 1.0 lands exactly."""
    if step <= 0.0:
        raise DomainError(f"grid step must be positive, got {step}")
    k_first = math.floor(lower / step + 1e-9) + 1
    k_last = math.floor(upper / step + 1e-9)
    points = np.round(np.arange(k_first, k_last + 1) * step, 12)
    return points[(points > lower) & (points <= upper)]


def min_success_over_ratios(step: float = 1e-4, lower: float = 0.0, upper: float = 1.0) -> Tuple[float, float]:
    """Argmin and minimum of P_s at the required q, with M/N treated as continuous."""
    if step > 1e-4:
        raise DomainError(f"grid step must be at most 1e-4, got {step}")
    ratios = ratio_grid(step, lower, upper)
    if ratios.size == 0:
        raise DomainError(f"empty ratio grid over ({lower}, {upper}]")
    _, p = required_iterations_curve(ratios)
    k = int(np.argmin(p))
    return float(ratios[k]), float(p[k])
