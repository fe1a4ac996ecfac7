"""
Tabular data behind the probability and expected-cost figures: per-ratio
rows for the proposed algorithm and Grover's, their minima, and the
expected-cost curves for the unknown-M setting.
"""
from __future__ import annotations

import asyncio
import logging
import math
from enum import Enum
from typing import List, Sequence

import numpy as np

from schemas.output import CostRow, ReliabilityReport, SweepRow, SweepSummary

from src.services.analytic import (
    ITERATION_BOUND_COEFF,
    SearchShape,
    lower_bound_curve,
    required_iterations_curve,
)
from src.services.errors import DomainError, InvariantError
from src.services.grover import GROVER_BOUND_COEFF, grover_curve
from src.services.unknown_m import DEFAULT_LAMBDA, OUT_OF_RANGE, expected_cost_grover, expected_cost_proposed

logger = logging.getLogger(__name__)

PROB_TOL = 1e-12
BOUND_SLACK = 1e-9
GRID_DECIMALS = 12

PROPOSED_HEADER = ("ratio", "q", "p_proposed", "p_lower_bound")
COMPARE_HEADER = PROPOSED_HEADER + ("q_grover", "p_grover")


class SweepMode(str, Enum):
    proposed = "proposed"  # partial-diffusion columns only
    compare = "compare"    # plus Grover's q_G and success probability


def grid_points(start: float, stop: float, step: float) -> np.ndarray:
    """start, start + step, ... up to stop inclusive, snapped so decimal grids land exactly."""
    if not 0.0 < start <= stop <= 1.0:
        raise DomainError(f"grid must satisfy 0 < start <= stop <= 1, got start={start} stop={stop}")
    if step <= 0.0:
        raise DomainError(f"grid step must be positive, got {step}")
    count = math.floor((stop - start) / step + 1e-9) + 1
    points = np.round(start + np.arange(count) * step, GRID_DECIMALS)
    return points[points <= stop]


def _check_probabilities(label: str, ratios: np.ndarray, values: np.ndarray) -> None:
    bad = (values < -PROB_TOL) | (values > 1.0 + PROB_TOL)
    if bad.any():
        k = int(np.argmax(bad))
        raise InvariantError(f"{label}={values[k]!r} outside [0, 1] at M/N={ratios[k]!r}")


def _check_bound(label: str, ratios: np.ndarray, q: np.ndarray, coeff: float) -> None:
    over = q > coeff * np.sqrt(1.0 / ratios) + BOUND_SLACK
    if over.any():
        k = int(np.argmax(over))
        raise InvariantError(f"{label}={q[k]} exceeds its O(sqrt(N/M)) bound at M/N={ratios[k]!r}")


def sweep_rows(ratios: Sequence[float], mode: SweepMode = SweepMode.compare) -> List[SweepRow]:
    ratios = np.asarray(ratios, dtype=float)
    q, p = required_iterations_curve(ratios)
    bound = lower_bound_curve(ratios)
    _check_probabilities("p_proposed", ratios, p)
    _check_bound("q", ratios, q, ITERATION_BOUND_COEFF)
    if mode is SweepMode.proposed:
        return [
            SweepRow(ratio=float(r), q=int(qi), p_proposed=float(pi), p_lower_bound=float(bi))
            for r, qi, pi, bi in zip(ratios, q, p, bound)
        ]

    q_g, p_g = grover_curve(ratios)
    _check_probabilities("p_grover", ratios, p_g)
    _check_bound("q_grover", ratios, q_g, GROVER_BOUND_COEFF)
    return [
        SweepRow(
            ratio=float(r),
            q=int(qi),
            p_proposed=float(pi),
            p_lower_bound=float(bi),
            q_grover=int(qgi),
            p_grover=float(pgi),
        )
        for r, qi, pi, bi, qgi, pgi in zip(ratios, q, p, bound, q_g, p_g)
    ]


async def sweep_rows_async(
    ratios: Sequence[float],
    mode: SweepMode = SweepMode.compare,
    workers: int = 1,
) -> List[SweepRow]:
    """`sweep_rows` split into contiguous chunks on worker threads; rows come back in grid order."""
    ratios = np.asarray(ratios, dtype=float)
    workers = max(1, min(workers, ratios.size))
    chunks = np.array_split(ratios, workers)
    logger.debug("sweeping %d ratios in %d chunks", ratios.size, len(chunks))

    # Run all chunks in parallel
    tasks = [asyncio.to_thread(sweep_rows, chunk, mode) for chunk in chunks]
    results = await asyncio.gather(*tasks)
    return [row for chunk in results for row in chunk]


def _argmin(rows: Sequence[SweepRow], field: str) -> tuple[float, float]:
    best = min(rows, key=lambda row: getattr(row, field))
    return getattr(best, field), best.ratio


def sweep_summary(rows: Sequence[SweepRow]) -> SweepSummary:
    if not rows:
        raise DomainError("cannot summarize an empty sweep")
    min_p, at_p = _argmin(rows, "p_proposed")
    min_b, at_b = _argmin(rows, "p_lower_bound")
    summary = SweepSummary(
        points=len(rows),
        min_p_proposed=min_p,
        argmin_p_proposed=at_p,
        min_p_lower_bound=min_b,
        argmin_p_lower_bound=at_b,
    )
    if rows[0].p_grover is not None:
        min_g, at_g = _argmin(rows, "p_grover")
        summary = summary.model_copy(update={"min_p_grover": min_g, "argmin_p_grover": at_g})
    return summary


def compare_reliability(ratios: Sequence[float]) -> ReliabilityReport:
    """
    Compares the guarantees of both algorithms over a ratio grid.

    The proposed algorithm's bound (1 + y^2)/(1 + y) is checked against
    Grover's worst case 1 - M/N at every point, and the grid minima of the
    achieved probabilities against each other.
    """
    ratios = np.asarray(ratios, dtype=float)
    if ratios.size == 0:
        raise DomainError("cannot compare over an empty grid")
    _, p = required_iterations_curve(ratios)
    _, p_g = grover_curve(ratios)
    bound = lower_bound_curve(ratios)
    min_p, min_g = float(p.min()), float(p_g.min())
    return ReliabilityReport(
        points=int(ratios.size),
        bound_dominates=bool(np.all(bound >= 1.0 - ratios - PROB_TOL)),
        min_p_proposed=min_p,
        min_p_grover=min_g,
        min_dominates=min_p >= min_g,
        pointwise_share=float(np.mean(p >= p_g - PROB_TOL)),
    )


def expected_cost_rows(ratios: Sequence[float], lam: float = DEFAULT_LAMBDA) -> List[CostRow]:
    """
    Expected total iterations of both algorithms over a ratio grid, raw and
    floored to whole iterations. Grover's columns carry the out-of-range
    marker above M/N = 3/4.
    """
    rows: List[CostRow] = []
    for ratio in np.asarray(ratios, dtype=float):
        shape = SearchShape.from_ratio(float(ratio))
        proposed = expected_cost_proposed(shape, lam)
        grover = expected_cost_grover(shape)
        rows.append(
            CostRow(
                ratio=float(ratio),
                m_q=proposed.m_q,
                cost_proposed=proposed.total,
                steps_proposed=math.floor(proposed.total),
                m_g=grover.m_g,
                cost_grover=grover.as_value(),
                steps_grover=math.floor(grover.total) if grover.in_range else OUT_OF_RANGE,
            )
        )
    return rows
