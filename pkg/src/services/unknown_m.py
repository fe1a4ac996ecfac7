"""
Randomized search when the number of matches is unknown.

Each round picks j uniformly from {0, ..., ceil(m) - 1}, runs j iterations of
the partial-diffusion search from a freshly prepared register, samples one
item from the exact output distribution and checks it classically. On a miss
m grows to min(lambda * m, sqrt(N)); m stays a real number throughout.
"""
from __future__ import annotations

import asyncio
import logging
import math
import threading
from collections import OrderedDict
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from schemas.output import RunSummary

from src.services.analytic import SearchShape
from src.services.errors import DomainError, InvariantError, ShapeError
from src.services.grover import GroverShape
from src.services.statevector import (
    MarkedSet,
    StateVector,
    apply_oracle,
    apply_partial_diffusion,
    check_register_size,
    measure_item_probabilities,
    run_search,
)
from utils.rng import SEED_MAX, derive_run_seeds, make_rng, sample_index

logger = logging.getLogger(__name__)

DEFAULT_LAMBDA = 8.0 / 7.0
MAX_LAMBDA = 4.0 / 3.0
# per-round success probability at the critical stage is above this, for small M/N
CRITICAL_SUCCESS_FLOOR = 0.2725
CRITICAL_FAILURE_RATE = 1.0 - CRITICAL_SUCCESS_FLOOR
GROVER_VALID_RATIO = 0.75
OUT_OF_RANGE = "out-of-range"
CACHE_BUDGET_BYTES = 256 * 2**20


class DriverConfig(BaseModel):
    model_config = ConfigDict(populate_by_name=True, frozen=True)

    lam: float = Field(DEFAULT_LAMBDA, alias="lambda", gt=1.0, le=MAX_LAMBDA)
    seed: int = Field(0, ge=0, le=SEED_MAX)
    max_rounds: Optional[int] = Field(None, ge=1)

    def rounds_cap(self, N: int) -> int:
        """The configured cap, or 10 * ceil(log_lambda sqrt(N)) + 64."""
        if self.max_rounds is not None:
            return self.max_rounds
        return 10 * math.ceil(math.log(math.sqrt(N), self.lam)) + 64


class RunRecord(BaseModel):
    found_index: Optional[int] = None
    rounds: int
    total_iterations: int
    oracle_calls: int
    seed: int


class SearchDistributionCache:
    """
    Cumulative item distributions after j iterations, shared by every run on
    the same (n, marked) pair. Distributions are computed forward from the
    furthest state reached so far and evicted least-recently-used once the
    cache outgrows its byte budget. Safe to share across threads.
    """

    def __init__(self, n: int, marked: MarkedSet, budget_bytes: int = CACHE_BUDGET_BYTES) -> None:
        self.n = check_register_size(n)
        if marked.n != self.n:
            raise ShapeError(f"marked set is for n={marked.n}, register has n={self.n}")
        self.marked = marked
        self._capacity = max(2, budget_bytes // (8 * marked.N))
        self._cdfs: "OrderedDict[int, np.ndarray]" = OrderedDict()
        self._frontier: StateVector = run_search(self.n, marked, 0)
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return len(self._cdfs)

    def _store(self, j: int, state: StateVector) -> np.ndarray:
        cdf = np.cumsum(measure_item_probabilities(state))
        self._cdfs[j] = cdf
        while len(self._cdfs) > self._capacity:
            self._cdfs.popitem(last=False)
        return cdf

    def cdf(self, j: int) -> np.ndarray:
        with self._lock:
            cached = self._cdfs.get(j)
            if cached is not None:
                self._cdfs.move_to_end(j)
                return cached
            if j < self._frontier.iterations:
                return self._store(j, run_search(self.n, self.marked, j))
            state = self._frontier
            while state.iterations < j:
                step = apply_partial_diffusion(apply_oracle(state, self.marked))
                state = replace(step, iterations=state.iterations + 1)
                self._store(state.iterations, state)
            self._frontier = state
            logger.debug("distribution cache advanced to j=%d (%d entries)", j, len(self._cdfs))
            return self._cdfs[j] if j in self._cdfs else self._store(j, state)


def _check_driver_inputs(n: int, marked: MarkedSet) -> int:
    n = check_register_size(n)
    if marked.n != n:
        raise ShapeError(f"marked set is for n={marked.n}, register has n={n}")
    if marked.M < 1:
        raise DomainError("the randomized driver terminates only when at least one match exists")
    return n


def run_unknown_m(
    n: int,
    marked: MarkedSet,
    config: DriverConfig,
    cache: Optional[SearchDistributionCache] = None,
) -> RunRecord:
    n = _check_driver_inputs(n, marked)
    if cache is None:
        cache = SearchDistributionCache(n, marked)
    elif cache.marked != marked:
        raise ShapeError("distribution cache was built for a different marked set")

    rng = make_rng(config.seed)
    ceiling = math.sqrt(marked.N)
    cap = config.rounds_cap(marked.N)
    m = 1.0
    total = 0
    for rounds in range(1, cap + 1):
        j = int(rng.integers(0, math.ceil(m)))
        total += j
        item = sample_index(cache.cdf(j), rng)
        if marked.contains(item):
            return RunRecord(
                found_index=item,
                rounds=rounds,
                total_iterations=total,
                oracle_calls=total + rounds,
                seed=config.seed,
            )
        m = min(config.lam * m, ceiling)

    logger.warning("no match after %d rounds (seed=%d, N=%d, M=%d)", cap, config.seed, marked.N, marked.M)
    return RunRecord(found_index=None, rounds=cap, total_iterations=total, oracle_calls=total + cap, seed=config.seed)


def run_unknown_m_batch(n: int, marked: MarkedSet, runs: int, config: DriverConfig) -> List[RunRecord]:
    """`runs` independent runs, run k seeded from the k-th child of the master seed."""
    n = _check_driver_inputs(n, marked)
    cache = SearchDistributionCache(n, marked)
    return [
        run_unknown_m(n, marked, config.model_copy(update={"seed": seed}), cache)
        for seed in derive_run_seeds(config.seed, runs)
    ]


async def run_unknown_m_batch_async(
    n: int,
    marked: MarkedSet,
    runs: int,
    config: DriverConfig,
    workers: int = 1,
) -> List[RunRecord]:
    """Same records as `run_unknown_m_batch`, computed on worker threads in contiguous chunks."""
    n = _check_driver_inputs(n, marked)
    cache = SearchDistributionCache(n, marked)
    seeds = derive_run_seeds(config.seed, runs)
    workers = max(1, min(workers, len(seeds)))
    bounds = np.linspace(0, len(seeds), workers + 1).astype(int)

    def run_chunk(chunk: Sequence[int]) -> List[RunRecord]:
        return [run_unknown_m(n, marked, config.model_copy(update={"seed": seed}), cache) for seed in chunk]

    # Run all chunks in parallel; gather keeps them in submission order
    tasks = [asyncio.to_thread(run_chunk, seeds[lo:hi]) for lo, hi in zip(bounds[:-1], bounds[1:])]
    chunks = await asyncio.gather(*tasks)
    return [record for chunk in chunks for record in chunk]


def summarize_runs(records: Sequence[RunRecord]) -> RunSummary:
    if not records:
        raise DomainError("cannot summarize an empty batch of runs")
    totals = np.array([r.total_iterations for r in records])
    found = sum(r.found_index is not None for r in records)
    return RunSummary(
        runs=len(records),
        found=found,
        success_rate=found / len(records),
        mean_total_iterations=float(totals.mean()),
        max_total_iterations=int(totals.max()),
        mean_rounds=float(np.mean([r.rounds for r in records])),
        mean_oracle_calls=float(np.mean([r.oracle_calls for r in records])),
    )


def paired_sine_sum(m: int, theta: float) -> float:
    """sum_{q<m} sin^2((q+1) theta) + sin^2(q theta) = m - cos(theta) sin(2 m theta) / (2 sin theta)."""
    if m < 1:
        raise DomainError(f"m must be a positive integer, got {m}")
    if not 0.0 < theta <= math.pi / 2:
        raise DomainError(f"theta must lie in (0, pi/2], got {theta}")
    return m - math.cos(theta) * math.sin(2 * m * theta) / (2.0 * math.sin(theta))


def average_success_prob(m: int, shape: SearchShape) -> float:
    """Success probability when j is uniform over {0, ..., m-1}."""
    if m < 1:
        raise DomainError(f"m must be a positive integer, got {m}")
    y, theta = shape.y, shape.theta
    p_m = (1.0 - y * math.sin(2 * m * theta) / (2.0 * m * math.sin(theta))) / (1.0 + y)
    if shape.ratio <= 1e-3 and m >= 1.0 / math.sin(theta) and p_m <= CRITICAL_SUCCESS_FLOOR:
        raise InvariantError(f"P_m={p_m} fell below {CRITICAL_SUCCESS_FLOOR} at the critical stage")
    return p_m


@dataclass(frozen=True)
class ExpectedCost:
    m_q: float
    pre_coefficient: float
    post_coefficient: float

    @property
    def pre_critical(self) -> float:
        return self.pre_coefficient * self.m_q

    @property
    def post_critical(self) -> float:
        return self.post_coefficient * self.m_q

    @property
    def total(self) -> float:
        return self.pre_critical + self.post_critical

    @property
    def total_coefficient(self) -> float:
        return self.pre_coefficient + self.post_coefficient


def expected_cost_proposed(shape: SearchShape, lam: float = DEFAULT_LAMBDA) -> ExpectedCost:
    """
    Expected iterations m_q/(2(lambda-1)) before the critical stage m >= m_q
    and m_q/(2(1 - 0.7275 lambda)) after it, with m_q = 1/sin(theta).
    """
    if lam <= 1.0:
        raise DomainError(f"lambda must exceed 1, got {lam}")
    if lam * CRITICAL_FAILURE_RATE >= 1.0:
        raise DomainError(f"lambda={lam} makes the post-critical series diverge")
    return ExpectedCost(
        m_q=1.0 / math.sin(shape.theta),
        pre_coefficient=1.0 / (2.0 * (lam - 1.0)),
        post_coefficient=1.0 / (2.0 * (1.0 - CRITICAL_FAILURE_RATE * lam)),
    )


@dataclass(frozen=True)
class GroverExpectedCost:
    m_g: Optional[float]
    total: Optional[float]

    @property
    def in_range(self) -> bool:
        return self.total is not None

    def as_value(self) -> float | str:
        return self.total if self.total is not None else OUT_OF_RANGE


def expected_cost_grover(shape: SearchShape) -> GroverExpectedCost:
    """8 m_G with m_G = 1/sin(2 theta_G), meaningful only for M <= 3N/4."""
    if shape.ratio > GROVER_VALID_RATIO:
        return GroverExpectedCost(m_g=None, total=None)
    m_g = 1.0 / math.sin(2.0 * GroverShape.from_ratio(shape.ratio).theta_g)
    return GroverExpectedCost(m_g=m_g, total=8.0 * m_g)
