from __future__ import annotations

from typing import List

import numpy as np

from src.services.errors import UsageError

SEED_MAX = 2**64 - 1


def check_seed(seed: int) -> int:
    if not 0 <= int(seed) <= SEED_MAX:
        raise UsageError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return int(seed)


def make_rng(seed: int) -> np.random.Generator:
    """
    Returns a PCG64 generator for the given 64-bit seed.

    Each simulation run owns its generator, so runs can execute on any thread
    without sharing state.
    """
    return np.random.default_rng(check_seed(seed))


def derive_run_seeds(seed: int, runs: int) -> List[int]:
    """
    Derives one independent 64-bit seed per run from a master seed.

    The derivation only depends on (seed, runs index), so run k gets the same
    seed whether the batch has k+1 runs or ten thousand.
    """
    children = np.random.SeedSequence(check_seed(seed)).spawn(runs)
    return [int(child.generate_state(1, dtype=np.uint64)[0]) for child in children]


def sample_index(cdf: np.ndarray, rng: np.random.Generator) -> int:
    """Inverse-CDF draw of one index from a cumulative distribution."""
    u = rng.random() * cdf[-1]
    return min(int(np.searchsorted(cdf, u, side="right")), cdf.size - 1)
