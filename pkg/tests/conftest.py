"""Shared fixtures for the expensive Monte Carlo computations.

The large runs are session-scoped so the acceptance module and the unit
tests reuse the same arrays instead of re-simulating.
"""

import numpy as np
import pytest

from dpqcount import harness, rde_limit

MC_N = 10_000
MC_SAMPLES = 10_000
RDE_SAMPLES = 100_000
RDE_DEPTH = 25
RDE_PRUNE = 1e-4
SEED = 0


@pytest.fixture(scope="session")
def mc_count_10k() -> np.ndarray:
    """(comparisons, half_swaps) of 10^4 dual-pivot sorts at n = 10^4, seed 0."""
    return harness.montecarlo_runs(MC_N, MC_SAMPLES, SEED, "count")


@pytest.fixture(scope="session")
def mc_classic_10k() -> np.ndarray:
    """(comparisons, half_swaps) of 10^4 classic sorts at n = 10^4, seed 0."""
    return harness.montecarlo_runs(MC_N, MC_SAMPLES, SEED, "classic")


@pytest.fixture(scope="session")
def rde_100k() -> np.ndarray:
    """10^5 limit-law samples at depth 25, prune 1e-4, seed 0."""
    return rde_limit.sample_limit_batch(SEED, RDE_SAMPLES, RDE_DEPTH, RDE_PRUNE)
