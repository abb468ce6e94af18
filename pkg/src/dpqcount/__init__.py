"""Instrumented dual-pivot quicksort with exact average-case verification.

Subpackages:

* ``sort_core``      the instrumented dual-pivot sort and a classic baseline
* ``exact_analysis`` exact rational mean formulas and asymptotic constants
* ``urn_model``      exact three-color urn dynamic programming
* ``rde_limit``      toll-moment quadrature and the limit-law tree sampler
* ``harness``        exhaustive oracles, Monte Carlo drivers, data emitters
* ``cli``            the ``dpqcount`` command
"""

from .sort_core import (
    CostProfile,
    PartitionOutcome,
    partition_count,
    rotate3,
    sort_classic,
    sort_count,
)

__all__ = [
    "CostProfile",
    "PartitionOutcome",
    "partition_count",
    "rotate3",
    "sort_classic",
    "sort_count",
]

__version__ = "0.1.0"
