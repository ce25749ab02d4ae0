"""Dynamic submodular maximization toolkit.

Insertion-only streaming algorithms under cardinality and matroid
constraints, exact evaluators for two families of adversarial instances,
and a replay harness with per-round query accounting.
"""

from dynsub.oracle import (
    CountedOracle,
    marginal,
    check_submodular_monotone,
    brute_force_opt,
    EnumerationBudgetError,
)
from dynsub.streams import Stream, StreamOp, INSERT, DELETE
from dynsub.objectives import (
    CoverageFunction,
    ModularFunction,
    EstimatorBudget,
    multilinear_exact,
    multilinear_estimate,
    plus_direction,
)
from dynsub.matroids import (
    UniformMatroid,
    PartitionMatroid,
    ConvexCombo,
    matroid_rank,
    swap_round,
)

__all__ = [
    "CountedOracle",
    "marginal",
    "check_submodular_monotone",
    "brute_force_opt",
    "EnumerationBudgetError",
    "Stream",
    "StreamOp",
    "INSERT",
    "DELETE",
    "CoverageFunction",
    "ModularFunction",
    "EstimatorBudget",
    "multilinear_exact",
    "multilinear_estimate",
    "plus_direction",
    "UniformMatroid",
    "PartitionMatroid",
    "ConvexCombo",
    "matroid_rank",
    "swap_round",
]

__version__ = "0.1.0"
