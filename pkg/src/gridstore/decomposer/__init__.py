"""Layout optimizer: exact DP over recursive cuts, weighted DP, greedy and
aggressive heuristics, incremental maintenance, and brute-force oracles."""

from gridstore.decomposer.types import (
    Constraints,
    DecompEntry,
    Decomposition,
    DpBudgetError,
    IncrementalConfig,
)
from gridstore.decomposer.dp import dp_optimal, dp_weighted
from gridstore.decomposer.greedy import aggressive, greedy
from gridstore.decomposer.incremental import incremental
from gridstore.decomposer.oracles import exhaustive_cut_oracle, exhaustive_partition_oracle
from gridstore.decomposer.validate import Violation, validate_recoverability

__all__ = [
    "Constraints",
    "DecompEntry",
    "Decomposition",
    "DpBudgetError",
    "IncrementalConfig",
    "Violation",
    "aggressive",
    "dp_optimal",
    "dp_weighted",
    "exhaustive_cut_oracle",
    "exhaustive_partition_oracle",
    "greedy",
    "incremental",
    "validate_recoverability",
]
