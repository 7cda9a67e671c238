"""Synthetic data generation, update workloads, benchmark protocols, CLI."""

from gridstore.bench.synth import SyntheticSpec, gen_synthetic
from gridstore.bench.workload import UpdateWorkload, gen_update_workload

__all__ = ["SyntheticSpec", "UpdateWorkload", "gen_synthetic", "gen_update_workload"]
