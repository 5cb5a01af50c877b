"""
Exact oracle package.
"""
from .exact import (
    GibbsTable,
    GlauberKernel,
    PartitionOracle,
    brute_force_partition,
    enumerate_independent_sets,
    exact_conditional_marginal,
    exact_distribution,
    exact_glauber_kernel,
    exact_log_partition,
    exact_marginal,
    exact_partition,
    exact_stat_expectation,
)

__all__ = [
    "GibbsTable",
    "GlauberKernel",
    "PartitionOracle",
    "brute_force_partition",
    "enumerate_independent_sets",
    "exact_conditional_marginal",
    "exact_distribution",
    "exact_glauber_kernel",
    "exact_log_partition",
    "exact_marginal",
    "exact_partition",
    "exact_stat_expectation",
]
