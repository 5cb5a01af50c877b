"""
Experiments, mixing diagnostics, the partition-function estimator and reports.
"""
from .config import ExperimentConfig, GeneratorSpec, GraphSource
from .experiments import (
    bp_accuracy,
    burn_in_probe,
    coupling_contraction,
    fixed_point_experiment,
    mixing_experiment,
    oriented_comparison,
    phi_experiment,
    uniformity_experiment,
    uniqueness_scan,
)
from .mixing import (
    detailed_balance_violation,
    empirical_tv,
    mixing_time_exact,
    stationarity_check,
    total_variation,
    tv_by_matrix_power,
    tv_curve,
    tv_exact,
)
from .partition import PartitionEstimate, estimate_Z
from .replicates import run_replicates, run_tasks
from .report import Metric, Report
from .suites import run_suite

__all__ = [
    "ExperimentConfig",
    "GeneratorSpec",
    "GraphSource",
    "Metric",
    "PartitionEstimate",
    "Report",
    "bp_accuracy",
    "burn_in_probe",
    "coupling_contraction",
    "detailed_balance_violation",
    "empirical_tv",
    "estimate_Z",
    "fixed_point_experiment",
    "mixing_experiment",
    "mixing_time_exact",
    "oriented_comparison",
    "phi_experiment",
    "run_replicates",
    "run_suite",
    "run_tasks",
    "stationarity_check",
    "total_variation",
    "tv_by_matrix_power",
    "tv_curve",
    "tv_exact",
    "uniformity_experiment",
    "uniqueness_scan",
]
