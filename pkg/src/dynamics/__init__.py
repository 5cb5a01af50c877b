"""
Glauber dynamics package.
"""
from .chain import (
    ChainState,
    CoupledPair,
    UpdateStream,
    continuous_run,
    coupled_step,
    exact_gibbs_sample,
    glauber_step,
    hamming,
    oriented_glauber_step,
    record_masks,
    run,
    run_coupled,
    watch_unoccupied,
    weighted_distance,
)
from .statistics import (
    HeavinessClassifier,
    above_suspicion,
    bp_residual,
    bp_residual_all,
    heavy_counts,
    interpolation_path,
    is_heavy,
    r_stat,
    r_stat_all,
    s_stat,
    s_stat_all,
    suspect_disagreement,
    unblocked_indicator,
    unblocked_slots,
    w_stat,
    w_stat_all,
)

__all__ = [
    "ChainState",
    "CoupledPair",
    "HeavinessClassifier",
    "UpdateStream",
    "above_suspicion",
    "bp_residual",
    "bp_residual_all",
    "continuous_run",
    "coupled_step",
    "exact_gibbs_sample",
    "glauber_step",
    "hamming",
    "heavy_counts",
    "interpolation_path",
    "is_heavy",
    "oriented_glauber_step",
    "r_stat",
    "r_stat_all",
    "record_masks",
    "run",
    "run_coupled",
    "s_stat",
    "s_stat_all",
    "suspect_disagreement",
    "unblocked_indicator",
    "unblocked_slots",
    "w_stat",
    "w_stat_all",
    "watch_unoccupied",
]
