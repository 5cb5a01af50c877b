"""
Exact total-variation curves and mixing times on small graphs, plus empirical TV checks.
"""
from typing import List, Optional, Sequence

import numpy as np

from src.errors import BudgetExceededError, DomainError
from src.graph.core import Graph
from src.model.hardcore import IndependentSet, greedy_maximal_independent_set
from src.oracle.exact import GibbsTable, GlauberKernel, exact_distribution, exact_glauber_kernel
from src.dynamics.chain import ChainState, record_masks
from src.dynamics.chain import exact_gibbs_sample
from src.estimators.report import Report
from src.utils.logging import PerformanceLogger, get_experiment_logger
from src.utils.rng import seed_sequence

logger = get_experiment_logger("mixing")

# all-starts mixing time up to this many states; above it a start set is used
ALL_STARTS_MAX_STATES = 2048
DENSE_POWER_MAX_STATES = 4096
DEFAULT_T_MAX = 100_000


def total_variation(p: np.ndarray, q: np.ndarray) -> np.ndarray | float:
    """½‖p − q‖₁ along the last axis."""
    out = 0.5 * np.abs(np.asarray(p) - np.asarray(q)).sum(axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def tv_curve(kernel: GlauberKernel, start: IndependentSet, t_max: int) -> np.ndarray:
    """d_TV(X_t, μ) for t = 0..t_max from a fixed start."""
    if t_max < 0:
        raise DomainError("t_max must be nonnegative")
    dist = kernel.point_mass(start)
    out = np.empty(t_max + 1)
    out[0] = total_variation(dist, kernel.stationary)
    for t in range(1, t_max + 1):
        dist = kernel.step_distribution(dist)
        out[t] = total_variation(dist, kernel.stationary)
    return out


def tv_exact(g: Graph, lam: float, t: int, start: IndependentSet, kernel: Optional[GlauberKernel] = None) -> float:
    """Exact d_TV between X_t (from start) and μ by repeated kernel application."""
    kernel = kernel or exact_glauber_kernel(g, lam)
    return float(tv_curve(kernel, start, t)[-1])


def tv_by_matrix_power(g: Graph, lam: float, t: int, start: IndependentSet) -> float:
    """Same quantity through a dense matrix power."""
    kernel = exact_glauber_kernel(g, lam, state_cap=DENSE_POWER_MAX_STATES)
    dense = kernel.matrix.toarray()
    row = np.linalg.matrix_power(dense, t)[kernel.table.index_of(start.mask)]
    return float(total_variation(row, kernel.stationary))


def default_starts(g: Graph) -> List[IndependentSet]:
    """∅ plus greedy maximal sets in natural and reversed vertex order."""
    order = list(range(g.vertex_count))
    starts = [
        IndependentSet.empty(g.vertex_count),
        greedy_maximal_independent_set(g, order),
        greedy_maximal_independent_set(g, order[::-1]),
    ]
    unique = {s.mask: s for s in starts}
    return [unique[m] for m in sorted(unique)]


def mixing_time_exact(
    g: Graph,
    lam: float,
    eps: float = 0.25,
    starts: Optional[Sequence[IndependentSet]] = None,
    t_max: int = DEFAULT_T_MAX,
    kernel: Optional[GlauberKernel] = None,
) -> int:
    """min t with max over starts of d_TV(X_t, μ) ≤ eps.

    Starts default to every state when |Ω| ≤ 2048, otherwise to ``default_starts``.
    """
    if not 0 < eps < 1:
        raise DomainError(f"eps must lie in (0, 1), got {eps}")
    kernel = kernel or exact_glauber_kernel(g, lam)
    size = len(kernel.table)
    if starts is None:
        if size <= ALL_STARTS_MAX_STATES:
            rows = np.arange(size)
        else:
            logger.warning("⚠️ State space too large for all starts, using a start set", states=size)
            rows = np.array([kernel.table.index_of(s.mask) for s in default_starts(g)])
    else:
        rows = np.array([kernel.table.index_of(s.mask) for s in starts])

    # column j holds the distribution started at rows[j]
    dists = np.zeros((size, rows.size))
    dists[rows, np.arange(rows.size)] = 1.0
    pi = kernel.stationary[:, None]
    transpose = kernel.matrix.T.tocsr()
    with PerformanceLogger("mixing_time_exact", logger):
        for t in range(t_max + 1):
            worst = 0.5 * float(np.abs(dists - pi).sum(axis=0).max())
            if worst <= eps:
                logger.info("✅ Mixing time found", eps=eps, t_mix=t, states=size, starts=int(rows.size))
                return t
            dists = transpose @ dists
    raise BudgetExceededError(f"TV still above {eps} after {t_max} steps")


def detailed_balance_violation(kernel: GlauberKernel) -> float:
    """max |π(i)P(i,j) − π(j)P(j,i)|."""
    flow = kernel.matrix.multiply(kernel.stationary[:, None]).tocsr()
    diff = (flow - flow.T).tocsr()
    return float(np.abs(diff.data).max(initial=0.0))


def empirical_tv(samples: np.ndarray, g: Graph, lam: float, table: Optional[GibbsTable] = None) -> float:
    """TV between the empirical table of bitmask samples and μ."""
    table = table or exact_distribution(g, lam)
    samples = np.asarray(samples, dtype=np.int64)
    if samples.size == 0:
        raise DomainError("no samples")
    masks, counts = np.unique(samples, return_counts=True)
    positions = np.searchsorted(table.masks, masks)
    positions = np.minimum(positions, table.masks.size - 1)
    inside = table.masks[positions] == masks
    empirical = np.zeros(table.masks.size)
    empirical[positions[inside]] = counts[inside] / samples.size
    outside = float(counts[~inside].sum()) / samples.size
    return 0.5 * (float(np.abs(empirical - table.probabilities).sum()) + outside)


def stationarity_check(
    g: Graph,
    lam: float,
    n_samples: int,
    thin: Optional[int] = None,
    seed: int = 0,
    tv_threshold: float = 0.01,
    balance_threshold: float = 1e-12,
) -> Report:
    """Detailed balance of the exact kernel and TV of thinned chain samples against μ.

    The chain starts from an exact Gibbs draw, so no burn-in is needed.
    """
    thin = g.vertex_count if thin is None else thin
    table = exact_distribution(g, lam)
    kernel = exact_glauber_kernel(g, lam)
    start = exact_gibbs_sample(g, lam, seed_sequence(seed, "stationarity-start"))
    state = ChainState.from_set(g, lam, start, seed=seed_sequence(seed, "stationarity"))
    with PerformanceLogger("stationarity_check", logger) as perf:
        samples = record_masks(state, n_samples, max(thin, 1))
        tv = empirical_tv(samples, g, lam, table)
        balance = detailed_balance_violation(kernel)

    report = Report(
        experiment_id="stationarity",
        inputs={"n": g.vertex_count, "lambda": lam, "n_samples": n_samples, "thin": thin, "seed": seed},
        thresholds={"empirical_tv.max": tv_threshold, "detailed_balance.max": balance_threshold},
        wall_clock_seconds=perf.elapsed,
    )
    report.add_metric("empirical_tv", tv, replicates=n_samples, seed=seed, method="sampled")
    report.add_metric("detailed_balance", balance, seed=seed, method="exact")
    report.add_metric("states", float(len(table)), method="exact")
    report.evaluate()
    return report
