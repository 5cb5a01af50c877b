"""
Verification suites behind ``verify --suite``: oracle equivalence, BP, Φ, the sampler and Ẑ.
"""
from typing import Any, Callable, Dict, List, Optional, Tuple

import networkx as nx
import numpy as np

from src.config import settings
from src.errors import DomainError, NonConvergenceError
from src.graph.core import Graph
from src.graph.generators import named_graph, random_regular, random_tree
from src.graph.structure import diameter
from src.model.hardcore import lambda_c
from src.oracle.exact import brute_force_partition, exact_partition
from src.bp.fields import VertexField
from src.bp.fixed_point import solve_fixed_point_F
from src.bp.operators import alpha, uniqueness_margin
from src.bp.phi import PHI_CEILING, build_phi, check_jacobian_phi, verify_phi_contraction
from src.estimators.experiments import bp_accuracy
from src.estimators.mixing import stationarity_check
from src.estimators.partition import estimate_Z
from src.estimators.replicates import run_replicates
from src.estimators.report import Report
from src.utils.logging import PerformanceLogger, get_experiment_logger
from src.utils.rng import make_rng, seed_sequence

logger = get_experiment_logger("verify")

ORACLE_LAMBDAS = (0.25, 1.0, 2.0)
TREE_LAMBDAS = (0.1, 1.0, 4.0)
UNIQUENESS_DEGREES = (4, 6, 8, 12)
SAMPLER_GRAPHS = ("path:4", "cycle:5", "star:4", "complete:4", "petersen")


def oracle_corpus(seed: int = 0, per_size: int = 4) -> List[Graph]:
    """Every connected atlas graph (n ≤ 7) plus seeded random connected graphs with n = 8..12."""
    graphs = [Graph.from_networkx(h) for h in nx.graph_atlas_g()[1:] if nx.is_connected(h)]
    rng = make_rng(seed_sequence(seed, "oracle-corpus"))
    for n in range(8, 13):
        made = 0
        while made < per_size:
            h = nx.gnp_random_graph(n, float(rng.uniform(0.2, 0.6)), seed=int(rng.integers(2**31)))
            if nx.is_connected(h):
                graphs.append(Graph.from_networkx(h))
                made += 1
    return graphs


def tree_corpus(seed: int = 0, count: int = 20, max_n: int = 50) -> List[Graph]:
    rng = make_rng(seed_sequence(seed, "tree-corpus"))
    return [random_tree(int(rng.integers(2, max_n + 1)), seed=int(rng.integers(2**31))) for _ in range(count)]


def oracle_suite(seed: int = 0) -> Report:
    """Deletion recursion against brute enumeration, relative error ≤ 1e-12."""
    worst = 0.0
    graphs = oracle_corpus(seed)
    with PerformanceLogger("oracle_suite", logger) as perf:
        for g in graphs:
            for lam in ORACLE_LAMBDAS:
                recursive = exact_partition(g, lam)
                brute = brute_force_partition(g, lam)
                worst = max(worst, abs(recursive / brute - 1.0))
    report = Report(
        experiment_id="verify.oracle",
        inputs={"graphs": len(graphs), "lambdas": list(ORACLE_LAMBDAS), "seed": seed},
        thresholds={"max_relative_error.max": 1e-12},
        wall_clock_seconds=perf.elapsed,
    )
    report.add_metric("max_relative_error", worst, replicates=len(graphs), seed=seed, method="exact")
    report.evaluate()
    return report


def _uniqueness_case(d: int, graph_seed: int, init_seed: int, inits: int = 10) -> Dict[str, Any]:
    """Fixed points of F from random starts on random_regular(50, d) at 0.8·λ_c(d).

    The rate check applies only where α(λ,d) < 1; above that plain iteration may cycle and the
    Newton-refined points are compared for agreement alone.
    """
    g = random_regular(50, d, seed=graph_seed)
    lam = 0.8 * lambda_c(d)
    a = alpha(lam, d)
    rng = make_rng(init_seed)
    points = []
    rates = []
    methods = set()
    for _ in range(inits):
        fp = solve_fixed_point_F(g, lam, init=VertexField.random(g.vertex_count, rng))
        points.append(fp.fixed_point.values)
        rates.append(fp.observed_rate)
        methods.add(fp.method)
    rate_checked = a < 1
    return {
        "max_degree": d,
        "alpha": a,
        "spread": float(np.max(np.abs(np.array(points) - points[0]), initial=0.0)),
        "rate_checked": rate_checked,
        "worst_rate": max(rates),
        "rate_excess": max(rates) - a if rate_checked else None,
        "methods": ",".join(sorted(methods)),
    }


def bp_suite(seed: int = 0) -> Report:
    """BP exactness on random trees and fixed-point uniqueness on random regular graphs."""
    tree_error = 0.0
    failures = 0
    rows: List[Dict[str, Any]] = []
    trees = tree_corpus(seed)
    with PerformanceLogger("bp_suite", logger) as perf:
        for g in trees:
            t = max(diameter(g), 1)
            for lam in TREE_LAMBDAS:
                tree_error = max(tree_error, bp_accuracy(g, lam, t).metrics["max_edge_ratio_error"].estimate or 0.0)
        for d in UNIQUENESS_DEGREES:
            for k in range(3):
                try:
                    row = _uniqueness_case(d, graph_seed=int(seed_sequence(seed, f"bp-graph-{d}", k).generate_state(1)[0]),
                                           init_seed=int(seed_sequence(seed, f"bp-init-{d}", k).generate_state(1)[0]))
                except NonConvergenceError as exc:
                    logger.warning("⚠️ Uniqueness case failed", max_degree=d, case=k, error=str(exc))
                    failures += 1
                    continue
                rows.append({"case": k, **row})

    spread = max((row["spread"] for row in rows), default=0.0)
    excesses = [row["rate_excess"] for row in rows if row["rate_checked"]]
    report = Report(
        experiment_id="verify.bp",
        inputs={"trees": len(trees), "tree_lambdas": list(TREE_LAMBDAS), "degrees": list(UNIQUENESS_DEGREES), "seed": seed},
        thresholds={
            "max_tree_ratio_error.max": 1e-9,
            "max_fixed_point_spread.max": 1e-8,
            "max_rate_excess.max": 1e-6,
            "non_converged.max": 0,
        },
        wall_clock_seconds=perf.elapsed,
        rows=rows,
    )
    report.add_metric("max_tree_ratio_error", tree_error, replicates=len(trees), seed=seed, method="exact")
    report.add_metric("max_fixed_point_spread", spread, replicates=len(rows), seed=seed, method="computed")
    report.add_metric("max_rate_excess", max(excesses) if excesses else None, replicates=len(excesses), seed=seed, method="computed")
    report.add_metric("rate_unchecked_cases", float(sum(not row["rate_checked"] for row in rows)), seed=seed)
    report.add_metric("non_converged", float(failures), seed=seed)
    report.evaluate()
    return report


def phi_suite(seed: int = 0, delta: float = 0.2, degrees: Tuple[int, ...] = tuple(range(3, 41))) -> Report:
    """Φ bounds and both contraction checks on every Δ with a nonnegative margin at 0.8·λ_c(Δ)."""
    rows = []
    with PerformanceLogger("phi_suite", logger) as perf:
        for d in degrees:
            lam = 0.8 * lambda_c(d)
            margin = uniqueness_margin(lam, d, delta)
            if margin < 0:
                continue
            g = random_regular(60 if d % 2 else 50, d, seed=int(seed_sequence(seed, "phi-graph", d).generate_state(1)[0]))
            omega = solve_fixed_point_F(g, lam).fixed_point
            assert isinstance(omega, VertexField)
            phi = build_phi(g, lam, omega, delta)
            contraction = verify_phi_contraction(g, lam, omega, phi, delta)
            jacobian = check_jacobian_phi(g, lam, omega, phi, delta)
            rows.append({
                "max_degree": d, "margin": margin, "phi_min": float(phi.values.min()), "phi_max": float(phi.values.max()),
                "max_ratio": contraction.max_ratio, "max_jacobian_excess": jacobian.max_excess,
                "passed": bool(phi.values.min() >= 1 and phi.values.max() <= PHI_CEILING and contraction.passed and jacobian.passed),
            })
    report = Report(
        experiment_id="verify.phi",
        inputs={"delta": delta, "degrees": list(degrees), "seed": seed},
        thresholds={"failed_pairs.max": 0, "checked_pairs.min": 1},
        wall_clock_seconds=perf.elapsed,
        rows=rows,
    )
    report.add_metric("checked_pairs", float(len(rows)))
    report.add_metric("failed_pairs", float(sum(not row["passed"] for row in rows)))
    report.evaluate()
    return report


def sampler_suite(seed: int = 0, n_samples: int = 1_000_000) -> Report:
    """Detailed balance and empirical TV on small named graphs."""
    worst_tv = worst_balance = 0.0
    rows = []
    with PerformanceLogger("sampler_suite", logger) as perf:
        for k, spec in enumerate(SAMPLER_GRAPHS):
            g = named_graph(spec)
            check = stationarity_check(g, 1.0, n_samples, seed=seed + k)
            tv = check.metrics["empirical_tv"].estimate or 0.0
            balance = check.metrics["detailed_balance"].estimate or 0.0
            worst_tv, worst_balance = max(worst_tv, tv), max(worst_balance, balance)
            rows.append({"graph": spec, "empirical_tv": tv, "detailed_balance": balance})
    report = Report(
        experiment_id="verify.sampler",
        inputs={"graphs": list(SAMPLER_GRAPHS), "n_samples": n_samples, "seed": seed},
        thresholds={"max_empirical_tv.max": 0.01, "max_detailed_balance.max": 1e-12},
        wall_clock_seconds=perf.elapsed,
        rows=rows,
    )
    report.add_metric("max_empirical_tv", worst_tv, replicates=n_samples, seed=seed, method="sampled")
    report.add_metric("max_detailed_balance", worst_balance, seed=seed, method="exact")
    report.evaluate()
    return report


def _count_trial(task: Tuple[Graph, float, float], seed: np.random.SeedSequence) -> float:
    g, lam, eps = task
    return estimate_Z(g, lam, eps, seed=int(seed.generate_state(1)[0])).estimate


def count_suite(seed: int = 0, trials: int = 100, eps: float = 0.07, tolerance: float = 0.05, jobs: Optional[int] = None) -> Report:
    """Seeded Ẑ trials on the triangle (λ = 1, Z = 4) and a random 3-regular graph on 20 vertices at λ_c(3)/2.

    Each graph needs at least 95% of its trials within ``tolerance`` relative error of the exact Z.
    """
    jobs = settings.jobs if jobs is None else jobs
    cases = [
        ("triangle", Graph.from_edges(3, [(0, 1), (1, 2), (0, 2)]), 1.0),
        ("regular:20:3", random_regular(20, 3, seed=int(seed_sequence(seed, "count-graph").generate_state(1)[0])), 0.5 * lambda_c(3)),
    ]
    rows = []
    with PerformanceLogger("count_suite", logger) as perf:
        for name, g, lam in cases:
            truth = exact_partition(g, lam)
            estimates = run_replicates(_count_trial, (g, lam, eps), seed, f"count-{name}", trials, jobs)
            errors = [abs(z / truth - 1.0) for z in estimates]
            rows.append({
                "graph": name, "lambda": lam, "exact_z": truth, "trials": trials,
                "within": sum(e <= tolerance for e in errors), "max_relative_error": max(errors, default=0.0),
            })
    report = Report(
        experiment_id="verify.count",
        inputs={"trials": trials, "eps": eps, "tolerance": tolerance, "seed": seed},
        thresholds={"min_within_fraction.min": 0.95},
        wall_clock_seconds=perf.elapsed,
        rows=rows,
    )
    report.add_metric("min_within_fraction", min(row["within"] / trials for row in rows), replicates=trials, seed=seed, method="sampled")
    report.add_metric("max_relative_error", max(row["max_relative_error"] for row in rows), replicates=trials, seed=seed, method="sampled")
    report.evaluate()
    return report


SUITES: Dict[str, Callable[[int], Report]] = {
    "oracle": oracle_suite,
    "bp": bp_suite,
    "phi": phi_suite,
    "sampler": sampler_suite,
    "count": count_suite,
}


def run_suite(name: str, seed: int = 0) -> Report:
    """One suite, or ``all`` merged into a single report with prefixed metrics."""
    if name != "all":
        if name not in SUITES:
            raise DomainError(f"unknown suite {name!r}; choose from {', '.join([*SUITES, 'all'])}")
        return SUITES[name](seed)
    merged = Report(experiment_id="verify.all", inputs={"seed": seed, "suites": list(SUITES)})
    wall = 0.0
    for suite, fn in SUITES.items():
        part = fn(seed)
        wall += part.wall_clock_seconds or 0.0
        for metric, value in part.metrics.items():
            merged.metrics[f"{suite}.{metric}"] = value
        for key, bound in part.thresholds.items():
            merged.thresholds[f"{suite}.{key}"] = bound
    merged.wall_clock_seconds = wall
    merged.evaluate()
    return merged
