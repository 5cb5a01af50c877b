"""
Experiments that tie the sampler, BP and the oracle together into Reports.

Each replicate runs in a module-level function so replicates can go to worker
processes; every one of them draws from its own derived seed stream.
"""
import math
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.config import settings
from src.errors import DomainError
from src.graph.core import Graph, ball, oriented_view
from src.graph.structure import two_coloring
from src.model.hardcore import IndependentSet, greedy_maximal_independent_set, lambda_c
from src.oracle.exact import PartitionOracle, exact_distribution
from src.bp.fields import PhiFunction, VertexField
from src.bp.fixed_point import fixed_point_F, fixed_point_H, loopy_bp_marginals, solve_fixed_point_F
from src.bp.operators import alpha, uniqueness_margin, x_hat
from src.bp.phi import build_phi, check_jacobian_phi, find_delta_0, verify_phi_contraction
from src.dynamics.chain import ChainState, CoupledPair, run, run_coupled
from src.dynamics.statistics import HeavinessClassifier, s_stat, w_stat
from src.estimators.mixing import default_starts, mixing_time_exact, tv_curve
from src.estimators.replicates import run_replicates
from src.estimators.report import Report, mean_with_half_width, proportion_with_half_width
from src.oracle.exact import exact_glauber_kernel
from src.utils.logging import PerformanceLogger, get_experiment_logger, log_function_call

logger = get_experiment_logger("experiments")


def _omega_star(g: Graph, lam: float) -> Tuple[VertexField, str]:
    report = solve_fixed_point_F(g, lam)
    return report.fixed_point, report.method  # type: ignore[return-value]


def start_set(g: Graph, policy: str) -> IndependentSet:
    if policy == "empty":
        return IndependentSet.empty(g.vertex_count)
    if policy == "greedy":
        return greedy_maximal_independent_set(g)
    if policy == "side":
        colors = two_coloring(g)
        if colors is None:
            logger.warning("⚠️ Graph is not bipartite, using a greedy start instead of a side")
            return greedy_maximal_independent_set(g)
        return IndependentSet(colors == 0)
    raise DomainError(f"unknown start policy {policy!r}")


# === Uniformity ===

def _stationary_s_values(g: Graph, lam: float, v: int) -> Tuple[np.ndarray, np.ndarray]:
    """S_σ(v) for every σ ∈ Ω with its Gibbs probability."""
    table = exact_distribution(g, lam)
    occ = table.occupancy
    s = np.zeros(len(table), dtype=np.int64)
    for z in g.adjacency[v]:
        others = [u for u in g.adjacency[z] if u != v]
        s += ~occ[:, others].any(axis=1) if others else np.ones(len(table), dtype=bool)
    return s, table.probabilities


def _uniformity_replicate(payload: Dict[str, Any], seed: np.random.SeedSequence) -> Dict[str, Any]:
    g: Graph = payload["graph"]
    phi = payload["phi"]
    v = payload["vertex"]
    state = ChainState(g, payload["lam"], start_set(g, payload["start_policy"]).occupied, seed=seed)
    run(state, payload["burn_in"])
    s_sample = s_stat(g, state.occupied, v)
    max_w = w_stat(g, state.occupied, v, phi)
    for _ in range(payload["window"] // payload["every"]):
        run(state, payload["every"])
        max_w = max(max_w, w_stat(g, state.occupied, v, phi))
    return {"s_sample": s_sample, "max_w": max_w, "held": bool(max_w < payload["w_bound"])}


@log_function_call
def uniformity_experiment(
    g: Graph,
    lam: float,
    v: int,
    eps: float,
    burn_in: int,
    window: int,
    replicates: int,
    seed: int,
    every: int = 1,
    start_policy: str = "empty",
    confidence: float = 0.95,
    jobs: int = 1,
) -> Report:
    """Stationary S-concentration and windowed W upper bound at v.

    (a) fraction of μ-mass with |S_X(v) − Σ_{z∈N(v)} ω*(z)| ≤ εΔ, exact when Ω is small
    enough to enumerate, otherwise from the replicate chains after burn-in;
    (b) fraction of replicates whose W_{X_t}(v) stays below Σ ω*(z)Φ(z) + εΔ over the window.
    """
    if not 0 <= v < g.vertex_count:
        raise DomainError(f"vertex {v} out of range")
    omega, fixed_point_method = _omega_star(g, lam)
    phi = build_phi(g, lam, omega)
    neighbors = list(g.adjacency[v])
    slack = eps * g.max_degree
    s_target = float(omega.values[neighbors].sum())
    w_target = float((omega.values[neighbors] * phi.values[neighbors]).sum())

    payload = {
        "graph": g, "lam": lam, "vertex": v, "phi": phi.values, "w_bound": w_target + slack,
        "burn_in": burn_in, "window": window, "every": max(every, 1), "start_policy": start_policy,
    }
    with PerformanceLogger("uniformity_experiment", logger) as perf:
        results = run_replicates(_uniformity_replicate, payload, seed, "uniformity", replicates, jobs)
        if g.vertex_count <= settings.oracle_enumeration_cap:
            s_values, probs = _stationary_s_values(g, lam, v)
            stationary = float(probs[np.abs(s_values - s_target) <= slack].sum())
            stationary_hw, method = 0.0, "exact"
        else:
            ok = sum(abs(r["s_sample"] - s_target) <= slack for r in results)
            stationary, stationary_hw = proportion_with_half_width(ok, replicates, confidence)
            method = "sampled"
        held = sum(r["held"] for r in results)
        dynamic, dynamic_hw = proportion_with_half_width(held, replicates, confidence)

    report = Report(
        experiment_id="uniformity",
        inputs={"n": g.vertex_count, "max_degree": g.max_degree, "lambda": lam, "vertex": v, "eps": eps,
                "burn_in": burn_in, "window": window, "every": every, "replicates": replicates, "seed": seed,
                "start_policy": start_policy, "fixed_point_method": fixed_point_method},
        wall_clock_seconds=perf.elapsed,
        rows=[{"replicate": i, **r} for i, r in enumerate(results)],
    )
    report.add_metric("stationary_fraction", stationary, half_width=stationary_hw, replicates=replicates, seed=seed, method=method)
    report.add_metric("dynamic_fraction", dynamic, half_width=dynamic_hw, replicates=replicates, seed=seed, method="sampled")
    report.add_metric("s_target", s_target, seed=seed)
    report.add_metric("w_bound", w_target + slack, seed=seed)
    return report


# === BP accuracy ===

@log_function_call
def bp_accuracy(g: Graph, lam: float, t: int) -> Report:
    """BP marginals after t rounds against the oracle.

    max_edge_ratio_error is max over oriented edges of |q^t(v,p)/μ(v occ | p unocc) − 1|;
    vertex errors compare the parented belief and the unrooted q̃^t with μ(v occ).
    """
    with PerformanceLogger("bp_accuracy", logger) as perf:
        oracle = PartitionOracle(g, lam)
        parented = loopy_bp_marginals(g, lam, t, "parented")
        unrooted = loopy_bp_marginals(g, lam, t, "unrooted")
        marginals = np.array([oracle.marginal(v) for v in range(g.vertex_count)])
        conditionals = np.array([
            oracle.conditional_marginal(int(v), int(p)) for v, p in zip(g.slot_rows, g.indices)
        ])
    assert parented.edge_q is not None
    edge_err = np.abs(parented.edge_q / conditionals - 1.0)
    vertex_err = np.abs(parented.vertex_q / marginals - 1.0)
    unrooted_err = np.abs(unrooted.vertex_q / marginals - 1.0)

    report = Report(
        experiment_id="bp_accuracy",
        inputs={"n": g.vertex_count, "max_degree": g.max_degree, "lambda": lam, "t": t},
        wall_clock_seconds=perf.elapsed,
        rows=[
            {"v": int(v), "p": int(p), "q_t": float(q), "conditional": float(c), "ratio_error": float(e)}
            for v, p, q, c, e in zip(g.slot_rows, g.indices, parented.edge_q, conditionals, edge_err)
        ],
    )
    report.add_metric("max_edge_ratio_error", float(edge_err.max(initial=0.0)), method="exact")
    report.add_metric("max_vertex_ratio_error", float(vertex_err.max(initial=0.0)), method="exact")
    report.add_metric("max_unrooted_ratio_error", float(unrooted_err.max(initial=0.0)), method="exact")
    return report


# === Coupling contraction ===

def _adjacent_pair(
    g: Graph, lam: float, policy: str, vertex: Optional[int], burn_in: int, rng: np.random.Generator, seed: np.random.SeedSequence
) -> Tuple[np.ndarray, np.ndarray, int]:
    """X0 and Y0 = X0 ⊕ {u} for a vertex u that can be toggled in X0."""
    if policy == "burn_in":
        state = ChainState(g, lam, seed=seed)
        run(state, burn_in)
        x0 = state.occupied.copy()
    else:
        x0 = np.zeros(g.vertex_count, dtype=bool)
    if policy == "coalesced":
        return x0, x0.copy(), -1

    blocked = np.bincount(g.slot_rows, weights=x0[g.indices].astype(np.float64), minlength=g.vertex_count) > 0
    togglable = x0 | ~blocked
    if vertex is not None and togglable[vertex]:
        u = int(vertex)
    else:
        u = int(rng.choice(np.flatnonzero(togglable)))
    y0 = x0.copy()
    y0[u] = not y0[u]
    return x0, y0, u


def _coupling_replicate(payload: Dict[str, Any], seed: np.random.SeedSequence) -> Dict[str, Any]:
    g: Graph = payload["graph"]
    start_seed, pair_seed, pick_seed = seed.spawn(3)
    x0, y0, u = _adjacent_pair(
        g, payload["lam"], payload["start_policy"], payload["vertex"], payload["burn_in"],
        np.random.default_rng(pick_seed), start_seed,
    )
    pair = CoupledPair.from_sets(g, payload["lam"], x0, y0, seed=pair_seed, weights=payload["phi"])
    start_weighted = float(pair.distance[1])
    trace = run_coupled(pair, payload["steps"], trace=payload["trace"])
    out: Dict[str, Any] = {
        "start_vertex": u,
        "hamming": float(pair.distance[0]),
        "weighted": float(pair.distance[1]),
        "start_weighted": start_weighted,
        "ever_disagreed": int(pair.ever.sum()),
    }
    if trace is not None:
        out["trace"] = trace[payload["every"] - 1::payload["every"]]
    return out


@log_function_call
def coupling_contraction(
    g: Graph,
    lam: float,
    steps: int,
    replicates: int,
    seed: int,
    start_policy: str = "burn_in",
    phi: Optional[PhiFunction] = None,
    vertex: Optional[int] = None,
    burn_in: int = 0,
    trace: bool = False,
    every: int = 1,
    confidence: float = 0.95,
    jobs: int = 1,
) -> Report:
    """E[H(X_T, Y_T)] and E[𝒟(X_T, Y_T)] for coupled chains started one vertex apart.

    Φ defaults to the one built from the F fixed point. With trace, the mean weighted
    distance every ``every`` steps goes into the report series.
    """
    if start_policy not in ("empty", "burn_in", "coalesced"):
        raise DomainError(f"unknown start policy {start_policy!r}")
    fixed_point_method = None
    if phi is None:
        omega, fixed_point_method = _omega_star(g, lam)
        phi = build_phi(g, lam, omega)
    payload = {
        "graph": g, "lam": lam, "phi": phi.values, "steps": steps, "start_policy": start_policy,
        "vertex": vertex, "burn_in": burn_in, "trace": trace, "every": max(every, 1),
    }
    with PerformanceLogger("coupling_contraction", logger) as perf:
        results = run_replicates(_coupling_replicate, payload, seed, "coupling", replicates, jobs)

    hamming = [r["hamming"] for r in results]
    weighted = [r["weighted"] for r in results]
    increments = [(r["weighted"] - r["start_weighted"]) / steps for r in results] if steps else [0.0] * replicates
    report = Report(
        experiment_id="coupling_contraction",
        inputs={"n": g.vertex_count, "max_degree": g.max_degree, "lambda": lam, "steps": steps,
                "replicates": replicates, "seed": seed, "start_policy": start_policy, "burn_in": burn_in,
                "fixed_point_method": fixed_point_method},
        wall_clock_seconds=perf.elapsed,
        rows=[{"replicate": i, **{k: val for k, val in r.items() if k != "trace"}} for i, r in enumerate(results)],
    )
    for name, values in (("mean_hamming", hamming), ("mean_weighted", weighted), ("mean_increment_per_step", increments)):
        estimate, hw = mean_with_half_width(values, confidence)
        report.add_metric(name, estimate, half_width=hw, replicates=replicates, seed=seed, method="sampled")
    coalesced, coalesced_hw = proportion_with_half_width(sum(h == 0 for h in hamming), replicates, confidence)
    report.add_metric("coalesced_fraction", coalesced, half_width=coalesced_hw, replicates=replicates, seed=seed, method="sampled")
    if trace:
        stacked = np.vstack([r["trace"] for r in results])
        report.series["step"] = [float(s) for s in range(every, steps + 1, every)]
        report.series["mean_weighted"] = stacked.mean(axis=0).tolist()
    return report


# === Burn-in suspicion ===

def bucket_times(horizon: int, buckets: int) -> List[int]:
    return sorted({int(round(k * horizon / buckets)) for k in range(buckets + 1)})


def _burn_in_replicate(payload: Dict[str, Any], seed: np.random.SeedSequence) -> List[bool]:
    g: Graph = payload["graph"]
    classifier = HeavinessClassifier(g, payload["rho"])
    state = ChainState(g, payload["lam"], payload["start"], seed=seed)
    flags = []
    previous = 0
    for t in payload["times"]:
        run(state, t - previous)
        previous = t
        flags.append(classifier.above_suspicion(state.occupied, payload["vertex"], payload["radius"]))
    return flags


@log_function_call
def burn_in_probe(
    g: Graph,
    lam: float,
    v: int,
    rho: float,
    r: Optional[int],
    horizon: Optional[int],
    replicates: int,
    seed: int,
    buckets: int = 10,
    start_policy: str = "greedy",
    confidence: float = 0.95,
    jobs: int = 1,
) -> Report:
    """Per time bucket, the fraction of replicates whose X_t is ρ-above suspicion for radius r at v.

    Radius defaults to ⌊Δ^0.9⌋. The horizon defaults to ⌈10·n·ln Δ⌉; the far end of the
    theoretical burn-in interval is out of reach and is not simulated.
    """
    d = g.max_degree
    if d < 3:
        raise DomainError(f"burn-in needs max degree >= 3, got {d}")
    radius = int(d ** 0.9) if r is None else r
    horizon = math.ceil(10 * g.vertex_count * math.log(d)) if horizon is None else horizon
    times = bucket_times(horizon, buckets)
    start = start_set(g, start_policy)
    payload = {"graph": g, "lam": lam, "rho": rho, "radius": radius, "vertex": v, "times": times, "start": start.occupied}

    with PerformanceLogger("burn_in_probe", logger) as perf:
        flags = np.array(run_replicates(_burn_in_replicate, payload, seed, "burn-in", replicates, jobs), dtype=bool)

    fractions = flags.mean(axis=0)
    report = Report(
        experiment_id="burn_in_probe",
        inputs={"n": g.vertex_count, "max_degree": d, "lambda": lam, "vertex": v, "rho": rho, "radius": radius,
                "horizon": horizon, "buckets": buckets, "replicates": replicates, "seed": seed,
                "start_policy": start_policy, "start_size": start.size},
        wall_clock_seconds=perf.elapsed,
        series={"t": [float(t) for t in times], "above_suspicion_fraction": fractions.tolist()},
        rows=[
            {"replicate": i, "t": t, "above_suspicion": bool(flags[i, k])}
            for i in range(replicates) for k, t in enumerate(times)
        ],
    )
    for name, k in (("fraction_at_start", 0), ("fraction_at_horizon", len(times) - 1)):
        estimate, hw = proportion_with_half_width(int(flags[:, k].sum()), replicates, confidence)
        report.add_metric(name, estimate, half_width=hw, replicates=replicates, seed=seed, method="sampled")
    return report


# === G versus G*_w ===

def _oriented_replicate(payload: Dict[str, Any], seed: np.random.SeedSequence) -> Dict[str, Any]:
    g: Graph = payload["graph"]
    start = payload["start"]
    pair = CoupledPair.from_sets(g, payload["lam"], start, start.copy(), seed=seed, y_view=payload["view"])
    run_coupled(pair, payload["steps"])
    outside = ~payload["inside"]
    return {
        "final_outside": int((pair.disagree & outside).sum()),
        "ever_outside": int((pair.ever & outside).sum()),
        "final_total": int(pair.disagree.sum()),
    }


@log_function_call
def oriented_comparison(
    g: Graph,
    lam: float,
    w: int,
    r: int,
    steps: int,
    replicates: int,
    seed: int,
    start_policy: str = "empty",
    confidence: float = 0.95,
    jobs: int = 1,
) -> Report:
    """Run X_t on G and X*_t on G*_w from one start with shared updates; count disagreements outside B_r(w)."""
    view = oriented_view(g, w)
    inside = np.zeros(g.vertex_count, dtype=bool)
    inside[sorted(ball(g, w, r))] = True
    payload = {"graph": g, "lam": lam, "view": view, "steps": steps, "inside": inside,
               "start": start_set(g, start_policy).occupied}
    with PerformanceLogger("oriented_comparison", logger) as perf:
        results = run_replicates(_oriented_replicate, payload, seed, "oriented", replicates, jobs)

    report = Report(
        experiment_id="oriented_comparison",
        inputs={"n": g.vertex_count, "lambda": lam, "w": w, "r": r, "steps": steps, "replicates": replicates,
                "seed": seed, "oriented_edges": len(view.oriented_edges)},
        wall_clock_seconds=perf.elapsed,
        rows=[{"replicate": i, **res} for i, res in enumerate(results)],
    )
    leaked = sum(res["ever_outside"] > 0 for res in results)
    estimate, hw = proportion_with_half_width(leaked, replicates, confidence)
    report.add_metric("outside_disagreement_fraction", estimate, half_width=hw, replicates=replicates, seed=seed, method="sampled")
    estimate, hw = mean_with_half_width([res["final_outside"] for res in results], confidence)
    report.add_metric("mean_final_outside", estimate, half_width=hw, replicates=replicates, seed=seed, method="sampled")
    return report


# === Deterministic tables ===

def uniqueness_scan(delta: float, degrees: Sequence[int], ratio: Optional[float] = None) -> Report:
    """α(λ,Δ) and the uniqueness margin at λ = ratio·λ_c(Δ) (ratio defaults to 1−δ)."""
    ratio = 1.0 - delta if ratio is None else ratio
    rows = []
    for d in degrees:
        lam_c = lambda_c(d)
        lam = ratio * lam_c
        rows.append({
            "max_degree": int(d), "lambda_c": lam_c, "lambda": lam, "x_hat": x_hat(lam, d),
            "alpha": alpha(lam, d), "margin": uniqueness_margin(lam, d, delta),
        })
    report = Report(experiment_id="uniqueness_scan", inputs={"delta": delta, "ratio": ratio, "degrees": list(map(int, degrees))}, rows=rows)
    if degrees:
        report.add_metric("delta_0", find_delta_0(delta, ratio, max(degrees)), method="computed")
        report.add_metric("min_margin", min(row["margin"] for row in rows), method="computed")
    return report


def fixed_point_experiment(g: Graph, lam: float, operator: str = "F", delta: float = 0.2,
                           tol: Optional[float] = None, max_iter: Optional[int] = None) -> Report:
    """Residual trace of F or H against the geometric reference envelope."""
    iterate = fixed_point_F if operator == "F" else fixed_point_H
    fp = iterate(g, lam, tol=tol, max_iter=max_iter, raise_on_failure=False)
    report = Report(
        experiment_id="fixpoint",
        inputs={"n": g.vertex_count, "max_degree": g.max_degree, "lambda": lam, "operator": operator, "delta": delta},
        series={
            "residual": fp.residuals.tolist(),
            "envelope": fp.geometric_envelope(delta, fp.iterations).tolist(),
        },
        passed=fp.converged,
    )
    report.add_metric("iterations", float(fp.iterations))
    report.add_metric("final_residual", fp.final_residual)
    report.add_metric("observed_rate", fp.observed_rate)
    if g.max_degree >= 1:
        report.add_metric("alpha", alpha(lam, g.max_degree))
    return report


def phi_experiment(g: Graph, lam: float, delta: float) -> Report:
    """Build Φ from ω* and check both contraction forms."""
    fp = solve_fixed_point_F(g, lam)
    omega = fp.fixed_point
    assert isinstance(omega, VertexField)
    phi = build_phi(g, lam, omega, delta)
    contraction = verify_phi_contraction(g, lam, omega, phi, delta)
    jacobian = check_jacobian_phi(g, lam, omega, phi, delta)
    report = Report(
        experiment_id="phi",
        inputs={"n": g.vertex_count, "max_degree": g.max_degree, "lambda": lam, "delta": delta},
        thresholds={"max_ratio.max": contraction.threshold, "max_jacobian_excess.max": 1e-10},
        rows=[{"v": v, "omega_star": float(omega.values[v]), "phi": float(phi.values[v]), "ratio": float(contraction.ratios[v])}
              for v in range(g.vertex_count)],
    )
    report.add_metric("max_ratio", contraction.max_ratio)
    report.add_metric("max_jacobian_excess", jacobian.max_excess)
    report.add_metric("phi_max", float(phi.values.max(initial=1.0)))
    report.add_metric("certified", float(phi.certified))
    if g.max_degree >= 3:
        report.add_metric("uniqueness_margin", uniqueness_margin(lam, g.max_degree, delta))
    report.evaluate()
    return report


def mixing_experiment(g: Graph, lam: float, eps: float, t_max: int = 200) -> Report:
    """Exact T_mix(ε) with the TV curves from ∅ and the default worst-case starts."""
    kernel = exact_glauber_kernel(g, lam)
    t_mix = mixing_time_exact(g, lam, eps, kernel=kernel)
    report = Report(
        experiment_id="mix",
        inputs={"n": g.vertex_count, "lambda": lam, "eps": eps, "t_max": t_max},
        series={"t": [float(t) for t in range(t_max + 1)]},
    )
    for start in default_starts(g):
        report.series[f"tv_from_{start.mask}"] = tv_curve(kernel, start, t_max).tolist()
    report.add_metric("t_mix", float(t_mix), method="exact")
    report.add_metric("states", float(len(kernel.table)), method="exact")
    return report
