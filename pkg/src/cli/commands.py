"""
One handler per subcommand. Handlers return a Report, or None when they wrote their
own output (edge lists, sample streams).
"""
import math
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional, TextIO

import numpy as np

from src.errors import ConfigError
from src.graph.core import Graph
from src.graph.io import save_edge_list
from src.graph.structure import girth, short_cycle_profile
from src.model.hardcore import IndependentSet
from src.oracle.exact import exact_partition
from src.bp.fixed_point import loopy_bp_marginals
from src.dynamics.chain import ChainState, continuous_run, run
from src.estimators.config import ExperimentConfig
from src.estimators.experiments import (
    bp_accuracy,
    burn_in_probe,
    coupling_contraction,
    fixed_point_experiment,
    mixing_experiment,
    oriented_comparison,
    phi_experiment,
    start_set,
    uniformity_experiment,
    uniqueness_scan,
)
from src.estimators.partition import estimate_Z
from src.estimators.report import Report
from src.estimators.suites import run_suite
from src.utils.logging import get_cli_logger
from src.utils.rng import seed_sequence

logger = get_cli_logger()

Handler = Callable[[ExperimentConfig, int], Optional[Report]]


def _lam(config: ExperimentConfig, g: Graph) -> float:
    return config.model_params(g).lam


def _write_text(text: str, path: Optional[str]) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def cmd_gen(config: ExperimentConfig, root_seed: int) -> None:
    g = config.build_graph(root_seed)
    _write_text(save_edge_list(g), config.out)
    logger.info("✅ Graph written", n=g.vertex_count, edges=g.edge_count, out=config.out or "stdout")


def cmd_girth(config: ExperimentConfig, root_seed: int) -> Report:
    g = config.build_graph(root_seed)
    value = girth(g)
    report = Report(
        experiment_id="girth",
        series={"degree_histogram": np.bincount(g.degrees, minlength=g.max_degree + 1).astype(float).tolist()},
    )
    report.add_metric("girth", None if math.isinf(value) else float(value), method="exact")
    report.add_metric("vertices", float(g.vertex_count), method="exact")
    report.add_metric("edges", float(g.edge_count), method="exact")
    report.add_metric("max_degree", float(g.max_degree), method="exact")
    if config.g_max is not None:
        profile = short_cycle_profile(g, config.g_max)
        report.rows = [{"v": v, "short_cycles": int(c)} for v, c in enumerate(profile)]
        report.add_metric("max_short_cycles", float(profile.max(initial=0)), method="exact")
    return report


def cmd_bp(config: ExperimentConfig, root_seed: int) -> Report:
    g = config.build_graph(root_seed)
    lam = _lam(config, g)
    if config.check_exact:
        return bp_accuracy(g, lam, config.iterations)
    marginals = loopy_bp_marginals(g, lam, config.iterations, config.mode)
    report = Report(
        experiment_id="bp",
        rows=[{"v": v, "q": float(q)} for v, q in enumerate(marginals.vertex_q)],
    )
    report.add_metric("mean_q", float(marginals.vertex_q.mean()) if g.vertex_count else None)
    report.add_metric("max_q", float(marginals.vertex_q.max(initial=0.0)))
    return report


def cmd_fixpoint(config: ExperimentConfig, root_seed: int) -> Report:
    g = config.build_graph(root_seed)
    return fixed_point_experiment(g, _lam(config, g), config.operator, config.delta)


def cmd_phi(config: ExperimentConfig, root_seed: int) -> Report:
    g = config.build_graph(root_seed)
    return phi_experiment(g, _lam(config, g), config.delta)


def stream_samples(config: ExperimentConfig, g: Graph, lam: float, root_seed: int, out: TextIO) -> int:
    """Write one snapshot line per checkpoint; returns the number of lines."""
    policy = config.start_policy or "empty"
    start = start_set(g, policy) if policy in ("empty", "greedy", "side") else IndependentSet.empty(g.vertex_count)
    state = ChainState.from_set(g, lam, start, seed=seed_sequence(root_seed, "sample"))
    run(state, config.burn_in)
    lines = 0
    if config.continuous:
        if config.duration is None:
            raise ConfigError("duration: --continuous needs --duration")
        for _ in range(int(config.duration // config.every)):
            continuous_run(state, float(config.every))
            out.write(f"{state.clock:g} {state.snapshot()}\n")
            lines += 1
        return lines
    steps = g.vertex_count if config.steps is None else config.steps
    for _ in range(steps // config.every):
        run(state, config.every)
        out.write(state.snapshot() + "\n")
        lines += 1
    return lines


def cmd_sample(config: ExperimentConfig, root_seed: int) -> None:
    g = config.build_graph(root_seed)
    lam = _lam(config, g)
    if config.out is None:
        lines = stream_samples(config, g, lam, root_seed, sys.stdout)
    else:
        with open(config.out, "w", encoding="utf-8") as handle:
            lines = stream_samples(config, g, lam, root_seed, handle)
    logger.info("✅ Samples written", lines=lines, out=config.out or "stdout")


def cmd_mix(config: ExperimentConfig, root_seed: int) -> Report:
    g = config.build_graph(root_seed)
    return mixing_experiment(g, _lam(config, g), config.mix_eps, config.t_max)


def cmd_uniformity(config: ExperimentConfig, root_seed: int) -> Report:
    g = config.build_graph(root_seed)
    policy = config.start_policy if config.start_policy in ("empty", "greedy", "side") else "empty"
    return uniformity_experiment(
        g, _lam(config, g), config.vertex, config.eps, config.burn_in, config.window,
        config.replicates, root_seed, every=config.every, start_policy=policy,
        confidence=config.confidence, jobs=config.jobs,
    )


def cmd_contraction(config: ExperimentConfig, root_seed: int) -> Report:
    g = config.build_graph(root_seed)
    policy = config.start_policy if config.start_policy in ("empty", "burn_in", "coalesced") else "burn_in"
    steps = 10 * g.vertex_count if config.steps is None else config.steps
    return coupling_contraction(
        g, _lam(config, g), steps, config.replicates, root_seed, start_policy=policy,
        vertex=config.vertex if "vertex" in config.model_fields_set else None,
        burn_in=config.burn_in, trace=config.trace, every=config.every,
        confidence=config.confidence, jobs=config.jobs,
    )


def cmd_count(config: ExperimentConfig, root_seed: int) -> Report:
    g = config.build_graph(root_seed)
    lam = _lam(config, g)
    result = estimate_Z(g, lam, config.eps, config.confidence, seed=root_seed, jobs=config.jobs)
    report = result.to_report(inputs={"n": g.vertex_count, "lambda": lam, "eps": config.eps, "confidence": config.confidence, "seed": root_seed})
    if config.check_exact:
        truth = exact_partition(g, lam)
        report.add_metric("exact_z", truth, method="exact")
        report.add_metric("relative_error", result.relative_error(truth), seed=root_seed, method="sampled")
        report.thresholds.setdefault("relative_error.max", config.eps)
    return report


def cmd_burnin(config: ExperimentConfig, root_seed: int) -> Report:
    g = config.build_graph(root_seed)
    policy = config.start_policy if config.start_policy in ("empty", "greedy", "side") else "greedy"
    return burn_in_probe(
        g, _lam(config, g), config.vertex, config.rho, config.radius, config.horizon,
        config.replicates, root_seed, buckets=config.buckets, start_policy=policy,
        confidence=config.confidence, jobs=config.jobs,
    )


def cmd_verify(config: ExperimentConfig, root_seed: int) -> Report:
    return run_suite(config.suite, root_seed)


def cmd_scan(config: ExperimentConfig, root_seed: int) -> Report:
    return uniqueness_scan(config.delta, config.degrees, config.lambda_ratio)


def cmd_oriented(config: ExperimentConfig, root_seed: int) -> Report:
    g = config.build_graph(root_seed)
    steps = 10 * g.vertex_count if config.steps is None else config.steps
    radius = 3 if config.radius is None else config.radius
    return oriented_comparison(
        g, _lam(config, g), config.vertex, radius, steps, config.replicates, root_seed,
        confidence=config.confidence, jobs=config.jobs,
    )


HANDLERS: Dict[str, Handler] = {
    "gen": cmd_gen,
    "girth": cmd_girth,
    "bp": cmd_bp,
    "fixpoint": cmd_fixpoint,
    "phi": cmd_phi,
    "sample": cmd_sample,
    "mix": cmd_mix,
    "uniformity": cmd_uniformity,
    "contraction": cmd_contraction,
    "count": cmd_count,
    "burnin": cmd_burnin,
    "verify": cmd_verify,
    "scan": cmd_scan,
    "oriented": cmd_oriented,
}

# commands that run without a graph
GRAPHLESS: List[str] = ["verify", "scan"]
