"""
argparse surface: common flags shared by every subcommand plus per-command knobs.
"""
import argparse
from typing import Any, Dict, List, Optional

COMMANDS = (
    "gen", "girth", "bp", "fixpoint", "phi", "sample", "mix", "uniformity",
    "contraction", "count", "burnin", "verify", "scan", "oriented",
)

# flags that only steer the runner and never reach ExperimentConfig
RUNNER_KEYS = {"command", "config", "log_level", "log_json", "timing", "graph_path", "named", "n", "delta_reg", "kind", "graph_seed"}


def _degrees(text: str) -> List[int]:
    """'3:20' or '4,6,8'."""
    try:
        if ":" in text:
            lo, hi = (int(x) for x in text.split(":"))
            return list(range(lo, hi + 1))
        return [int(x) for x in text.split(",") if x]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected 'lo:hi' or a comma list, got {text!r}") from e


def _common() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    runner = common.add_argument_group("runner")
    runner.add_argument("--config", help="JSON experiment config; flags override its values")
    runner.add_argument("--seed", type=int, help="root seed (falls back to HARDCORE_LAB_SEED, then 0)")
    runner.add_argument("--out", help="output path (stdout when omitted)")
    runner.add_argument("--csv", help="per-replicate CSV rows")
    runner.add_argument("--jobs", type=int, help="parallel replicate workers")
    runner.add_argument("--log-level", help="DEBUG, INFO, WARNING or ERROR")
    runner.add_argument("--log-json", action="store_true", default=None, help="JSON log lines on stderr")
    runner.add_argument("--timing", action="store_true", help="include wall-clock in the JSON report")

    graph = common.add_argument_group("graph")
    graph.add_argument("--graph", dest="graph_path", help="edge-list file")
    graph.add_argument("--named", help="named graph, e.g. heawood, cycle:8, tree:20:3")
    graph.add_argument("--n", type=int, help="generator size (per side for bipartite_regular)")
    graph.add_argument("--delta-reg", type=int, help="generator degree")
    graph.add_argument("--kind", choices=("regular", "bipartite_regular", "tree"), help="generator kind (default regular)")
    graph.add_argument("--graph-seed", type=int, help="generator seed instead of one derived from --seed")

    model = common.add_argument_group("model")
    fugacity = model.add_mutually_exclusive_group()
    fugacity.add_argument("--lambda", dest="lambda", type=float, help="absolute fugacity")
    fugacity.add_argument("--lambda-ratio", type=float, help="fugacity as a fraction of lambda_c(max degree)")
    model.add_argument("--delta", type=float, help="slack delta (default 0.2)")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hardcore-lab",
        description="Hard-core model experiments: Glauber dynamics, loopy BP and exact oracles.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    common = _common()

    def add(name: str, help_text: str) -> argparse.ArgumentParser:
        return sub.add_parser(name, parents=[common], help=help_text, description=help_text)

    add("gen", "generate a graph and write its edge list")

    p = add("girth", "girth and short-cycle profile")
    p.add_argument("--g-max", type=int, help="count cycles shorter than this through every vertex")

    p = add("bp", "loopy BP marginals, against the exact oracle with --exact")
    p.add_argument("--iterations", type=int)
    p.add_argument("--mode", choices=("parented", "unrooted"))
    p.add_argument("--exact", dest="check_exact", action="store_true", default=None)

    p = add("fixpoint", "fixed-point iteration of F or H with its residual trace")
    p.add_argument("--operator", choices=("F", "H"))

    add("phi", "build and certify the path-coupling weights")

    p = add("sample", "stream Glauber snapshots ('step v1 v2 ...') to stdout or --out")
    p.add_argument("--steps", type=int)
    p.add_argument("--every", type=int)
    p.add_argument("--burn-in", type=int)
    p.add_argument("--continuous", action="store_true", default=None)
    p.add_argument("--duration", type=float)
    p.add_argument("--start-policy", choices=("empty", "greedy", "side"))

    p = add("mix", "exact mixing time and TV curves")
    p.add_argument("--mix-eps", type=float)
    p.add_argument("--t-max", type=int)

    p = add("uniformity", "stationary and windowed uniformity checks at one vertex")
    for flag, kind in (("--vertex", int), ("--eps", float), ("--burn-in", int), ("--window", int),
                       ("--replicates", int), ("--every", int), ("--confidence", float)):
        p.add_argument(flag, type=kind)
    p.add_argument("--start-policy", choices=("empty", "greedy", "side"))

    p = add("contraction", "coupled chains started one vertex apart")
    for flag, kind in (("--steps", int), ("--replicates", int), ("--burn-in", int), ("--vertex", int),
                       ("--every", int), ("--confidence", float)):
        p.add_argument(flag, type=kind)
    p.add_argument("--start-policy", choices=("empty", "burn_in", "coalesced"))
    p.add_argument("--trace", action="store_true", default=None)

    p = add("count", "partition-function estimate with a confidence interval")
    p.add_argument("--eps", type=float)
    p.add_argument("--confidence", type=float)
    p.add_argument("--exact", dest="check_exact", action="store_true", default=None)

    p = add("burnin", "above-suspicion fractions over time from a heavy start")
    for flag, kind in (("--vertex", int), ("--rho", float), ("--radius", int), ("--horizon", int),
                       ("--buckets", int), ("--replicates", int), ("--confidence", float)):
        p.add_argument(flag, type=kind)
    p.add_argument("--start-policy", choices=("empty", "greedy", "side"))

    p = add("verify", "run a verification suite")
    p.add_argument("--suite", choices=("oracle", "bp", "phi", "sampler", "count", "all"))

    p = add("scan", "alpha and uniqueness margins over a degree range")
    p.add_argument("--degrees", type=_degrees, help="'3:20' or '4,6,8'")

    p = add("oriented", "disagreements between G and the oriented view outside a ball")
    for flag, kind in (("--vertex", int), ("--radius", int), ("--steps", int), ("--replicates", int),
                       ("--confidence", float)):
        p.add_argument(flag, type=kind)
    return parser


def config_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    """Flag values that land in ExperimentConfig, with the graph source folded in."""
    values = vars(args)
    overrides = {k: v for k, v in values.items() if k not in RUNNER_KEYS and v is not None}
    graph = graph_override(args)
    if graph is not None:
        overrides["graph"] = graph
    return overrides


def graph_override(args: argparse.Namespace) -> Optional[Dict[str, Any]]:
    if getattr(args, "graph_path", None):
        return {"path": args.graph_path}
    if getattr(args, "named", None):
        return {"generator": {"kind": "named", "name": args.named}}
    if getattr(args, "n", None) is not None:
        kind = args.kind or "regular"
        spec: Dict[str, Any] = {"kind": kind, "n": args.n}
        if kind != "tree":
            spec["degree"] = args.delta_reg
        if args.graph_seed is not None:
            spec["seed"] = args.graph_seed
        return {"generator": spec}
    return None
