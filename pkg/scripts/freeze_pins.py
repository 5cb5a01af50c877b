#!/usr/bin/env python3
"""
Re-measure the regression pins in tests/data/regression_pins.json with this package.

    python scripts/freeze_pins.py            # print fresh measurements next to the frozen values
    python scripts/freeze_pins.py --write    # overwrite the frozen values
    python scripts/freeze_pins.py --jobs 8   # worker processes for the replicate-heavy pins
"""
import argparse
import json
import os
import sys
from pathlib import Path
from typing import Callable, Dict

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.estimators.experiments import bp_accuracy, coupling_contraction, uniformity_experiment
from src.graph.generators import named_graph, random_regular
from src.model.hardcore import lambda_c
from src.utils.logging import get_logger

logger = get_logger("freeze_pins")

PINS_PATH = Path(__file__).resolve().parent.parent / "tests" / "data" / "regression_pins.json"


def heawood_accuracy(jobs: int) -> Dict[str, float]:
    report = bp_accuracy(named_graph("heawood"), 0.5 * lambda_c(3), 100)
    return {name: report.metrics[name].estimate for name in ("max_edge_ratio_error", "max_vertex_ratio_error", "max_unrooted_ratio_error")}


def heawood_uniformity(jobs: int) -> Dict[str, float]:
    report = uniformity_experiment(named_graph("heawood"), 0.5 * lambda_c(3), 0, eps=0.3, burn_in=500, window=14,
                                   replicates=100_000, seed=0, every=1, start_policy="empty", jobs=jobs)
    return {name: report.metrics[name].estimate for name in ("stationary_fraction", "dynamic_fraction")}


def coupling_hamming(jobs: int) -> Dict[str, float]:
    g = random_regular(2000, 12, seed=7)
    report = coupling_contraction(g, 0.7 * lambda_c(12), steps=10 * g.vertex_count, replicates=200_000, seed=0,
                                  start_policy="burn_in", burn_in=20_000, jobs=jobs)
    return {"mean_hamming": report.metrics["mean_hamming"].estimate}


MEASUREMENTS: Dict[str, Callable[[int], Dict[str, float]]] = {
    "bp.heawood_accuracy": heawood_accuracy,
    "estimators.heawood_uniformity": heawood_uniformity,
    "estimators.coupling_hamming_12_regular": coupling_hamming,
}


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--write", action="store_true", help="overwrite the frozen values with the new measurements")
    parser.add_argument("--jobs", type=int, default=1, help="replicate worker processes")
    parser.add_argument("--only", choices=sorted(MEASUREMENTS), help="measure a single pin")
    args = parser.parse_args()

    pins = json.loads(PINS_PATH.read_text(encoding="utf-8"))
    for name, measure in MEASUREMENTS.items():
        if args.only and name != args.only:
            continue
        pin = pins.setdefault(name, {"rel": 0.1, "metrics": {}})
        measured = measure(args.jobs)
        for metric, value in measured.items():
            frozen = pin["metrics"].get(metric)
            drift = None if not frozen else value / frozen - 1.0
            logger.info("📌 Pin measured", pin=name, metric=metric, value=value, frozen=frozen, drift=drift)
        if args.write:
            pin["metrics"].update(measured)

    if args.write:
        PINS_PATH.write_text(json.dumps(pins, indent=2) + "\n", encoding="utf-8")
        logger.info("✅ Pins written", path=str(PINS_PATH))
    return 0


if __name__ == "__main__":
    sys.exit(main())
