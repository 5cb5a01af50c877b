"""
Structured experiment results: JSON for machines, CSV for per-replicate rows.
"""
import math
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field
from scipy.stats import norm

REPORT_SCHEMA_VERSION = "1"


class Metric(BaseModel):
    """A point estimate with its confidence half-width, replicate count and seed."""

    estimate: Optional[float]
    half_width: Optional[float] = None
    replicates: int = 1
    seed: Optional[int] = None
    method: Literal["sampled", "exact", "computed"] = "computed"


class Report(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    schema_version: str = REPORT_SCHEMA_VERSION
    experiment_id: str
    inputs: Dict[str, Any] = Field(default_factory=dict)
    metrics: Dict[str, Metric] = Field(default_factory=dict)
    series: Dict[str, List[Optional[float]]] = Field(default_factory=dict)
    thresholds: Dict[str, float] = Field(default_factory=dict)
    passed: Optional[bool] = None
    wall_clock_seconds: Optional[float] = None
    rows: List[Dict[str, Any]] = Field(default_factory=list)

    def add_metric(self, name: str, estimate: Optional[float], **kwargs: Any) -> Metric:
        value = None if estimate is None or (isinstance(estimate, float) and math.isnan(estimate)) else float(estimate)
        metric = Metric(estimate=value, **kwargs)
        self.metrics[name] = metric
        return metric

    def evaluate(self) -> Optional[bool]:
        """Check every threshold; keys are ``<metric>.max`` or ``<metric>.min``."""
        if not self.thresholds:
            return self.passed
        passed = True
        for key, bound in self.thresholds.items():
            name, _, kind = key.rpartition(".")
            metric = self.metrics.get(name)
            if metric is None or metric.estimate is None:
                passed = False
            elif kind == "max":
                passed &= metric.estimate <= bound
            elif kind == "min":
                passed &= metric.estimate >= bound
            else:
                raise ValueError(f"threshold key {key!r} must end in .max or .min")
        self.passed = bool(passed)
        return self.passed

    def to_json(self, include_timing: bool = False) -> str:
        """Rows go to CSV; wall-clock is left out unless asked so reruns stay byte-identical."""
        exclude = {"rows"} if include_timing else {"rows", "wall_clock_seconds"}
        return self.model_dump_json(indent=2, exclude=exclude) + "\n"

    def write_json(self, path: Union[str, Path], include_timing: bool = False) -> None:
        Path(path).write_text(self.to_json(include_timing), encoding="utf-8")

    def to_frame(self) -> pd.DataFrame:
        if self.rows:
            return pd.DataFrame(self.rows)
        return pd.DataFrame(
            [{"metric": name, **metric.model_dump()} for name, metric in self.metrics.items()]
        )

    def to_csv(self, path: Optional[Union[str, Path]] = None) -> str:
        text = self.to_frame().to_csv(index=False, lineterminator="\n")
        if path is not None:
            Path(path).write_text(text, encoding="utf-8")
        return text


def mean_with_half_width(values: Union[List[float], np.ndarray], confidence: float = 0.95) -> tuple:
    """Sample mean and normal-approximation half-width."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        return float("nan"), float("nan")
    mean = float(arr.mean())
    if arr.size < 2:
        return mean, float("nan")
    z = float(norm.ppf(0.5 + confidence / 2))
    return mean, z * float(arr.std(ddof=1)) / math.sqrt(arr.size)


def proportion_with_half_width(successes: int, trials: int, confidence: float = 0.95) -> tuple:
    if trials == 0:
        return float("nan"), float("nan")
    p = successes / trials
    z = float(norm.ppf(0.5 + confidence / 2))
    return p, z * math.sqrt(p * (1 - p) / trials)
