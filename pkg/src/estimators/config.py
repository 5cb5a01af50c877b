"""
Declarative experiment configuration.
"""
from typing import Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.config import settings
from src.errors import ConfigError
from src.graph.core import Graph
from src.graph.generators import named_graph, random_regular, random_regular_bipartite, random_tree
from src.graph.io import read_graph
from src.model.hardcore import ModelParams
from src.utils.rng import seed_sequence


class GeneratorSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["regular", "bipartite_regular", "tree", "named"]
    n: Optional[int] = Field(default=None, ge=0, description="vertices (per side for bipartite_regular)")
    degree: Optional[int] = Field(default=None, ge=0)
    name: Optional[str] = None
    seed: Optional[int] = Field(default=None, description="overrides the stream derived from the root seed")

    @model_validator(mode="after")
    def _fields_for_kind(self) -> "GeneratorSpec":
        if self.kind == "named" and not self.name:
            raise ValueError("named generator needs 'name'")
        if self.kind in ("regular", "bipartite_regular") and (self.n is None or self.degree is None):
            raise ValueError(f"{self.kind} generator needs 'n' and 'degree'")
        if self.kind == "tree" and self.n is None:
            raise ValueError("tree generator needs 'n'")
        return self


class GraphSource(BaseModel):
    model_config = ConfigDict(extra="forbid")

    path: Optional[str] = None
    generator: Optional[GeneratorSpec] = None

    @model_validator(mode="after")
    def _exactly_one(self) -> "GraphSource":
        if (self.path is None) == (self.generator is None):
            raise ValueError("give exactly one of 'path' and 'generator'")
        return self


# where results go and how many workers run them; never part of a result
RUNNER_FIELDS = {"out", "csv", "jobs"}


class ExperimentConfig(BaseModel):
    """Everything an experiment run needs; unknown keys are schema errors."""

    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    graph: Optional[GraphSource] = None
    lam: Optional[float] = Field(default=None, alias="lambda", gt=0)
    lambda_ratio: Optional[float] = Field(default=None, gt=0)
    delta: float = Field(default_factory=lambda: settings.default_delta, gt=0, lt=1)
    eps: float = Field(default=0.05, gt=0)
    confidence: float = Field(default=0.95, gt=0, lt=1)
    replicates: int = Field(default=1, ge=1)
    burn_in: int = Field(default=0, ge=0)
    window: int = Field(default=0, ge=0)
    seed: Optional[int] = None
    out: Optional[str] = None
    csv: Optional[str] = None
    jobs: int = Field(default_factory=lambda: settings.jobs, ge=1)

    # experiment knobs
    vertex: int = Field(default=0, ge=0)
    iterations: int = Field(default=50, ge=1)
    mode: Literal["parented", "unrooted"] = "parented"
    operator: Literal["F", "H"] = "F"
    steps: Optional[int] = Field(default=None, ge=0)
    every: int = Field(default=1, ge=1)
    continuous: bool = False
    rho: float = Field(default=50.0, gt=0)
    radius: Optional[int] = Field(default=None, ge=0)
    horizon: Optional[int] = Field(default=None, ge=0)
    buckets: int = Field(default=10, ge=1)
    start_policy: Optional[Literal["empty", "burn_in", "coalesced", "greedy", "side"]] = None
    mix_eps: float = Field(default=0.25, gt=0, lt=1)
    t_max: int = Field(default=200, ge=0)
    g_max: Optional[int] = Field(default=None, ge=3)
    duration: Optional[float] = Field(default=None, ge=0)
    suite: Literal["oracle", "bp", "phi", "sampler", "count", "all"] = "all"
    degrees: List[int] = Field(default_factory=lambda: list(range(3, 21)))
    check_exact: bool = False
    trace: bool = False
    thresholds: Dict[str, float] = Field(default_factory=dict, description="'<metric>.max' or '<metric>.min' bounds")

    @model_validator(mode="after")
    def _lambda_exclusive(self) -> "ExperimentConfig":
        if self.lam is not None and self.lambda_ratio is not None:
            raise ValueError("'lambda' and 'lambda_ratio' are mutually exclusive")
        return self

    def echo(self) -> dict:
        """Inputs echo; reparses to an equal config up to the output and parallelism settings."""
        return self.model_dump(mode="json", by_alias=True, exclude_none=True, exclude=RUNNER_FIELDS)

    def build_graph(self, root_seed: int) -> Graph:
        if self.graph is None:
            raise ConfigError("graph: give --graph, --named, generator flags or a config 'graph' entry")
        return build_graph(self.graph, root_seed)

    def model_params(self, g: Graph) -> ModelParams:
        if self.lam is None and self.lambda_ratio is None:
            raise ConfigError("lambda: give 'lambda' or 'lambda_ratio'")
        return ModelParams.for_graph(g, lam=self.lam, ratio=self.lambda_ratio, delta=self.delta)


def build_graph(source: GraphSource, root_seed: int) -> Graph:
    """Read the file or run the generator; generator seeds derive from the root seed."""
    if source.path is not None:
        return read_graph(source.path)
    gen = source.generator
    assert gen is not None
    seed = gen.seed if gen.seed is not None else seed_sequence(root_seed, "graph")
    if gen.kind == "regular":
        return random_regular(gen.n or 0, gen.degree or 0, seed=seed)
    if gen.kind == "bipartite_regular":
        return random_regular_bipartite(gen.n or 0, gen.degree or 0, seed=seed)
    if gen.kind == "tree":
        return random_tree(gen.n or 0, seed=seed)
    return named_graph(gen.name or "")
