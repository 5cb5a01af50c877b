"""
Hard-core model parameters, critical fugacity and independent sets.
"""
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence

import numpy as np

from src.config import settings
from src.errors import DomainError, IndependenceError, LengthMismatchError
from src.graph.core import Graph

# lambda_c switches from exact rationals to log-space above this degree
_EXACT_LAMBDA_C_MAX_DEGREE = 64


def log_lambda_c(max_degree: int) -> float:
    d = int(max_degree)
    if d < 3:
        raise DomainError(f"lambda_c needs max degree >= 3, got {max_degree}")
    return (d - 1) * math.log(d - 1) - d * math.log(d - 2)


def lambda_c(max_degree: int) -> float:
    """(Δ-1)^(Δ-1) / (Δ-2)^Δ."""
    d = int(max_degree)
    if d < 3:
        raise DomainError(f"lambda_c needs max degree >= 3, got {max_degree}")
    if d <= _EXACT_LAMBDA_C_MAX_DEGREE:
        return float(Fraction((d - 1) ** (d - 1), (d - 2) ** d))
    return math.exp(log_lambda_c(d))


def lambda_from_ratio(ratio: float, max_degree: int) -> float:
    if ratio <= 0:
        raise DomainError(f"lambda ratio must be positive, got {ratio}")
    return ratio * lambda_c(max_degree)


@dataclass(frozen=True)
class ModelParams:
    """Fugacity plus the slack δ; the below-threshold flag is recorded, never assumed."""

    lam: float
    delta: float = 0.2
    max_degree: Optional[int] = None
    below_threshold: Optional[bool] = None

    def __post_init__(self) -> None:
        if not self.lam > 0:
            raise DomainError(f"lambda must be positive, got {self.lam}")
        if not 0 < self.delta < 1:
            raise DomainError(f"delta must lie in (0, 1), got {self.delta}")

    @classmethod
    def for_graph(
        cls,
        g: Graph,
        lam: Optional[float] = None,
        ratio: Optional[float] = None,
        delta: Optional[float] = None,
    ) -> "ModelParams":
        """Resolve λ (absolute XOR ratio of λ_c(Δ)) against a graph."""
        if (lam is None) == (ratio is None):
            raise DomainError("give exactly one of lambda and lambda ratio")
        delta = settings.default_delta if delta is None else delta
        d = g.max_degree
        if ratio is not None:
            lam = lambda_from_ratio(ratio, d)
        assert lam is not None
        below = lam <= (1 - delta) * lambda_c(d) if d >= 3 else None
        return cls(lam=lam, delta=delta, max_degree=d, below_threshold=below)

    @property
    def occupy_probability(self) -> float:
        return self.lam / (1 + self.lam)


class IndependentSet:
    """Fixed-length boolean occupancy; independence is checked against a graph on demand."""

    __slots__ = ("occupied",)

    def __init__(self, occupied: Sequence[bool] | np.ndarray):
        arr = np.array(occupied, dtype=bool)
        arr.setflags(write=False)
        self.occupied = arr

    @classmethod
    def empty(cls, vertex_count: int) -> "IndependentSet":
        return cls(np.zeros(vertex_count, dtype=bool))

    @classmethod
    def from_vertices(cls, vertex_count: int, vertices: Iterable[int]) -> "IndependentSet":
        arr = np.zeros(vertex_count, dtype=bool)
        arr[list(vertices)] = True
        return cls(arr)

    @classmethod
    def from_mask(cls, vertex_count: int, mask: int) -> "IndependentSet":
        return cls([(mask >> v) & 1 == 1 for v in range(vertex_count)])

    @classmethod
    def validated(cls, g: Graph, occupied: Sequence[bool] | np.ndarray) -> "IndependentSet":
        sigma = cls(occupied)
        if not is_independent(g, sigma.occupied):
            raise IndependenceError("occupancy has two adjacent occupied vertices")
        return sigma

    @property
    def vertex_count(self) -> int:
        return int(self.occupied.size)

    @property
    def size(self) -> int:
        return int(self.occupied.sum())

    @property
    def mask(self) -> int:
        return sum(1 << int(v) for v in np.flatnonzero(self.occupied))

    def vertices(self) -> List[int]:
        return [int(v) for v in np.flatnonzero(self.occupied)]

    def __contains__(self, v: int) -> bool:
        return bool(self.occupied[v])

    def __eq__(self, other: object) -> bool:
        return isinstance(other, IndependentSet) and np.array_equal(self.occupied, other.occupied)

    def __hash__(self) -> int:
        return hash((self.vertex_count, self.occupied.tobytes()))

    def __repr__(self) -> str:
        return f"IndependentSet({self.vertices()})"


def weight(sigma: IndependentSet, lam: float) -> float:
    """λ^|σ|."""
    return float(lam ** sigma.size)


def log_weight(sigma: IndependentSet, lam: float) -> float:
    return sigma.size * math.log(lam)


def is_independent(g: Graph, occupied: Sequence[bool] | np.ndarray) -> bool:
    occ = np.asarray(occupied, dtype=bool)
    if occ.shape != (g.vertex_count,):
        raise LengthMismatchError(f"occupancy has length {occ.size}, graph has {g.vertex_count} vertices")
    return not bool(np.any(occ[g.slot_rows] & occ[g.indices]))


def greedy_maximal_independent_set(g: Graph, order: Optional[Iterable[int]] = None) -> IndependentSet:
    """Scan vertices in order, occupying every vertex with no occupied neighbor."""
    occ = np.zeros(g.vertex_count, dtype=bool)
    for v in range(g.vertex_count) if order is None else order:
        if not any(occ[u] for u in g.adjacency[v]):
            occ[v] = True
    return IndependentSet(occ)
