"""
Exact ground truth on small graphs.

Vertex subsets are Python int bitmasks. The deletion recursion
Z(S) = Z(S - v) + λ·Z(S - N[v]) is memoized on the remaining-vertex mask and splits
disconnected masks into components first.
"""
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Dict, Iterator, List, Optional, Tuple

import numpy as np
import scipy.sparse as sp

from src.config import settings
from src.errors import BudgetExceededError, DomainError, NotNeighborError
from src.graph.core import Graph
from src.model.hardcore import IndependentSet
from src.utils.logging import get_oracle_logger

logger = get_oracle_logger()

# int64 bitmasks for the vectorized tables
MAX_TABLE_VERTICES = 62


class PartitionOracle:
    """Memoized partition function of induced subgraphs of one graph."""

    def __init__(self, g: Graph, lam: float, subproblem_cap: Optional[int] = None):
        if not lam > 0:
            raise DomainError(f"lambda must be positive, got {lam}")
        self.graph = g
        self.lam = float(lam)
        self.log_lam = math.log(self.lam)
        self.subproblem_cap = subproblem_cap or settings.oracle_subproblem_cap
        self.full_mask = (1 << g.vertex_count) - 1
        self._neighbors = [sum(1 << u for u in g.adjacency[v]) for v in range(g.vertex_count)]
        self._closed = [m | (1 << v) for v, m in enumerate(self._neighbors)]
        self._memo: Dict[int, float] = {0: 1.0}
        self._log_memo: Dict[int, float] = {0: 0.0}

    @property
    def subproblems(self) -> int:
        return len(self._memo) + len(self._log_memo)

    # === Recursion ===

    def _components(self, mask: int) -> List[int]:
        comps = []
        rest = mask
        while rest:
            comp = frontier = rest & -rest
            while frontier:
                bit = frontier & -frontier
                frontier ^= bit
                new = self._neighbors[bit.bit_length() - 1] & rest & ~comp
                comp |= new
                frontier |= new
            comps.append(comp)
            rest &= ~comp
        return comps

    def _branch_vertex(self, mask: int) -> int:
        best, best_degree = -1, -1
        rest = mask
        while rest:
            bit = rest & -rest
            rest ^= bit
            v = bit.bit_length() - 1
            degree = (self._neighbors[v] & mask).bit_count()
            if degree > best_degree:
                best, best_degree = v, degree
        return best

    def _charge(self) -> None:
        if self.subproblems > self.subproblem_cap:
            raise BudgetExceededError(
                f"partition recursion passed {self.subproblem_cap} subproblems on n={self.graph.vertex_count}"
            )

    def _z(self, mask: int) -> float:
        cached = self._memo.get(mask)
        if cached is not None:
            return cached
        comps = self._components(mask)
        if len(comps) > 1:
            value = math.prod(self._z(c) for c in comps)
        else:
            v = self._branch_vertex(mask)
            value = self._z(mask & ~(1 << v)) + self.lam * self._z(mask & ~self._closed[v])
        self._memo[mask] = value
        self._charge()
        return value

    def _log_z(self, mask: int) -> float:
        cached = self._log_memo.get(mask)
        if cached is not None:
            return cached
        comps = self._components(mask)
        if len(comps) > 1:
            value = math.fsum(self._log_z(c) for c in comps)
        else:
            v = self._branch_vertex(mask)
            value = float(np.logaddexp(self._log_z(mask & ~(1 << v)), self.log_lam + self._log_z(mask & ~self._closed[v])))
        self._log_memo[mask] = value
        self._charge()
        return value

    # === Public queries ===

    def mask_of(self, vertices: Optional[List[int]] = None, without: Tuple[int, ...] = ()) -> int:
        mask = self.full_mask if vertices is None else sum(1 << v for v in vertices)
        for v in without:
            mask &= ~(1 << v)
        return mask

    def partition(self, mask: Optional[int] = None) -> float:
        return self._z(self.full_mask if mask is None else mask)

    def log_partition(self, mask: Optional[int] = None) -> float:
        return self._log_z(self.full_mask if mask is None else mask)

    def marginal(self, v: int, mask: Optional[int] = None) -> float:
        """μ(v occupied) on the subgraph induced by mask (default: whole graph)."""
        mask = self.full_mask if mask is None else mask
        if not (mask >> v) & 1:
            raise DomainError(f"vertex {v} is not in the subgraph")
        return self.lam * self._z(mask & ~self._closed[v]) / self._z(mask)

    def conditional_marginal(self, v: int, p: int) -> float:
        """μ(v occupied | p unoccupied) = marginal of v on G - p."""
        if not self.graph.has_edge(v, p):
            raise NotNeighborError(f"{p} is not a neighbor of {v}")
        return self.marginal(v, self.full_mask & ~(1 << p))


def exact_partition(g: Graph, lam: float, subproblem_cap: Optional[int] = None) -> float:
    with_oracle = PartitionOracle(g, lam, subproblem_cap)
    value = with_oracle.partition()
    logger.debug("Exact partition", n=g.vertex_count, lam=lam, subproblems=with_oracle.subproblems)
    return value


def exact_log_partition(g: Graph, lam: float, subproblem_cap: Optional[int] = None) -> float:
    return PartitionOracle(g, lam, subproblem_cap).log_partition()


def exact_marginal(g: Graph, lam: float, v: int) -> float:
    return PartitionOracle(g, lam).marginal(v)


def exact_conditional_marginal(g: Graph, lam: float, v: int, p: int) -> float:
    return PartitionOracle(g, lam).conditional_marginal(v, p)


# === Enumeration ===

def enumerate_independent_sets(g: Graph, limit: Optional[int] = None) -> np.ndarray:
    """All independent sets as ascending int64 bitmasks."""
    n = g.vertex_count
    if n > MAX_TABLE_VERTICES:
        raise BudgetExceededError(f"enumeration supports at most {MAX_TABLE_VERTICES} vertices, got {n}")
    later_neighbors = [sum(1 << u for u in g.adjacency[v] if u > v) for v in range(n)]

    found: List[int] = []
    # (next vertex, chosen mask, forbidden mask)
    stack = [(0, 0, 0)]
    while stack:
        v, chosen, forbidden = stack.pop()
        if v == n:
            found.append(chosen)
            if limit is not None and len(found) > limit:
                raise BudgetExceededError(f"more than {limit} independent sets on n={n}")
            continue
        stack.append((v + 1, chosen, forbidden))
        if not (forbidden >> v) & 1:
            stack.append((v + 1, chosen | (1 << v), forbidden | later_neighbors[v]))
    return np.sort(np.array(found, dtype=np.int64))


def _popcount(masks: np.ndarray, n: int) -> np.ndarray:
    counts = np.zeros(masks.shape, dtype=np.int64)
    for v in range(n):
        counts += (masks >> v) & 1
    return counts


def brute_force_partition(g: Graph, lam: float) -> float:
    """Σ_σ λ^|σ| over an explicit enumeration."""
    if g.vertex_count > settings.oracle_enumeration_cap:
        raise BudgetExceededError(
            f"enumeration cap is {settings.oracle_enumeration_cap} vertices, got {g.vertex_count}"
        )
    sizes = _popcount(enumerate_independent_sets(g), g.vertex_count)
    return math.fsum(lam ** int(k) for k in sizes)


@dataclass
class GibbsTable:
    """Every independent set (as a bitmask) with its Gibbs probability."""

    vertex_count: int
    lam: float
    masks: np.ndarray
    probabilities: np.ndarray
    partition: float

    def __len__(self) -> int:
        return int(self.masks.size)

    def __iter__(self) -> Iterator[Tuple[IndependentSet, float]]:
        for mask, prob in zip(self.masks.tolist(), self.probabilities.tolist()):
            yield IndependentSet.from_mask(self.vertex_count, mask), prob

    @cached_property
    def occupancy(self) -> np.ndarray:
        """Boolean matrix, one row per state."""
        bits = np.arange(self.vertex_count, dtype=np.int64)
        return ((self.masks[:, None] >> bits[None, :]) & 1).astype(bool)

    def index_of(self, mask: int) -> int:
        i = int(np.searchsorted(self.masks, mask))
        if i >= self.masks.size or self.masks[i] != mask:
            raise KeyError(mask)
        return i

    def probability_of(self, sigma: IndependentSet) -> float:
        try:
            return float(self.probabilities[self.index_of(sigma.mask)])
        except KeyError:
            return 0.0

    def marginals(self) -> np.ndarray:
        return self.probabilities @ self.occupancy

    def expectation(self, statistic: Callable[[IndependentSet], float]) -> float:
        return math.fsum(prob * float(statistic(sigma)) for sigma, prob in self)

    def sample(self, rng: np.random.Generator, size: Optional[int] = None) -> np.ndarray:
        """Exact Gibbs samples as bitmasks."""
        return rng.choice(self.masks, size=size, p=self.probabilities)


def exact_distribution(g: Graph, lam: float) -> GibbsTable:
    if g.vertex_count > settings.oracle_enumeration_cap:
        raise BudgetExceededError(
            f"enumeration cap is {settings.oracle_enumeration_cap} vertices, got {g.vertex_count}"
        )
    if not lam > 0:
        raise DomainError(f"lambda must be positive, got {lam}")
    masks = enumerate_independent_sets(g)
    return _table(g, lam, masks)


def _table(g: Graph, lam: float, masks: np.ndarray) -> GibbsTable:
    sizes = _popcount(masks, g.vertex_count)
    # shift by the largest log-weight before exponentiating
    log_w = sizes * math.log(lam)
    shift = float(log_w.max(initial=0.0))
    w = np.exp(log_w - shift)
    total = math.fsum(w.tolist())
    partition = total * math.exp(shift)
    return GibbsTable(g.vertex_count, float(lam), masks, w / total, partition)


def exact_stat_expectation(g: Graph, lam: float, statistic: Callable[[IndependentSet], float]) -> float:
    """Σ_σ μ(σ)·statistic(σ)."""
    return exact_distribution(g, lam).expectation(statistic)


# === Exact Glauber kernel ===

@dataclass
class GlauberKernel:
    """Discrete-time transition matrix over Ω indexed by ascending bitmask."""

    table: GibbsTable
    matrix: sp.csr_matrix = field(repr=False)

    @property
    def states(self) -> np.ndarray:
        return self.table.masks

    @property
    def stationary(self) -> np.ndarray:
        return self.table.probabilities

    def step_distribution(self, dist: np.ndarray) -> np.ndarray:
        """One step of a row distribution: dist @ P."""
        return self.matrix.T @ dist

    def point_mass(self, sigma: IndependentSet) -> np.ndarray:
        dist = np.zeros(len(self.table))
        dist[self.table.index_of(sigma.mask)] = 1.0
        return dist


def exact_glauber_kernel(g: Graph, lam: float, state_cap: Optional[int] = None) -> GlauberKernel:
    """Row-stochastic kernel of: pick v uniformly; blocked stays, else occupy w.p. λ/(1+λ)."""
    cap = state_cap or settings.kernel_state_cap
    if not lam > 0:
        raise DomainError(f"lambda must be positive, got {lam}")
    n = g.vertex_count
    masks = enumerate_independent_sets(g, limit=cap)
    table = _table(g, lam, masks)
    size = masks.size
    if n == 0:
        return GlauberKernel(table, sp.csr_matrix(np.ones((1, 1))))

    p_on = lam / (1 + lam) / n
    p_off = 1 / (1 + lam) / n
    stay = 1.0 / n
    state_idx = np.arange(size, dtype=np.int64)
    rows, cols, data = [], [], []
    for v in range(n):
        bit = np.int64(1) << np.int64(v)
        neighbor_mask = np.int64(sum(1 << u for u in g.adjacency[v]))
        blocked = (masks & neighbor_mask) != 0
        free = ~blocked

        rows.append(state_idx[blocked])
        cols.append(state_idx[blocked])
        data.append(np.full(int(blocked.sum()), stay))

        on = np.searchsorted(masks, masks[free] | bit)
        off = np.searchsorted(masks, masks[free] & ~bit)
        rows.extend([state_idx[free], state_idx[free]])
        cols.extend([on, off])
        data.extend([np.full(on.size, p_on), np.full(off.size, p_off)])

    matrix = sp.coo_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))), shape=(size, size)
    ).tocsr()
    logger.debug("Glauber kernel built", n=n, states=size, nnz=matrix.nnz)
    return GlauberKernel(table, matrix)
