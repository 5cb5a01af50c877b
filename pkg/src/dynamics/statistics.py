"""
Local statistics of a configuration: unblocked indicators, S, W, R, the BP residual,
and the ρ-heavy / above-suspicion classifiers.
"""
import math
from functools import cached_property
from typing import List, Optional, Sequence, Union

import numpy as np
import scipy.sparse as sp

from src.errors import DomainError, LengthMismatchError, NotNeighborError
from src.graph.core import Graph, ball
from src.model.hardcore import IndependentSet

Occupancy = Union[IndependentSet, np.ndarray, Sequence[bool]]


def _occ(g: Graph, sigma: Occupancy) -> np.ndarray:
    occ = sigma.occupied if isinstance(sigma, IndependentSet) else np.asarray(getattr(sigma, "occupied", sigma), dtype=bool)
    if occ.shape != (g.vertex_count,):
        raise LengthMismatchError(f"occupancy has length {occ.size}, graph has {g.vertex_count} vertices")
    return occ


def _phi_values(phi: object) -> np.ndarray:
    return np.asarray(getattr(phi, "values", phi), dtype=np.float64)


# === Single-vertex statistics ===

def unblocked_indicator(g: Graph, sigma: Occupancy, v: int, p: Optional[int] = None) -> int:
    """U_{v,p}(σ): 1 when no vertex of N(v)∖{p} is occupied."""
    occ = _occ(g, sigma)
    if p is not None and not g.has_edge(v, p):
        raise NotNeighborError(f"{p} is not a neighbor of {v}")
    return int(not any(occ[z] for z in g.adjacency[v] if z != p))


def s_stat(g: Graph, sigma: Occupancy, v: int) -> int:
    """S(v) = Σ_{z∈N(v)} U_{z,v}: neighbors of v left unblocked by everything but v."""
    occ = _occ(g, sigma)
    return sum(unblocked_indicator(g, occ, z, v) for z in g.adjacency[v])


def w_stat(g: Graph, sigma: Occupancy, v: int, phi: object) -> float:
    """W(v) = Σ_{z∈N(v)} U_{z,v}·Φ(z)."""
    occ = _occ(g, sigma)
    values = _phi_values(phi)
    return math.fsum(values[z] for z in g.adjacency[v] if unblocked_indicator(g, occ, z, v))


def r_stat(g: Graph, sigma: Occupancy, v: int, lam: float) -> float:
    """R(σ,v) = Π_{z∈N(v)} (1 − λ/(1+λ)·U_{z,v}) = (1+λ)^(−S(v))."""
    return (1.0 + lam) ** (-s_stat(g, sigma, v))


def bp_residual(g: Graph, sigma: Occupancy, v: int, lam: float) -> float:
    """|R(σ,v) − Π_{z∈N(v)} (1 − λR(σ,z)/(1+λ))|."""
    occ = _occ(g, sigma)
    p = lam / (1.0 + lam)
    product = math.prod(1.0 - p * r_stat(g, occ, z, lam) for z in g.adjacency[v])
    return abs(r_stat(g, occ, v, lam) - product)


# === Whole-graph versions ===

def unblocked_slots(g: Graph, sigma: Occupancy) -> np.ndarray:
    """For every CSR slot (v, z): U_{z,v}(σ)."""
    occ = _occ(g, sigma)
    occupied_neighbors = np.bincount(g.slot_rows, weights=occ[g.indices].astype(np.float64), minlength=g.vertex_count)
    return (occupied_neighbors[g.indices] - occ[g.slot_rows]) == 0


def s_stat_all(g: Graph, sigma: Occupancy) -> np.ndarray:
    return np.bincount(g.slot_rows, weights=unblocked_slots(g, sigma).astype(np.float64), minlength=g.vertex_count)


def w_stat_all(g: Graph, sigma: Occupancy, phi: object) -> np.ndarray:
    weights = unblocked_slots(g, sigma) * _phi_values(phi)[g.indices]
    return np.bincount(g.slot_rows, weights=weights, minlength=g.vertex_count)


def r_stat_all(g: Graph, sigma: Occupancy, lam: float) -> np.ndarray:
    return (1.0 + lam) ** (-s_stat_all(g, sigma))


def bp_residual_all(g: Graph, sigma: Occupancy, lam: float) -> np.ndarray:
    r = r_stat_all(g, sigma, lam)
    terms = np.log1p(-(lam / (1.0 + lam)) * r[g.indices])
    product = np.exp(np.bincount(g.slot_rows, weights=terms, minlength=g.vertex_count))
    return np.abs(r - product)


# === Heaviness ===

def _thresholds(g: Graph, rho: float) -> tuple:
    d = g.max_degree
    if d < 3:
        raise DomainError(f"heaviness needs max degree >= 3, got {d}")
    if not rho > 0:
        raise DomainError(f"rho must be positive, got {rho}")
    return rho * d, rho * d / math.log(d)


def heavy_counts(g: Graph, sigma: Occupancy, v: int) -> tuple:
    """(|B_2(v) ∩ σ|, |B_1(v) ∩ σ|)."""
    occ = _occ(g, sigma)
    b2 = sum(1 for z in ball(g, v, 2) if occ[z])
    b1 = int(occ[v]) + sum(1 for z in g.adjacency[v] if occ[z])
    return b2, b1


def is_heavy(g: Graph, sigma: Occupancy, v: int, rho: float) -> bool:
    """|B_2(v)∩σ| ≥ ρΔ or |B_1(v)∩σ| ≥ ρΔ/ln Δ."""
    two, one = _thresholds(g, rho)
    b2, b1 = heavy_counts(g, sigma, v)
    return b2 >= two or b1 >= one


def above_suspicion(g: Graph, sigma: Occupancy, v: int, rho: float, r: int) -> bool:
    """No vertex of B_r(v) is ρ-heavy."""
    occ = _occ(g, sigma)
    return not any(is_heavy(g, occ, w, rho) for w in ball(g, v, r))


def suspect_disagreement(g: Graph, sigma: Occupancy, tau: Occupancy, v: int, rho: float, r: int) -> bool:
    """True when either configuration fails to be ρ-above suspicion for radius r at v."""
    return not (above_suspicion(g, sigma, v, rho, r) and above_suspicion(g, tau, v, rho, r))


class HeavinessClassifier:
    """Vectorized heaviness for repeated queries on one graph."""

    def __init__(self, g: Graph, rho: float):
        self.graph = g
        self.rho = rho
        self.two_hop_threshold, self.one_hop_threshold = _thresholds(g, rho)

    @cached_property
    def _closed(self) -> sp.csr_matrix:
        n = self.graph.vertex_count
        adj = sp.csr_matrix((np.ones(self.graph.indices.size), self.graph.indices, self.graph.indptr), shape=(n, n))
        return (adj + sp.identity(n, format="csr")).astype(bool).astype(np.int64).tocsr()

    @cached_property
    def _two_hop(self) -> sp.csr_matrix:
        closed = self._closed
        return (closed @ closed).astype(bool).astype(np.int64).tocsr()

    def heavy_mask(self, sigma: Occupancy) -> np.ndarray:
        occ = _occ(self.graph, sigma).astype(np.int64)
        return (self._two_hop @ occ >= self.two_hop_threshold) | (self._closed @ occ >= self.one_hop_threshold)

    def above_suspicion(self, sigma: Occupancy, v: int, r: int) -> bool:
        members = sorted(ball(self.graph, v, r))
        return not bool(self.heavy_mask(sigma)[members].any())


def interpolation_path(x: IndependentSet, y: IndependentSet) -> List[IndependentSet]:
    """X, then X with each vertex of X∖Y removed in turn, then each vertex of Y∖X added."""
    if x.vertex_count != y.vertex_count:
        raise LengthMismatchError("sets have different lengths")
    current = x.occupied.copy()
    path = [IndependentSet(current.copy())]
    for v in np.flatnonzero(x.occupied & ~y.occupied):
        current[v] = False
        path.append(IndependentSet(current.copy()))
    for v in np.flatnonzero(y.occupied & ~x.occupied):
        current[v] = True
        path.append(IndependentSet(current.copy()))
    return path
