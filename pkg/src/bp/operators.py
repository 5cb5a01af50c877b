"""
BP operators F and H, the Ψ potential, α(λ, d) and the Jacobian of F.
"""
import math
from typing import Dict, Optional

import numpy as np
import scipy.sparse as sp
from scipy.optimize import bisect

from src.errors import DomainError
from src.graph.core import Graph, ball
from src.bp.fields import DirectedMessageField, VertexField

X_HAT_TOL = 1e-13


def apply_F(g: Graph, lam: float, omega: VertexField) -> VertexField:
    """F(ω)(z) = Π_{y∈N(z)} 1/(1+λω(y))."""
    terms = -np.log1p(lam * omega.values[g.indices])
    return VertexField(np.exp(np.bincount(g.slot_rows, weights=terms, minlength=g.vertex_count)))


def apply_H(g: Graph, lam: float, omega: DirectedMessageField) -> DirectedMessageField:
    """H(ω)(v,p) = Π_{u∈N(v)\\{p}} 1/(1+λω(u,v)), stored at the slot of (v, p)."""
    # slot k = (v, u) reads the message u -> v
    terms = -np.log1p(lam * omega.values[g.reverse_slots])
    row_sums = np.bincount(g.slot_rows, weights=terms, minlength=g.vertex_count)
    return DirectedMessageField(g, np.exp(row_sums[g.slot_rows] - terms))


def incoming_product(g: Graph, lam: float, omega: DirectedMessageField) -> np.ndarray:
    """Π_{u∈N(v)} 1/(1+λω(u,v)) per vertex: the rooted belief of the parented messages."""
    terms = -np.log1p(lam * omega.values[g.reverse_slots])
    return np.exp(np.bincount(g.slot_rows, weights=terms, minlength=g.vertex_count))


# === Potential ===

def psi(lam: float, x: float | np.ndarray) -> float | np.ndarray:
    """Ψ(x) = arcsinh(√(λx)) / √λ."""
    out = np.arcsinh(np.sqrt(lam * np.asarray(x, dtype=np.float64))) / math.sqrt(lam)
    return float(out) if out.ndim == 0 else out


def psi_prime(lam: float, x: float | np.ndarray) -> float | np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    out = 1.0 / (2.0 * np.sqrt(x * (1.0 + lam * x)))
    return float(out) if out.ndim == 0 else out


def psi_metric(
    g: Graph,
    lam: float,
    omega1: VertexField,
    omega2: VertexField,
    center: Optional[int] = None,
    radius: float = math.inf,
) -> float:
    """D_{v,ℓ}: max over B(center, radius) of |Ψ(ω1) − Ψ(ω2)|; global when radius is infinite."""
    diff = np.abs(psi(lam, omega1.values) - psi(lam, omega2.values))
    if center is not None and math.isfinite(radius):
        diff = diff[sorted(ball(g, center, int(radius)))]
    return float(diff.max(initial=0.0))


# === Uniqueness ===

def x_hat(lam: float, d: int) -> float:
    """Unique root of x = (1+λx)^(−d) on [0, 1], by bisection."""
    if not lam > 0:
        raise DomainError(f"lambda must be positive, got {lam}")
    if d < 0:
        raise DomainError(f"d must be nonnegative, got {d}")
    if d == 0:
        return 1.0
    return float(bisect(lambda x: x - (1.0 + lam * x) ** (-d), 0.0, 1.0, xtol=X_HAT_TOL, maxiter=200))


def alpha(lam: float, d: int) -> float:
    """α(λ,d) = √(dλx̂ / (1+λx̂))."""
    x = x_hat(lam, d)
    return math.sqrt(d * lam * x / (1.0 + lam * x))


def uniqueness_margin(lam: float, max_degree: int, delta: float) -> float:
    """(1−δ/6) − α(λ,Δ); nonnegative means the certified contraction regime."""
    if max_degree < 3:
        raise DomainError(f"uniqueness margin needs max degree >= 3, got {max_degree}")
    return (1.0 - delta / 6.0) - alpha(lam, max_degree)


# === Jacobian ===

def jacobian_matrix(g: Graph, lam: float, omega: VertexField) -> sp.csr_matrix:
    """J(v,u) = λF(ω)(v)/(1+λω(u)) for u ∈ N(v); the derivative ∂F(ω)(v)/∂ω(u) is −J(v,u)."""
    f = apply_F(g, lam, omega).values
    data = lam * f[g.slot_rows] / (1.0 + lam * omega.values[g.indices])
    n = g.vertex_count
    return sp.csr_matrix((data, g.indices.copy(), g.indptr.copy()), shape=(n, n))


def jacobian_rows(g: Graph, lam: float, omega: VertexField) -> Dict[int, Dict[int, float]]:
    """Sparse row map v -> {u: J(v,u)}; isolated vertices map to empty rows."""
    matrix = jacobian_matrix(g, lam, omega)
    return {
        v: {int(u): float(x) for u, x in zip(matrix.indices[matrix.indptr[v]:matrix.indptr[v + 1]], matrix.data[matrix.indptr[v]:matrix.indptr[v + 1]])}
        for v in range(g.vertex_count)
    }
