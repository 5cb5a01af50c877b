"""
Path-coupling weights Φ built from the BP fixed point, and their certification.
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp

from src.errors import DomainError, ZeroEntryError
from src.graph.core import Graph
from src.bp.fields import PhiFunction, VertexField
from src.bp.operators import jacobian_matrix, uniqueness_margin
from src.model.hardcore import lambda_c
from src.utils.logging import get_bp_logger

logger = get_bp_logger()

PHI_CEILING = 12.0


def build_phi(g: Graph, lam: float, omega_star: VertexField, delta: Optional[float] = None) -> PhiFunction:
    """Φ(v) = √((1+λω*(v)) / ω*(v)).

    With delta given, the result is flagged certified when the uniqueness margin is
    nonnegative and every entry is at most 12.
    """
    values = omega_star.values
    if values.size and values.min() <= 0:
        zero = int(np.argmin(values))
        raise ZeroEntryError(f"fixed-point entry at vertex {zero} is not positive")
    phi = np.sqrt((1.0 + lam * values) / values)
    if phi.size and phi.min() < 1.0:
        low = int(np.argmin(phi))
        raise DomainError(f"Φ({low}) = {phi[low]:.6g} is below 1; ω* must lie in (0, 1] with λ > 0")

    certified = False
    if delta is not None and g.max_degree >= 3:
        certified = uniqueness_margin(lam, g.max_degree, delta) >= 0 and bool(phi.max(initial=1.0) <= PHI_CEILING)
    return PhiFunction(phi, certified=certified)


@dataclass
class PhiContractionReport:
    ratios: np.ndarray
    max_ratio: float
    worst_vertex: int
    threshold: float
    passed: bool


def verify_phi_contraction(g: Graph, lam: float, omega_star: VertexField, phi: PhiFunction, delta: float) -> PhiContractionReport:
    """Per-vertex [Σ_{u∈N(v)} λω*(u)Φ(u)/(1+λω*(u))] / Φ(v) against 1−δ/6."""
    w = omega_star.values[g.indices]
    contrib = lam * w * phi.values[g.indices] / (1.0 + lam * w)
    ratios = np.bincount(g.slot_rows, weights=contrib, minlength=g.vertex_count) / phi.values
    threshold = 1.0 - delta / 6.0
    worst = int(np.argmax(ratios)) if ratios.size else -1
    max_ratio = float(ratios.max(initial=0.0))
    report = PhiContractionReport(ratios, max_ratio, worst, threshold, max_ratio <= threshold)
    logger.debug("Phi contraction checked", max_ratio=max_ratio, threshold=threshold, passed=report.passed)
    return report


@dataclass
class JacobianPhiReport:
    excess: np.ndarray
    max_excess: float
    passed: bool


def check_jacobian_phi(
    g: Graph, lam: float, omega_star: VertexField, phi: PhiFunction, delta: float, slack: float = 1e-10
) -> JacobianPhiReport:
    """Entrywise ĴΦ ≤ (1−δ/6)Φ with Ĵ = D⁻¹JD, D = diag(ω*)."""
    w = omega_star.values
    jac = jacobian_matrix(g, lam, omega_star)
    j_hat = sp.diags(1.0 / w) @ jac @ sp.diags(w)
    excess = j_hat @ phi.values - (1.0 - delta / 6.0) * phi.values
    max_excess = float(excess.max(initial=-np.inf))
    return JacobianPhiReport(excess, max_excess, max_excess <= slack)


def find_delta_0(delta: float = 0.2, ratio: Optional[float] = None, max_degree: int = 10_000) -> Optional[int]:
    """Smallest Δ0 ≥ 3 with a nonnegative margin at λ = ratio·λ_c(Δ) for every Δ in [Δ0, max_degree].

    ratio defaults to 1−δ. None when the margin is negative at max_degree.
    """
    ratio = 1.0 - delta if ratio is None else ratio
    found: Optional[int] = None
    for d in range(max_degree, 2, -1):
        if uniqueness_margin(ratio * lambda_c(d), d, delta) < 0:
            break
        found = d
    logger.info("Delta_0 scan", delta=delta, ratio=ratio, max_degree=max_degree, delta_0=found)
    return found
