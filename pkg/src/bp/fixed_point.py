"""
Synchronous fixed-point iteration of F and H, and loopy BP marginals.
"""
from dataclasses import dataclass, field
from typing import Callable, List, Literal, Optional, Tuple, TypeVar, Union

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve

from src.config import settings
from src.errors import DomainError, NonConvergenceError
from src.graph.core import Graph
from src.bp.fields import DirectedMessageField, VertexField
from src.bp.operators import apply_F, apply_H, incoming_product, jacobian_matrix, psi
from src.utils.logging import get_bp_logger

logger = get_bp_logger()

Field = TypeVar("Field", VertexField, DirectedMessageField)
BPMode = Literal["parented", "unrooted"]


NEWTON_MAX_STEPS = 100


@dataclass
class FixedPointReport:
    """Outcome of a fixed-point run; residuals are max-Ψ distances between successive iterates."""

    fixed_point: Union[VertexField, DirectedMessageField]
    iterations: int
    final_residual: float
    residuals: np.ndarray
    contraction_factors: np.ndarray
    converged: bool
    tol: float
    lam: float = field(default=0.0)
    method: str = "iteration"

    @property
    def observed_rate(self) -> float:
        """Median successive-residual ratio."""
        if self.contraction_factors.size == 0:
            return float("nan")
        return float(np.median(self.contraction_factors))

    @staticmethod
    def geometric_envelope(delta: float, iterations: int) -> np.ndarray:
        """Reference bound 3(1−δ/6)^i on the ∞-distance to the fixed point."""
        return 3.0 * (1.0 - delta / 6.0) ** np.arange(iterations + 1)

    def summary(self) -> dict:
        return {
            "iterations": self.iterations,
            "final_residual": self.final_residual,
            "converged": self.converged,
            "observed_rate": self.observed_rate,
            "tol": self.tol,
            "method": self.method,
        }


def _iterate(
    step: Callable[[Field], Field],
    start: Field,
    lam: float,
    tol: Optional[float],
    max_iter: Optional[int],
    raise_on_failure: bool,
    name: str,
) -> FixedPointReport:
    tol = settings.bp_tol if tol is None else tol
    max_iter = settings.bp_max_iter if max_iter is None else max_iter
    if not tol > 0:
        raise DomainError("tol must be positive")

    current = start
    current_psi = psi(lam, current.values)
    residuals = []
    converged = False
    for _ in range(max_iter):
        nxt = step(current)
        next_psi = psi(lam, nxt.values)
        residual = float(np.max(np.abs(next_psi - current_psi), initial=0.0))
        residuals.append(residual)
        current, current_psi = nxt, next_psi
        if residual <= tol:
            converged = True
            break

    res = np.array(residuals)
    with np.errstate(divide="ignore", invalid="ignore"):
        factors = res[1:] / res[:-1]
    factors = factors[np.isfinite(factors)]
    report = FixedPointReport(
        fixed_point=current,
        iterations=len(residuals),
        final_residual=float(res[-1]) if res.size else 0.0,
        residuals=res,
        contraction_factors=factors,
        converged=converged,
        tol=tol,
        lam=lam,
    )
    if converged:
        logger.debug("✅ Fixed point reached", operator=name, iterations=report.iterations, rate=report.observed_rate)
    else:
        logger.warning("⚠️ Fixed point not reached", operator=name, iterations=report.iterations, residual=report.final_residual)
        if raise_on_failure:
            raise NonConvergenceError(
                f"{name} iteration stopped after {report.iterations} sweeps at residual {report.final_residual:.3e}",
                report=report,
            )
    return report


def fixed_point_F(
    g: Graph,
    lam: float,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
    init: Optional[VertexField] = None,
    raise_on_failure: bool = True,
) -> FixedPointReport:
    """Iterate ω ← F(ω) from ω⁰ ≡ 1 (or init) until the Ψ-step is at most tol."""
    start = init if init is not None else VertexField.constant(g.vertex_count, 1.0)
    return _iterate(lambda w: apply_F(g, lam, w), start, lam, tol, max_iter, raise_on_failure, "F")


def _newton_polish(g: Graph, lam: float, start: VertexField, tol: float) -> Tuple[VertexField, List[float], bool]:
    """Newton steps on r(ω) = F(ω) − ω; each solves (J + I)s = r with backtracking on max|r|."""
    n = g.vertex_count
    floor = 0.5 * (1.0 + lam) ** (-max(g.max_degree, 1))
    identity = sp.identity(n, format="csr")
    x = start.values.copy()
    residuals: List[float] = []
    for done in range(NEWTON_MAX_STEPS + 1):
        fx = apply_F(g, lam, VertexField(x)).values
        residual = float(np.max(np.abs(psi(lam, fx) - psi(lam, x)), initial=0.0))
        residuals.append(residual)
        if residual <= tol:
            return VertexField(x), residuals, True
        if done == NEWTON_MAX_STEPS:
            break
        r = fx - x
        step = np.atleast_1d(spsolve((jacobian_matrix(g, lam, VertexField(x)) + identity).tocsc(), r))
        size = float(np.max(np.abs(r)))
        scale = 1.0
        for _ in range(30):
            trial = np.clip(x + scale * step, floor, 1.0)
            if float(np.max(np.abs(apply_F(g, lam, VertexField(trial)).values - trial))) < size:
                break
            scale *= 0.5
        x = trial
    return VertexField(x), residuals, False


def solve_fixed_point_F(
    g: Graph,
    lam: float,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
    init: Optional[VertexField] = None,
) -> FixedPointReport:
    """The unique fixed point ω* of F.

    Plain iteration first; when it stalls (F∘F can settle on a 2-cycle once α(λ,Δ) > 1) the
    last iterate is averaged with its image and refined by Newton steps. Raises
    NonConvergenceError when neither reaches tol.
    """
    report = fixed_point_F(g, lam, tol, max_iter, init, raise_on_failure=False)
    if report.converged:
        return report

    last = report.fixed_point.values
    midpoint = VertexField(0.5 * (last + apply_F(g, lam, report.fixed_point).values))
    omega, newton_residuals, converged = _newton_polish(g, lam, midpoint, report.tol)
    polished = FixedPointReport(
        fixed_point=omega,
        iterations=report.iterations + len(newton_residuals),
        final_residual=newton_residuals[-1],
        residuals=np.concatenate([report.residuals, newton_residuals]),
        contraction_factors=report.contraction_factors,
        converged=converged,
        tol=report.tol,
        lam=lam,
        method="newton",
    )
    if not converged:
        raise NonConvergenceError(
            f"Newton refinement of F stopped at residual {polished.final_residual:.3e}",
            report=polished,
        )
    logger.info("🎯 Fixed point refined by Newton steps", sweeps=report.iterations, newton_steps=len(newton_residuals))
    return polished


def fixed_point_H(
    g: Graph,
    lam: float,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
    init: Optional[DirectedMessageField] = None,
    raise_on_failure: bool = True,
) -> FixedPointReport:
    """As fixed_point_F on the oriented-edge field."""
    start = init if init is not None else DirectedMessageField.constant(g, 1.0)
    return _iterate(lambda w: apply_H(g, lam, w), start, lam, tol, max_iter, raise_on_failure, "H")


@dataclass
class BPMarginals:
    """q^t per oriented edge (parented mode) and q̃^t per vertex."""

    mode: str
    iterations: int
    vertex_q: np.ndarray
    edge_q: Optional[np.ndarray]
    messages: Union[VertexField, DirectedMessageField]

    def edge(self, g: Graph, v: int, p: int) -> float:
        if self.edge_q is None:
            raise DomainError("edge marginals exist only in parented mode")
        return float(self.edge_q[g.slot(v, p)])


def loopy_bp_marginals(g: Graph, lam: float, t: int, mode: BPMode = "parented") -> BPMarginals:
    """t synchronous BP rounds from R⁰ ≡ λ.

    Parented: R^t_{v→p} = λ·H^t(1)(v,p), q^t(v,p) = R/(1+R), and the vertex belief uses all
    incoming messages. Unrooted: R̃^t_v = λ·F^t(1)(v) and q̃^t = R̃/(1+R̃).
    """
    if t < 1:
        raise DomainError("t must be at least 1")
    if mode == "parented":
        messages = DirectedMessageField.constant(g, 1.0)
        for _ in range(t):
            messages = apply_H(g, lam, messages)
        r = lam * messages.values
        belief = lam * incoming_product(g, lam, messages)
        return BPMarginals(mode, t, belief / (1 + belief), r / (1 + r), messages)
    if mode == "unrooted":
        omega = VertexField.constant(g.vertex_count, 1.0)
        for _ in range(t):
            omega = apply_F(g, lam, omega)
        r = lam * omega.values
        return BPMarginals(mode, t, r / (1 + r), None, omega)
    raise DomainError(f"unknown BP mode {mode!r}")


def bp_fixed_point_gap(g: Graph, lam: float, tol: Optional[float] = None, max_iter: Optional[int] = None) -> float:
    """max over oriented edges of |q*(v,p) − q̃*(v)| between the parented and unrooted fixed points."""
    parented = fixed_point_H(g, lam, tol, max_iter).fixed_point.values
    unrooted = fixed_point_F(g, lam, tol, max_iter).fixed_point.values
    q_edge = lam * parented / (1 + lam * parented)
    q_vertex = lam * unrooted / (1 + lam * unrooted)
    return float(np.max(np.abs(q_edge - q_vertex[g.slot_rows]), initial=0.0))
