"""
Belief propagation package.
"""
from .fields import DirectedMessageField, PhiFunction, VertexField
from .fixed_point import (
    BPMarginals,
    FixedPointReport,
    bp_fixed_point_gap,
    fixed_point_F,
    fixed_point_H,
    loopy_bp_marginals,
    solve_fixed_point_F,
)
from .operators import (
    alpha,
    apply_F,
    apply_H,
    jacobian_matrix,
    jacobian_rows,
    psi,
    psi_metric,
    psi_prime,
    uniqueness_margin,
    x_hat,
)
from .phi import (
    JacobianPhiReport,
    PhiContractionReport,
    build_phi,
    check_jacobian_phi,
    find_delta_0,
    verify_phi_contraction,
)

__all__ = [
    "BPMarginals",
    "DirectedMessageField",
    "FixedPointReport",
    "JacobianPhiReport",
    "PhiContractionReport",
    "PhiFunction",
    "VertexField",
    "alpha",
    "apply_F",
    "apply_H",
    "bp_fixed_point_gap",
    "build_phi",
    "check_jacobian_phi",
    "find_delta_0",
    "fixed_point_F",
    "fixed_point_H",
    "jacobian_matrix",
    "jacobian_rows",
    "loopy_bp_marginals",
    "psi",
    "psi_metric",
    "psi_prime",
    "solve_fixed_point_F",
    "uniqueness_margin",
    "x_hat",
]
