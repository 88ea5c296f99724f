# services/src/power_alloc/__init__.py
"""
Power allocation module for the rci-secrecy project.
Tangent bounds, the inner barrier solver, SCA and joint (alpha, p) optimization.
"""

from ..precoder.precoder import PowerVector
from .barrier_solver import (
    InnerProblem,
    MaxIterationsExceeded,
    PowerAllocationError,
    SolveDiagnostics,
    kkt_residual_at,
    leakage_term_second_derivative,
    pa_objective,
    solve_inner_convex,
)
from .sca import joint_optimize, sca_power_allocation, true_secrecy_rate
from .tangent_bound import TangentCoeffs, tangent_coeffs, tangent_coeffs_vector, tangent_lower_bound

__all__ = [
    "InnerProblem",
    "MaxIterationsExceeded",
    "PowerAllocationError",
    "PowerVector",
    "SolveDiagnostics",
    "TangentCoeffs",
    "joint_optimize",
    "kkt_residual_at",
    "leakage_term_second_derivative",
    "pa_objective",
    "sca_power_allocation",
    "solve_inner_convex",
    "tangent_coeffs",
    "tangent_coeffs_vector",
    "tangent_lower_bound",
    "true_secrecy_rate",
]
