# services/src/power_alloc/barrier_solver.py
"""
Inner Convex Solver Module

This module solves the concave maximization that each SCA iteration hands
over: with log-powers x = log p and per-user tangent coefficients (a_k, b_k),

    F(x) = sum_k (a_k/ln2) log(e^{x_k} G_kk / I_k(x)) + b_k/ln2
                 - log2(1 + e^{x_k} L_k / sigma2)

where G_kj = |h_k^H w_j|^2, I_k(x) = sum_{j != k} e^{x_j} G_kj + sigma2 and
L_k = sum_{j != k} G_jk, subject to sum_k e^{x_k} ||w_k||^2 <= 1 and
x_k >= log(p_floor).

F is concave, the constraint set is convex. The solver is a log-barrier
interior method with damped Newton centering steps and a barrier weight
raised by a factor of 10 until the duality gap m/t drops below tol.

Classes:
    SolveDiagnostics: Convergence record shared with the SCA drivers
    InnerProblem: F, its gradient and Hessian for fixed (G, ||w||^2, a, b)

Functions:
    pa_objective: F evaluated for a channel, precoder and tangent coefficients
    leakage_term_second_derivative: Curvature of the leakage term in x_k
    solve_inner_convex: Barrier method returning the maximizer and diagnostics

Dependencies:
    - numpy
    - scipy.linalg
    - pydantic
    - logging
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field
from scipy import linalg

from ..channel.channel_model import ChannelMatrix, DimensionError
from ..initial_setup.env_config import config
from ..precoder.precoder import PrecoderMatrix
from ..rates.secrecy_rates import gain_matrix, leakage_powers
from .tangent_bound import TangentCoeffs

logger = logging.getLogger(__name__)

LN2 = math.log(2.0)
BARRIER_GROWTH = 10.0
INTERIOR_LOAD = 0.99
ARMIJO_SLOPE = 0.25
STEP_SHRINK = 0.5
MIN_STEP = 1e-16
ACTIVE_LOAD_TOL = 1e-6
STATIONARY_TOL = 1e-6
MERIT_ROUNDOFF = 1e-13


class PowerAllocationError(Exception):
    """Base exception class for power-allocation errors."""

    pass


class MaxIterationsExceeded(PowerAllocationError):
    """Raised on request when an iteration limit is hit before convergence."""

    def __init__(self, message: str, diagnostics: Optional["SolveDiagnostics"] = None):
        super().__init__(message)
        self.diagnostics = diagnostics


class SolveDiagnostics(BaseModel):
    objective_trace: List[float] = Field(default_factory=list, description="Objective values in bits")
    outer_iterations: int = 0
    inner_iterations: int = 0
    kkt_residual: float = 0.0
    converged: bool = False
    muted_users: List[int] = Field(default_factory=list)


@dataclass(frozen=True, eq=False)
class InnerProblem:
    """
    Data of one inner problem.

    gains is the K x K matrix G, norms_sq holds ||w_k||^2.
    """

    gains: np.ndarray
    norms_sq: np.ndarray
    sigma2: float
    a: np.ndarray
    b: np.ndarray
    p_floor: float = config.P_FLOOR

    def __post_init__(self):
        K = self.gains.shape[0]
        if self.a.shape != (K,) or self.b.shape != (K,) or self.norms_sq.shape != (K,):
            raise DimensionError(f"Inner problem data must all have K={K} entries")
        off_diagonal = self.gains.copy()
        np.fill_diagonal(off_diagonal, 0.0)
        direct = np.diag(self.gains)
        log_direct = np.where(self.a > 0, np.log(np.maximum(direct, np.finfo(float).tiny)), 0.0)
        object.__setattr__(self, "_off_diagonal", off_diagonal)
        object.__setattr__(self, "_log_direct", log_direct)
        object.__setattr__(self, "_leakage", leakage_powers(self.gains))

    @property
    def num_users(self) -> int:
        return self.gains.shape[0]

    @property
    def log_floor(self) -> float:
        return math.log(self.p_floor)

    def _terms(self, x: np.ndarray):
        e = np.exp(x)
        Q = self._off_diagonal * e[np.newaxis, :]
        interference = Q.sum(axis=1) + self.sigma2
        s = e * self._leakage / self.sigma2
        return Q, interference, s

    def value(self, x: np.ndarray) -> float:
        _, interference, s = self._terms(x)
        intended = self.a * (x + self._log_direct - np.log(interference)) + self.b
        return float((np.sum(intended) - np.sum(np.log1p(s))) / LN2)

    def gradient(self, x: np.ndarray) -> np.ndarray:
        Q, interference, s = self._terms(x)
        return (self.a - Q.T @ (self.a / interference) - s / (1.0 + s)) / LN2

    def hessian(self, x: np.ndarray) -> np.ndarray:
        Q, interference, s = self._terms(x)
        weights = self.a / interference
        curvature = Q.T @ (Q * (weights / interference)[:, np.newaxis])
        curvature -= np.diag(Q.T @ weights)
        curvature -= np.diag(s / (1.0 + s) ** 2)
        return curvature / LN2

    def load(self, x: np.ndarray) -> float:
        with np.errstate(over="ignore"):
            return float(np.dot(self.norms_sq, np.exp(x)))

    def strictly_feasible(self, x: np.ndarray) -> bool:
        load = self.load(x)
        return bool(np.isfinite(load) and load < 1.0 and np.all(x > self.log_floor))

    def barrier(self, x: np.ndarray) -> float:
        return math.log(1.0 - self.load(x)) + float(np.sum(np.log(x - self.log_floor)))

    def barrier_gradient(self, x: np.ndarray) -> np.ndarray:
        u = self.norms_sq * np.exp(x)
        slack = 1.0 - u.sum()
        return -u / slack + 1.0 / (x - self.log_floor)

    def barrier_hessian(self, x: np.ndarray) -> np.ndarray:
        u = self.norms_sq * np.exp(x)
        slack = 1.0 - u.sum()
        gap = x - self.log_floor
        return -np.diag(u / slack) - np.outer(u, u) / slack**2 - np.diag(1.0 / gap**2)


def _coeff_arrays(coeffs: Sequence[TangentCoeffs]) -> Tuple[np.ndarray, np.ndarray]:
    return np.array([c.a for c in coeffs], dtype=float), np.array([c.b for c in coeffs], dtype=float)


def build_problem(
    H: ChannelMatrix,
    W: PrecoderMatrix,
    sigma2: float,
    coeffs: Sequence[TangentCoeffs],
    p_floor: float = config.P_FLOOR,
) -> InnerProblem:
    if len(coeffs) != H.num_users:
        raise DimensionError(f"Got {len(coeffs)} tangent coefficients for K={H.num_users}")
    a, b = _coeff_arrays(coeffs)
    return InnerProblem(
        gains=gain_matrix(H, W),
        norms_sq=W.column_norms_sq(),
        sigma2=sigma2,
        a=a,
        b=b,
        p_floor=p_floor,
    )


def pa_objective(
    H: ChannelMatrix,
    W: PrecoderMatrix,
    log_p: Sequence[float],
    sigma2: float,
    coeffs: Sequence[TangentCoeffs],
) -> float:
    """
    Concave surrogate of the power-allocated secrecy sum-rate, in bits.

    With coefficients anchored at the current SINRs it equals the unclipped
    secrecy sum-rate at log_p; otherwise it is a lower bound on it.
    """
    return build_problem(H, W, sigma2, coeffs).value(np.asarray(log_p, dtype=float))


def leakage_term_second_derivative(
    H: ChannelMatrix, W: PrecoderMatrix, log_p: Sequence[float], sigma2: float, k: int
) -> float:
    """d^2/dx_k^2 of -log2(1 + e^{x_k} L_k / sigma2); never positive."""
    x = np.asarray(log_p, dtype=float)
    s = math.exp(x[k]) * leakage_powers(gain_matrix(H, W))[k] / sigma2
    return -s / (1.0 + s) ** 2 / LN2


def _interior_start(problem: InnerProblem, x: np.ndarray) -> np.ndarray:
    floor = problem.log_floor
    x = np.maximum(x, floor + math.log(2.0))
    load = problem.load(x)
    if load >= INTERIOR_LOAD:
        x = x + math.log(INTERIOR_LOAD / load)
    x = np.maximum(x, floor + math.log(1.5))
    if not problem.strictly_feasible(x):
        raise PowerAllocationError("Could not find a strictly feasible starting point")
    return x


def _newton_direction(hessian: np.ndarray, gradient: np.ndarray) -> np.ndarray:
    # -hessian is positive definite on the interior; jitter covers round-off
    negated = -hessian
    jitter = 0.0
    scale = max(float(np.max(np.abs(np.diag(negated)))), 1.0)
    for _ in range(8):
        try:
            factor = linalg.cho_factor(negated + jitter * np.eye(len(gradient)), check_finite=False)
            return linalg.cho_solve(factor, gradient, check_finite=False)
        except linalg.LinAlgError:
            jitter = scale * 1e-12 if jitter == 0.0 else jitter * 100.0
    return np.linalg.lstsq(negated, gradient, rcond=None)[0]


def _center(
    problem: InnerProblem, x: np.ndarray, t: float, tol: float, max_newton: int
) -> Tuple[np.ndarray, int, bool, np.ndarray]:
    """Damped Newton on t F(x) + barrier(x) from a strictly feasible x."""

    def merit(z: np.ndarray) -> float:
        return t * problem.value(z) + problem.barrier(z)

    for iteration in range(1, max_newton + 1):
        gradient = t * problem.gradient(x) + problem.barrier_gradient(x)
        hessian = t * problem.hessian(x) + problem.barrier_hessian(x)
        direction = _newton_direction(hessian, gradient)
        decrement_sq = float(gradient @ direction)
        # decrement^2 / 2t bounds how far F is from the centered value, in bits
        if decrement_sq / (2.0 * t) <= tol:
            return x, iteration, True, gradient

        step = 1.0
        while step > MIN_STEP and not problem.strictly_feasible(x + step * direction):
            step *= STEP_SHRINK
        current = merit(x)
        while step > MIN_STEP and merit(x + step * direction) < current + ARMIJO_SLOPE * step * decrement_sq:
            step *= STEP_SHRINK
        if step <= MIN_STEP:
            logger.debug(f"Newton line search stalled at t={t:.3e}, decrement^2={decrement_sq:.3e}")
            return x, iteration, True, gradient
        candidate = x + step * direction
        gain = merit(candidate) - current
        x = candidate
        if gain <= MERIT_ROUNDOFF * max(1.0, abs(current)):
            logger.debug(f"Centering gain at round-off level at t={t:.3e}")
            return x, iteration, True, gradient

    gradient = t * problem.gradient(x) + problem.barrier_gradient(x)
    return x, max_newton, False, gradient


def kkt_residual_at(problem: InnerProblem, x: np.ndarray) -> float:
    """
    First-order optimality residual of x for the original (unbarriered)
    problem, relative to max(1, ||grad F||).

    Users at the power floor may have a gradient below the budget price.
    Returns inf when the budget is violated.
    """
    load = problem.load(x)
    if not np.isfinite(load) or load > 1.0 + config.FEASIBILITY_SLACK:
        return math.inf
    gradient = problem.gradient(x)
    scale = max(1.0, float(np.linalg.norm(gradient)))
    at_floor = x <= problem.log_floor + 1e-9
    free = ~at_floor
    u = problem.norms_sq * np.exp(x)

    price = 0.0
    if load >= 1.0 - ACTIVE_LOAD_TOL and np.any(free):
        u_free = u[free]
        price = max(0.0, float(gradient[free] @ u_free) / float(u_free @ u_free))
    residual = float(np.linalg.norm(gradient[free] - price * u[free])) if np.any(free) else 0.0
    floor_violation = np.maximum(gradient[at_floor] - price * u[at_floor], 0.0)
    residual += float(np.linalg.norm(floor_violation))
    return residual / scale


def _boundary_polish(problem: InnerProblem, x: np.ndarray) -> np.ndarray:
    """Scale all powers up to the full budget when that improves F."""
    load = problem.load(x)
    if load <= 0:
        return x
    candidate = x - math.log(load)
    if problem.value(candidate) > problem.value(x):
        return candidate
    return x


def solve_problem(
    problem: InnerProblem,
    warm_start: np.ndarray,
    tol: float = config.INNER_TOL,
    max_newton: int = config.INNER_MAX_NEWTON,
    raise_on_failure: bool = False,
) -> Tuple[np.ndarray, SolveDiagnostics]:
    """Barrier method on a prepared InnerProblem; see solve_inner_convex."""
    warm_start = np.asarray(warm_start, dtype=float)
    start_value = problem.value(warm_start)

    residual = kkt_residual_at(problem, warm_start)
    if residual <= STATIONARY_TOL:
        logger.debug(f"Warm start already stationary (residual {residual:.2e})")
        return warm_start, SolveDiagnostics(
            objective_trace=[start_value, start_value],
            outer_iterations=0,
            inner_iterations=0,
            kkt_residual=residual,
            converged=True,
        )

    x = _interior_start(problem, warm_start.copy())

    m = problem.num_users + 1
    t = 1.0
    newton_total = 0
    centered = True
    gradient = np.zeros_like(x)
    while True:
        x, steps, centered, gradient = _center(problem, x, t, tol * 1e-2, max_newton)
        newton_total += steps
        logger.debug(f"Barrier stage t={t:.1e}: F={problem.value(x):.12f}, newton={steps}")
        if not centered or m / t < tol:
            break
        t *= BARRIER_GROWTH

    kkt_residual = max(m / t, float(np.linalg.norm(gradient)) / t)
    converged = centered and m / t < tol

    x = _boundary_polish(problem, x)
    final_value = problem.value(x)
    if final_value < start_value:
        # keep the warm start whenever the solve did not improve on it
        x, final_value = warm_start, start_value

    diagnostics = SolveDiagnostics(
        objective_trace=[start_value, final_value],
        outer_iterations=1,
        inner_iterations=newton_total,
        kkt_residual=kkt_residual,
        converged=converged,
    )
    if not converged:
        message = f"Inner solver stopped after {newton_total} Newton steps (gap {m / t:.2e})"
        if raise_on_failure:
            raise MaxIterationsExceeded(message, diagnostics)
        logger.warning(message)
    return x, diagnostics


def solve_inner_convex(
    H: ChannelMatrix,
    W: PrecoderMatrix,
    coeffs: Sequence[TangentCoeffs],
    sigma2: float,
    tol: float = config.INNER_TOL,
    warm_start: Optional[Sequence[float]] = None,
    p_floor: float = config.P_FLOOR,
    max_newton: int = config.INNER_MAX_NEWTON,
    raise_on_failure: bool = False,
) -> Tuple[np.ndarray, SolveDiagnostics]:
    """
    Maximize pa_objective over feasible log-powers.

    Args:
        H (ChannelMatrix): Channel
        W (PrecoderMatrix): Base precoder (columns scaled by sqrt(p))
        coeffs (Sequence[TangentCoeffs]): One tangent per user
        sigma2 (float): Noise variance
        tol (float): Duality-gap tolerance in bits
        warm_start (sequence, optional): Starting log-powers; equal power
            log(1/gamma) when omitted
        p_floor (float): Smallest allowed power
        max_newton (int): Newton steps allowed per centering stage
        raise_on_failure (bool): Raise MaxIterationsExceeded instead of
            returning the best iterate with converged = False

    Returns:
        Tuple[np.ndarray, SolveDiagnostics]: Log-powers and diagnostics; the
            objective at the returned point is never below the warm start's.
    """
    problem = build_problem(H, W, sigma2, coeffs, p_floor=p_floor)
    if warm_start is None:
        warm_start = np.full(H.num_users, -math.log(W.gamma))
    return solve_problem(problem, np.asarray(warm_start, dtype=float), tol, max_newton, raise_on_failure)
