# services/src/power_alloc/sca.py
"""
SCA Power Allocation Module

This module maximizes the power-allocated secrecy sum-rate of the RCI
precoder. At a fixed regularization the non-concave rate is raised by
successive convex approximation: each user's intended-rate term is replaced
by its tangent lower bound at the current SINR and the resulting concave
problem is solved by the barrier method. The joint optimizer alternates a
steepest-ascent step on alpha with a new SCA run.

Both drivers return power vectors whose clipped secrecy sum-rate is never
below the equal-power point of the same precoder.

Functions:
    sca_power_allocation: Power allocation at a fixed alpha
    joint_optimize: Alternating optimization of alpha and p
    true_secrecy_rate: Clipped secrecy sum-rate of (alpha, p)

Dependencies:
    - numpy
    - logging
"""

import logging
import math
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..channel.channel_model import ChannelMatrix, DimensionError
from ..initial_setup.env_config import config
from ..large_system.asymptotics import xi_opt
from ..precoder.precoder import PowerVector, PrecoderMatrix, ci_precoder, rci_precoder
from ..rates.secrecy_rates import (
    RatesError,
    gain_matrix,
    pa_sinr_vectors,
    secrecy_rate_bits,
)
from .barrier_solver import (
    InnerProblem,
    MaxIterationsExceeded,
    SolveDiagnostics,
    solve_problem,
)
from .tangent_bound import tangent_coeffs_vector

logger = logging.getLogger(__name__)

ARMIJO_C = 1e-4
MAX_BACKTRACKS = 30
MAX_ALPHA_STEPS = 20
ALPHA_STEP_REL_TOL = 1e-4


def _precoder_for(H: ChannelMatrix, alpha: float) -> PrecoderMatrix:
    if alpha > 0:
        return rci_precoder(H, alpha, verify_dual=False)
    return ci_precoder(H)


class _RateEvaluator:
    """Per-user unclipped secrecy rates of one precoder for varying powers."""

    def __init__(self, H: ChannelMatrix, W: PrecoderMatrix, sigma2: float):
        self.W = W
        self.sigma2 = sigma2
        self.gains = gain_matrix(H, W)
        self.norms_sq = W.column_norms_sq()

    def sinrs(self, p: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return pa_sinr_vectors(self.gains, p, self.sigma2)

    def per_user(self, p: np.ndarray) -> np.ndarray:
        return secrecy_rate_bits(*self.sinrs(p))

    def unclipped(self, p: np.ndarray) -> float:
        return float(np.sum(self.per_user(p)))

    def clipped(self, p: np.ndarray) -> float:
        return float(np.sum(np.maximum(self.per_user(p), 0.0)))

    def problem(self, anchor_sinrs: np.ndarray, p_floor: float) -> InnerProblem:
        a, b = tangent_coeffs_vector(anchor_sinrs)
        return InnerProblem(
            gains=self.gains, norms_sq=self.norms_sq, sigma2=self.sigma2, a=a, b=b, p_floor=p_floor
        )


def _fit_budget(p: np.ndarray, norms_sq: np.ndarray) -> np.ndarray:
    load = float(np.dot(norms_sq, p))
    return p / load if load > 1.0 else p


def _mute_negative_users(evaluator: _RateEvaluator, p: np.ndarray, p_floor: float) -> np.ndarray:
    """Drop users with a negative unclipped rate to the power floor."""
    negative = evaluator.per_user(p) < 0
    if not np.any(negative):
        return p
    muted = p.copy()
    muted[negative] = np.minimum(muted[negative], p_floor)
    return muted


def _sca_with_precoder(
    H: ChannelMatrix,
    W: PrecoderMatrix,
    sigma2: float,
    tol: float,
    max_outer: int,
    initial_powers: Optional[Sequence[float]],
    p_floor: float,
    inner_tol: float,
    inner_max_newton: int,
    raise_on_failure: bool,
) -> Tuple[PowerVector, SolveDiagnostics]:
    evaluator = _RateEvaluator(H, W, sigma2)
    equal = PowerVector.equal_power(W, p_floor=p_floor).p

    if math.isinf(sigma2):
        return PowerVector.from_powers(equal, p_floor=p_floor), SolveDiagnostics(
            objective_trace=[0.0], converged=True
        )

    if initial_powers is None:
        start = equal
    else:
        start = _fit_budget(np.asarray(initial_powers, dtype=float), evaluator.norms_sq)
    x = np.log(np.maximum(start, p_floor))
    trace = [evaluator.unclipped(np.exp(x))]

    # First anchor: a = 1, b = 0 for every user
    a_first = np.ones(H.num_users)
    problem = InnerProblem(
        gains=evaluator.gains,
        norms_sq=evaluator.norms_sq,
        sigma2=sigma2,
        a=a_first,
        b=np.zeros(H.num_users),
        p_floor=p_floor,
    )

    inner_total = 0
    kkt_residual = 0.0
    converged = False
    outer = 0
    for outer in range(1, max_outer + 1):
        x_new, inner = solve_problem(problem, x, tol=inner_tol, max_newton=inner_max_newton)
        inner_total += inner.inner_iterations
        kkt_residual = inner.kkt_residual
        rate_new = evaluator.unclipped(np.exp(x_new))

        if outer == 1 and rate_new < trace[-1]:
            # The a = 1 surrogate is not tight; restart from the anchored bound
            logger.debug(f"First SCA step lowered the rate ({rate_new:.6f} < {trace[-1]:.6f}); re-anchoring")
        else:
            change = rate_new - trace[-1]
            trace.append(rate_new)
            x = x_new
            logger.debug(f"SCA iteration {outer}: rate={rate_new:.9f} bits, change={change:.3e}")
            if abs(change) < tol:
                converged = True
                break

        intended, _ = evaluator.sinrs(np.exp(x))
        problem = evaluator.problem(intended, p_floor)

    diagnostics = SolveDiagnostics(
        objective_trace=trace,
        outer_iterations=outer,
        inner_iterations=inner_total,
        kkt_residual=kkt_residual,
        converged=converged,
    )
    if not converged:
        message = f"SCA stopped after {max_outer} outer iterations without meeting tol={tol:g}"
        if raise_on_failure:
            raise MaxIterationsExceeded(message, diagnostics)
        logger.warning(message)

    candidates = [_mute_negative_users(evaluator, np.exp(x), p_floor), equal]
    if initial_powers is not None:
        candidates.append(_mute_negative_users(evaluator, start, p_floor))
    best = max(candidates, key=evaluator.clipped)
    if best is not candidates[0]:
        logger.debug("SCA result did not beat its reference point; keeping the reference")

    powers = PowerVector.from_powers(best, p_floor=p_floor)
    diagnostics.muted_users = [int(k) for k in np.flatnonzero(powers.muted())]
    return powers, diagnostics


def sca_power_allocation(
    H: ChannelMatrix,
    alpha: float,
    sigma2: float,
    tol: float = config.SCA_TOL,
    max_outer: int = config.SCA_MAX_OUTER,
    initial_powers: Optional[Sequence[float]] = None,
    p_floor: float = config.P_FLOOR,
    inner_tol: float = config.INNER_TOL,
    inner_max_newton: int = config.INNER_MAX_NEWTON,
    raise_on_failure: bool = False,
) -> Tuple[PowerVector, SolveDiagnostics]:
    """
    SCA power allocation for the RCI precoder at a fixed alpha.

    Starts from equal power (or initial_powers) with a = 1, b = 0, then
    re-anchors the tangent bounds at the current intended SINRs after each
    inner solve. Stops when the unclipped secrecy sum-rate changes by less
    than tol or after max_outer iterations. Users left with a negative rate
    are muted at p_floor.

    Args:
        H (ChannelMatrix): Channel
        alpha (float): Regularization; 0 selects channel inversion
        sigma2 (float): Noise variance
        tol (float): Stopping tolerance on the rate, bits
        max_outer (int): Outer iteration limit
        initial_powers (sequence, optional): Warm start
        p_floor (float): Power floor for muted users
        inner_tol (float): Barrier duality-gap tolerance
        inner_max_newton (int): Newton steps per centering stage
        raise_on_failure (bool): Raise MaxIterationsExceeded instead of
            flagging converged = False

    Returns:
        Tuple[PowerVector, SolveDiagnostics]: Powers and convergence record
    """
    if not sigma2 > 0:
        raise RatesError(f"Noise variance must be positive, got {sigma2}")
    if initial_powers is not None and len(initial_powers) != H.num_users:
        raise DimensionError(f"Warm start has {len(initial_powers)} entries for K={H.num_users}")
    W = _precoder_for(H, alpha)
    return _sca_with_precoder(
        H, W, sigma2, tol, max_outer, initial_powers, p_floor, inner_tol, inner_max_newton, raise_on_failure
    )


def true_secrecy_rate(H: ChannelMatrix, alpha: float, p: Union[PowerVector, np.ndarray], sigma2: float) -> float:
    """Clipped secrecy sum-rate of RCI(alpha) with powers p, in bits."""
    powers = p.p if isinstance(p, PowerVector) else np.asarray(p, dtype=float)
    return _RateEvaluator(H, _precoder_for(H, alpha), sigma2).clipped(powers)


def _rescaled_rate(H: ChannelMatrix, alpha: float, p: np.ndarray, sigma2: float) -> Tuple[float, np.ndarray]:
    """Rate at alpha after shrinking p into the budget of the new precoder."""
    evaluator = _RateEvaluator(H, _precoder_for(H, alpha), sigma2)
    scaled = _fit_budget(p, evaluator.norms_sq)
    return evaluator.clipped(scaled), scaled


def _alpha_derivative(f: Callable[[float], float], alpha: float, lower: float, upper: float) -> float:
    h = max(1e-6, 1e-4 * alpha)
    if alpha - h < lower:
        return (f(alpha + h) - f(alpha)) / h
    if alpha + h > upper:
        return (f(alpha) - f(alpha - h)) / h
    return (f(alpha + h) - f(alpha - h)) / (2.0 * h)


def _ascend_alpha(
    H: ChannelMatrix, alpha: float, p: np.ndarray, sigma2: float, tol: float
) -> Tuple[float, float, np.ndarray]:
    """Projected steepest ascent on alpha with Armijo backtracking, p held fixed up to rescaling."""
    lower, upper = config.ALPHA_BOUNDS[0], config.ALPHA_BOUNDS[1] * H.num_users

    def rate(a: float) -> float:
        return _rescaled_rate(H, a, p, sigma2)[0]

    current = rate(alpha)
    for step_index in range(MAX_ALPHA_STEPS):
        slope = _alpha_derivative(rate, alpha, lower, upper)
        if slope == 0.0:
            break
        step = alpha / abs(slope)
        accepted = False
        for _ in range(MAX_BACKTRACKS):
            candidate = min(max(alpha + step * slope, lower), upper)
            value = rate(candidate)
            if value >= current + ARMIJO_C * slope * (candidate - alpha) and value > current:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
        moved = abs(candidate - alpha) / alpha
        improvement = value - current
        alpha, current = candidate, value
        logger.debug(f"alpha step {step_index}: alpha={alpha:.6e}, rate={current:.9f}")
        if moved < ALPHA_STEP_REL_TOL or improvement < tol:
            break

    _, scaled = _rescaled_rate(H, alpha, p, sigma2)
    return alpha, current, scaled


def joint_optimize(
    H: ChannelMatrix,
    sigma2: float,
    tol: float = config.JOINT_TOL,
    max_outer: int = config.JOINT_MAX_OUTER,
    sca_tol: float = config.SCA_TOL,
    p_floor: float = config.P_FLOOR,
    raise_on_failure: bool = False,
    sca_max_outer: int = config.SCA_MAX_OUTER,
    inner_tol: float = config.INNER_TOL,
    inner_max_newton: int = config.INNER_MAX_NEWTON,
) -> Tuple[float, PowerVector, SolveDiagnostics]:
    """
    Alternating optimization of the regularization and the power allocation.

    Starts from alpha_0 = K xi_opt(rho) and the SCA allocation at alpha_0,
    then repeats: steepest ascent on alpha with p rescaled into the budget,
    followed by SCA warm-started from the rescaled p. Stops when the clipped
    secrecy sum-rate improves by less than tol or after max_outer rounds.
    A round that lowers the rate is discarded, so the result is never below
    the SCA allocation at alpha_0.

    Returns:
        Tuple[float, PowerVector, SolveDiagnostics]: alpha, powers and the
            outer trace of clipped secrecy sum-rates
    """
    if not sigma2 > 0:
        raise RatesError(f"Noise variance must be positive, got {sigma2}")
    K = H.num_users
    rho = 0.0 if math.isinf(sigma2) else 1.0 / sigma2
    alpha = K * xi_opt(rho)
    sca_options = {
        "tol": sca_tol,
        "max_outer": sca_max_outer,
        "p_floor": p_floor,
        "inner_tol": inner_tol,
        "inner_max_newton": inner_max_newton,
    }

    powers, first = sca_power_allocation(H, alpha, sigma2, **sca_options)
    p = powers.p
    rate = true_secrecy_rate(H, alpha, p, sigma2)
    trace: List[float] = [rate]
    inner_total = first.inner_iterations
    kkt_residual = first.kkt_residual
    converged = math.isinf(sigma2)
    outer = 0

    while not converged and outer < max_outer:
        outer += 1
        new_alpha, _, scaled = _ascend_alpha(H, alpha, p, sigma2, tol)
        powers, inner = sca_power_allocation(H, new_alpha, sigma2, initial_powers=scaled, **sca_options)
        inner_total += inner.inner_iterations
        new_rate = true_secrecy_rate(H, new_alpha, powers.p, sigma2)
        improvement = new_rate - rate
        logger.debug(f"Joint round {outer}: alpha={new_alpha:.6e}, rate={new_rate:.9f} bits")
        if improvement < 0.0:
            logger.debug(f"Joint round {outer} lowered the rate by {-improvement:.3e}; keeping alpha={alpha:.6e}")
            converged = True
            break
        alpha, p, rate = new_alpha, powers.p, new_rate
        kkt_residual = inner.kkt_residual
        trace.append(rate)
        if improvement < tol:
            converged = True

    diagnostics = SolveDiagnostics(
        objective_trace=trace,
        outer_iterations=outer,
        inner_iterations=inner_total,
        kkt_residual=kkt_residual,
        converged=converged,
    )
    if not converged:
        message = f"Joint optimization stopped after {max_outer} rounds without meeting tol={tol:g}"
        if raise_on_failure:
            raise MaxIterationsExceeded(message, diagnostics)
        logger.warning(message)

    result = PowerVector.from_powers(p, p_floor=p_floor)
    diagnostics.muted_users = [int(k) for k in np.flatnonzero(result.muted())]
    return alpha, result, diagnostics
