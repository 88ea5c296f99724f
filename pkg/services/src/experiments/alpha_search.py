# services/src/experiments/alpha_search.py
"""
Regularization Search Module

Finite-system optimization of the RCI regularization alpha, either for one
channel realization (alpha_FS(H)) or for the sample average over a common
set of channels (the averaged alpha_FS).

The search runs on log(alpha) over [1e-4 K, 10 K]: a coarse grid locates
the maximum, then golden-section search refines it to a relative tolerance
of 1e-3. The large-system value alpha_LS is always evaluated as well, so the
returned rate is never below the rate at alpha_LS.

Classes:
    AlphaSearchResult: Best alpha, its rate and search flags
    BracketFailure: Raised when the maximum sits on the search boundary

Functions:
    golden_section_log: Coarse grid plus golden-section refinement on log(alpha)
    optimize_alpha_per_channel: alpha_FS(H) for one channel
    optimize_alpha_average: Averaged alpha_FS over seeded channels

Dependencies:
    - numpy
    - pydantic
    - logging
"""

import logging
import math
from typing import Callable, Dict, List, Optional

import numpy as np
from pydantic import BaseModel

from ..channel.channel_model import ChannelMatrix
from ..initial_setup.env_config import config
from ..initial_setup.process_monitor_setup import ProcessMonitor, get_process_monitor
from ..precoder.precoder import rci_precoder
from ..rates.secrecy_rates import secrecy_sum_rate
from .experiment_config import ExperimentError
from .monte_carlo import alpha_ls, draw_channels, run_trials

logger = logging.getLogger(__name__)

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
FLAT_REL_TOL = 1e-9


class AlphaSearchResult(BaseModel):
    alpha: float
    rate_bits: float
    flat: bool = False
    on_boundary: bool = False
    evaluations: int = 0


class BracketFailure(ExperimentError):
    """The maximizing alpha lies on the edge of the search range; `best` holds it."""

    def __init__(self, message: str, best: AlphaSearchResult):
        super().__init__(message)
        self.best = best


def search_bounds(K: int) -> tuple:
    low, high = config.ALPHA_BRACKET
    return low * K, high * K


def golden_section_log(
    objective: Callable[[float], float],
    lower: float,
    upper: float,
    rel_tol: float = config.ALPHA_SEARCH_REL_TOL,
    grid_points: int = config.ALPHA_GRID_POINTS,
    reference: Optional[float] = None,
) -> AlphaSearchResult:
    """
    Maximize objective(alpha) over [lower, upper] on a log scale.

    Args:
        objective (Callable): alpha -> value to maximize
        lower (float): Lower end of the range, > 0
        upper (float): Upper end of the range
        rel_tol (float): Final bracket width as a relative change of alpha
        grid_points (int): Coarse grid size
        reference (float, optional): Extra candidate that the result must
            match or beat

    Returns:
        AlphaSearchResult: Best point found; flat=True when the objective
            does not vary over the grid

    Raises:
        BracketFailure: If the grid maximum is at either end of the range.
    """
    if not 0 < lower < upper:
        raise ExperimentError(f"Invalid alpha range [{lower}, {upper}]")
    cache: Dict[float, float] = {}

    def f(log_alpha: float) -> float:
        if log_alpha not in cache:
            cache[log_alpha] = objective(math.exp(log_alpha))
        return cache[log_alpha]

    grid = np.linspace(math.log(lower), math.log(upper), grid_points)
    values = np.array([f(float(g)) for g in grid])
    best_index = int(np.argmax(values))
    spread = float(values.max() - values.min())

    def finish(flat: bool, on_boundary: bool) -> AlphaSearchResult:
        if reference is not None:
            f(math.log(reference))
        log_best = max(cache, key=lambda key: (cache[key], -abs(key - grid[best_index])))
        return AlphaSearchResult(
            alpha=math.exp(log_best),
            rate_bits=cache[log_best],
            flat=flat,
            on_boundary=on_boundary,
            evaluations=len(cache),
        )

    if spread <= FLAT_REL_TOL * max(1.0, abs(float(values.max()))):
        logger.debug(f"Objective flat over [{lower:.3e}, {upper:.3e}] (spread {spread:.2e})")
        if reference is not None:
            value = f(math.log(reference))
            return AlphaSearchResult(alpha=reference, rate_bits=value, flat=True, evaluations=len(cache))
        return finish(flat=True, on_boundary=False)

    if best_index in (0, grid_points - 1):
        best = finish(flat=False, on_boundary=True)
        raise BracketFailure(
            f"Best alpha {math.exp(grid[best_index]):.4e} is on the search boundary "
            f"[{lower:.3e}, {upper:.3e}]",
            best,
        )

    lo, hi = float(grid[best_index - 1]), float(grid[best_index + 1])
    width_tol = math.log1p(rel_tol)
    c = hi - GOLDEN * (hi - lo)
    d = lo + GOLDEN * (hi - lo)
    fc, fd = f(c), f(d)
    while hi - lo > width_tol:
        if fc >= fd:
            hi, d, fd = d, c, fc
            c = hi - GOLDEN * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + GOLDEN * (hi - lo)
            fd = f(d)
    return finish(flat=False, on_boundary=False)


def _rate_at(H: ChannelMatrix, alpha: float, sigma2: float) -> float:
    return secrecy_sum_rate(H, rci_precoder(H, alpha, verify_dual=False), sigma2).sum_bits


def optimize_alpha_per_channel(
    H: ChannelMatrix,
    sigma2: float,
    rel_tol: float = config.ALPHA_SEARCH_REL_TOL,
    grid_points: int = config.ALPHA_GRID_POINTS,
) -> AlphaSearchResult:
    """
    alpha_FS(H): the alpha maximizing the secrecy sum-rate of this channel.

    Raises:
        ExperimentError: If H = 0.
        BracketFailure: If the maximum is on the boundary of [1e-4 K, 10 K].
    """
    if H.is_zero():
        raise ExperimentError("Regularization search needs a nonzero channel")
    K = H.num_users
    rho = 0.0 if math.isinf(sigma2) else 1.0 / sigma2
    lower, upper = search_bounds(K)
    return golden_section_log(
        lambda alpha: _rate_at(H, alpha, sigma2),
        lower,
        upper,
        rel_tol=rel_tol,
        grid_points=grid_points,
        reference=alpha_ls(rho, K),
    )


def optimize_alpha_average(
    K: int,
    M: int,
    rho: float,
    trials: int,
    seed: int,
    threads: int = 1,
    rel_tol: float = config.ALPHA_SEARCH_REL_TOL,
    grid_points: int = config.ALPHA_GRID_POINTS,
    channels: Optional[List[ChannelMatrix]] = None,
    process_monitor: Optional[ProcessMonitor] = None,
) -> AlphaSearchResult:
    """
    Averaged alpha_FS: maximizes the sample mean of the secrecy sum-rate over
    the channels seeded by (seed, 0..trials-1). Every alpha is evaluated on
    the same channels.

    Raises:
        BracketFailure: If the maximum is on the boundary of [1e-4 K, 10 K].
    """
    monitor = process_monitor if process_monitor is not None else get_process_monitor()
    stage = "alpha_search_average"
    monitor.start_stage(stage)
    if channels is None:
        channels = draw_channels(K, M, trials, seed)
    sigma2 = math.inf if rho == 0 else 1.0 / rho

    def mean_rate(alpha: float) -> float:
        rates = run_trials(lambda i: _rate_at(channels[i], alpha, sigma2), len(channels), threads)
        return float(np.mean(rates))

    lower, upper = search_bounds(K)
    try:
        result = golden_section_log(
            mean_rate, lower, upper, rel_tol=rel_tol, grid_points=grid_points, reference=alpha_ls(rho, K)
        )
    except BracketFailure as e:
        monitor.add_stage_details(stage, alpha=e.best.alpha)
        monitor.end_stage(stage, "boundary")
        raise
    logger.info(f"Averaged alpha for K={K}, M={M}, rho={rho:.4g}: {result.alpha:.6g} ({result.rate_bits:.4f} bits)")
    monitor.add_stage_details(stage, alpha=result.alpha)
    monitor.end_stage(stage)
    return result
