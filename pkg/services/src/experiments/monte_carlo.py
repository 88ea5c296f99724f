# services/src/experiments/monte_carlo.py
"""
Monte Carlo Harness Module

Runs independent channel trials and reduces them in trial order. Trial i
always draws its channel from RngSpec(master_seed, i), so every scheme and
every alpha evaluated within a sweep sees the same channels, and the result
does not depend on the number of worker threads.

Functions:
    run_trials: Maps a per-trial function over trial indices in a thread pool
    draw_channels: The common channel set of a sweep
    mean_and_stderr: Sample mean and standard error
    alpha_ls / alpha_xi_inv_rho / constant_alpha: Regularization rules
    average_secrecy_sum_rate: Averaged RCI secrecy sum-rate over an SNR grid

Dependencies:
    - numpy
    - concurrent.futures
    - logging
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence, Tuple, TypeVar

import numpy as np

from ..channel.channel_model import ChannelMatrix, RngSpec, sample_channel
from ..initial_setup.process_monitor_setup import ProcessMonitor, get_process_monitor
from ..large_system.asymptotics import xi_opt
from ..precoder.precoder import rci_precoder
from ..rates.secrecy_rates import secrecy_sum_rate
from .experiment_config import ExperimentConfig, ExperimentError
from .results import SweepPoint, SweepResult, build_metadata

logger = logging.getLogger(__name__)

T = TypeVar("T")
AlphaRule = Callable[[float, int, ChannelMatrix], float]


def run_trials(trial_fn: Callable[[int], T], trials: int, threads: int = 1) -> List[T]:
    """
    Evaluate trial_fn(i) for i = 0..trials-1 and return results in index order.

    Raises:
        ExperimentError: Wrapping the first failing trial's exception.
    """

    def guarded(index: int) -> T:
        try:
            return trial_fn(index)
        except ExperimentError:
            raise
        except Exception as e:
            raise ExperimentError(f"trial {index} failed: {e}") from e

    if threads <= 1 or trials <= 1:
        return [guarded(i) for i in range(trials)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(guarded, range(trials)))


def draw_channels(K: int, M: int, trials: int, master_seed: int) -> List[ChannelMatrix]:
    return [sample_channel(K, M, RngSpec(master_seed, i)) for i in range(trials)]


def mean_and_stderr(values: Sequence[float]) -> Tuple[float, float]:
    """Mean and standard error (sample std / sqrt(n)); stderr is 0 for n <= 1."""
    data = np.asarray(values, dtype=float)
    if data.size == 0:
        return math.nan, 0.0
    if data.size == 1:
        return float(data[0]), 0.0
    return float(np.mean(data)), float(np.std(data, ddof=1) / math.sqrt(data.size))


def snr_to_rho(snr_db: float) -> float:
    return 10.0 ** (snr_db / 10.0)


def alpha_ls(rho: float, K: int, H: Optional[ChannelMatrix] = None) -> float:
    """Large-system regularization K xi_opt(rho)."""
    return K * xi_opt(rho)


def alpha_xi_inv_rho(rho: float, K: int, H: Optional[ChannelMatrix] = None) -> float:
    """Sum-rate regularization K / rho."""
    if not rho > 0:
        raise ExperimentError("alpha = K / rho needs rho > 0")
    return K / rho


def constant_alpha(value: float) -> AlphaRule:
    def rule(rho: float, K: int, H: Optional[ChannelMatrix] = None) -> float:
        return value

    return rule


def average_secrecy_sum_rate(
    config: ExperimentConfig,
    alpha_rule: AlphaRule = alpha_ls,
    scheme_label: str = "rci",
    process_monitor: Optional[ProcessMonitor] = None,
) -> SweepResult:
    """
    Mean and standard error of the RCI secrecy sum-rate over the SNR grid.

    Args:
        config (ExperimentConfig): K, M, grid, trials, seed and threads
        alpha_rule (AlphaRule): alpha as a function of (rho, K, H)
        scheme_label (str): Label stored with every point
        process_monitor (ProcessMonitor, optional): Stage timing

    Returns:
        SweepResult: One point per SNR, with the mean alpha as an extra
    """
    monitor = process_monitor if process_monitor is not None else get_process_monitor()
    stage = f"sweep_{scheme_label}"
    monitor.start_stage(stage)

    channels = draw_channels(config.K, config.M, config.trials, config.master_seed)
    points = []
    for snr_db in config.snr_grid_db:
        rho = snr_to_rho(snr_db)
        sigma2 = 1.0 / rho

        def trial(i: int) -> Tuple[float, float]:
            H = channels[i]
            alpha = alpha_rule(rho, config.K, H)
            return secrecy_sum_rate(H, rci_precoder(H, alpha, verify_dual=False), sigma2).sum_bits, alpha

        outcomes = run_trials(trial, config.trials, config.threads)
        mean, stderr = mean_and_stderr([rate for rate, _ in outcomes])
        points.append(
            SweepPoint(
                snr_db=snr_db,
                scheme=scheme_label,
                mean_rate_bits=mean,
                std_err=stderr,
                n=config.trials,
                extra={"alpha": float(np.mean([alpha for _, alpha in outcomes]))},
            )
        )
        logger.info(f"{scheme_label} at {snr_db:g} dB: {mean:.4f} +/- {stderr:.4f} bits")

    monitor.add_stage_details(stage, snr_points=len(points), trials=config.trials)
    monitor.end_stage(stage)
    return SweepResult(
        per_point=points,
        metadata=build_metadata(
            "average_secrecy_sum_rate",
            config=config.echo(),
            alpha_rule=getattr(alpha_rule, "__name__", "custom"),
        ),
    )
