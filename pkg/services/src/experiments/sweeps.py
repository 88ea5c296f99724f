# services/src/experiments/sweeps.py
"""
Experiment Sweeps Module

The Monte Carlo experiments built on the harness: comparison of precoding
schemes, power allocation gains, the CCDF of the alpha_LS penalty, finite
versus large-system regularization and large-system convergence.

Every sweep draws its channels once from (master_seed, trial index) and
evaluates all schemes, SNR points and alpha values on that same set.

Functions:
    scheme_comparison_sweep: Mean secrecy sum-rate of each scheme over SNR
    power_allocation_sweep: Per-user rate of EP, PA at alpha_LS and joint (alpha, p)
    ccdf_alpha_penalty: CCDF of the normalized rate loss of alpha_LS
    alpha_comparison_sweep: alpha_LS against the averaged alpha_FS
    large_system_convergence: Simulated rate against the closed form as K grows

Dependencies:
    - numpy
    - logging
"""

import logging
import math
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..channel.channel_model import ChannelMatrix
from ..initial_setup.env_config import config as env_config
from ..initial_setup.process_monitor_setup import ProcessMonitor, get_process_monitor
from ..large_system.asymptotics import optimal_secrecy_sum_rate
from ..power_alloc.sca import joint_optimize, sca_power_allocation, true_secrecy_rate
from ..precoder.precoder import ci_precoder, mf_precoder, rci_precoder
from ..rates.secrecy_rates import secrecy_sum_rate, sum_rate_without_secrecy
from .alpha_search import AlphaSearchResult, BracketFailure, optimize_alpha_average, optimize_alpha_per_channel
from .experiment_config import ExperimentConfig, ExperimentError, Scheme
from .monte_carlo import alpha_ls, draw_channels, mean_and_stderr, run_trials, snr_to_rho
from .results import CcdfTable, SweepPoint, SweepResult, build_metadata

logger = logging.getLogger(__name__)

DOMINANCE_TOL = 1e-6
MISOME_LABEL = "misome-bound"


def _solver_options() -> Tuple[Dict[str, Any], Dict[str, Any]]:
    """Keyword arguments for sca_power_allocation and joint_optimize, from the environment."""
    params = env_config.get_solver_params()
    sca = {
        "tol": params["sca_tol"],
        "max_outer": params["sca_max_outer"],
        "inner_tol": params["inner_tol"],
        "inner_max_newton": params["inner_max_newton"],
        "p_floor": params["p_floor"],
    }
    joint = {
        "tol": params["joint_tol"],
        "max_outer": params["joint_max_outer"],
        "sca_tol": params["sca_tol"],
        "sca_max_outer": params["sca_max_outer"],
        "inner_tol": params["inner_tol"],
        "inner_max_newton": params["inner_max_newton"],
        "p_floor": params["p_floor"],
    }
    return sca, joint


def _rci_rate(H: ChannelMatrix, alpha: float, sigma2: float) -> float:
    return secrecy_sum_rate(H, rci_precoder(H, alpha, verify_dual=False), sigma2).sum_bits


def _per_channel_search(H: ChannelMatrix, sigma2: float) -> Tuple[AlphaSearchResult, bool]:
    """alpha_FS(H), falling back to the best boundary point. Second value flags the fallback."""
    try:
        return optimize_alpha_per_channel(H, sigma2), False
    except BracketFailure as e:
        return e.best, True


def _scheme_trial(
    scheme: Scheme, H: ChannelMatrix, rho: float, averaged_alpha: Optional[float]
) -> Tuple[float, Dict[str, float]]:
    """Rate of one scheme on one channel plus per-trial counters."""
    K = H.num_users
    sigma2 = 1.0 / rho

    if scheme == Scheme.RCI_LS:
        alpha = alpha_ls(rho, K)
        return _rci_rate(H, alpha, sigma2), {"alpha": alpha}
    if scheme == Scheme.RCI_FS_AVG:
        return _rci_rate(H, averaged_alpha, sigma2), {"alpha": averaged_alpha}
    if scheme == Scheme.RCI_FS_PER_CHANNEL:
        best, boundary = _per_channel_search(H, sigma2)
        counters = {"alpha": best.alpha, "boundary": float(boundary), "flat": float(best.flat)}
        return best.rate_bits, counters
    if scheme == Scheme.CI:
        return secrecy_sum_rate(H, ci_precoder(H), sigma2).sum_bits, {}
    if scheme == Scheme.MF:
        return secrecy_sum_rate(H, mf_precoder(H), sigma2).sum_bits, {}
    if scheme == Scheme.RCI_XI_INV_RHO:
        alpha = K / rho
        return _rci_rate(H, alpha, sigma2), {"alpha": alpha}
    if scheme == Scheme.RCI_NO_SECRECY:
        alpha = K / rho
        W = rci_precoder(H, alpha, verify_dual=False)
        return sum_rate_without_secrecy(H, W, sigma2), {"alpha": alpha}
    if scheme == Scheme.RCI_PA_FIXED_ALPHA:
        alpha = alpha_ls(rho, K)
        powers, diagnostics = sca_power_allocation(H, alpha, sigma2, **_solver_options()[0])
        counters = {"alpha": alpha, "soft_failures": float(not diagnostics.converged)}
        return true_secrecy_rate(H, alpha, powers, sigma2), counters
    if scheme == Scheme.RCI_PA_JOINT:
        alpha, powers, diagnostics = joint_optimize(H, sigma2, **_solver_options()[1])
        counters = {"alpha": alpha, "soft_failures": float(not diagnostics.converged)}
        return true_secrecy_rate(H, alpha, powers, sigma2), counters
    raise ExperimentError(f"Unsupported scheme {scheme}")


def _reduce_counters(outcomes: List[Tuple[float, Dict[str, float]]]) -> Dict[str, float]:
    """alpha is averaged over trials; every other counter is summed."""
    keys = sorted({key for _, counters in outcomes for key in counters})
    extra: Dict[str, float] = {}
    for key in keys:
        values = [counters[key] for _, counters in outcomes if key in counters]
        extra[key] = float(np.mean(values)) if key == "alpha" else float(np.sum(values))
    return extra


def scheme_comparison_sweep(
    config: ExperimentConfig, process_monitor: Optional[ProcessMonitor] = None
) -> SweepResult:
    """
    Mean secrecy sum-rate and standard error of every requested scheme.

    RCI_NO_SECRECY reports the sum-rate without secrecy at alpha = K/rho.
    RCI_FS_AVG uses the alpha maximizing the average over this sweep's own
    channels. Boundary hits of the alpha searches and soft failures of the
    power allocation are counted in each point's extra columns.

    Returns:
        SweepResult: One point per (scheme, SNR), grouped by scheme
    """
    monitor = process_monitor if process_monitor is not None else get_process_monitor()
    channels = draw_channels(config.K, config.M, config.trials, config.master_seed)
    result = SweepResult(
        metadata=build_metadata("scheme_comparison_sweep", config=config.echo()),
    )

    for scheme in config.schemes:
        stage = f"sweep_{scheme.value}"
        monitor.start_stage(stage)
        for snr_db in config.snr_grid_db:
            rho = snr_to_rho(snr_db)
            averaged_alpha = None
            averaged_boundary = 0.0
            if scheme == Scheme.RCI_FS_AVG:
                try:
                    averaged_alpha = optimize_alpha_average(
                        config.K,
                        config.M,
                        rho,
                        config.trials,
                        config.master_seed,
                        threads=config.threads,
                        channels=channels,
                        process_monitor=monitor,
                    ).alpha
                except BracketFailure as e:
                    logger.warning(f"Averaged alpha search at {snr_db:g} dB hit the boundary: {e}")
                    averaged_alpha = e.best.alpha
                    averaged_boundary = 1.0

            outcomes = run_trials(
                lambda i: _scheme_trial(scheme, channels[i], rho, averaged_alpha),
                config.trials,
                config.threads,
            )
            mean, stderr = mean_and_stderr([rate for rate, _ in outcomes])
            extra = _reduce_counters(outcomes)
            if scheme == Scheme.RCI_FS_AVG:
                extra["boundary"] = averaged_boundary
            if extra.get("soft_failures"):
                logger.warning(
                    f"{scheme.value} at {snr_db:g} dB: {int(extra['soft_failures'])} trials did not converge"
                )
            result.per_point.append(
                SweepPoint(
                    snr_db=snr_db,
                    scheme=scheme.value,
                    mean_rate_bits=mean,
                    std_err=stderr,
                    n=config.trials,
                    extra=extra,
                )
            )
            logger.info(f"{scheme.value} at {snr_db:g} dB: {mean:.4f} +/- {stderr:.4f} bits")
        monitor.add_stage_details(stage, snr_points=len(config.snr_grid_db), trials=config.trials)
        monitor.end_stage(stage)
    return result


def power_allocation_sweep(
    config: ExperimentConfig, process_monitor: Optional[ProcessMonitor] = None
) -> SweepResult:
    """
    Per-user secrecy rate (sum / K) without power allocation, with SCA power
    allocation at alpha_LS and with joint (alpha, p) optimization, plus the
    high-SNR benchmark 0.5 log2(rho) of a single user with an eavesdropper.

    Per trial the rates should satisfy joint >= PA >= EP; violations beyond
    1e-6 bits are counted in the `dominance_violations` extra column.
    """
    monitor = process_monitor if process_monitor is not None else get_process_monitor()
    stage = "power_alloc"
    monitor.start_stage(stage)
    K = config.K
    channels = draw_channels(K, config.M, config.trials, config.master_seed)
    result = SweepResult(metadata=build_metadata("power_allocation_sweep", config=config.echo()))
    soft_failures_total = 0
    sca_options, joint_options = _solver_options()

    for snr_db in config.snr_grid_db:
        rho = snr_to_rho(snr_db)
        sigma2 = 1.0 / rho

        def trial(i: int) -> Tuple[float, float, float, float, int]:
            H = channels[i]
            alpha = alpha_ls(rho, K)
            ep = _rci_rate(H, alpha, sigma2)
            powers, fixed_diag = sca_power_allocation(H, alpha, sigma2, **sca_options)
            pa = true_secrecy_rate(H, alpha, powers, sigma2)
            joint_alpha, joint_powers, joint_diag = joint_optimize(H, sigma2, **joint_options)
            joint = true_secrecy_rate(H, joint_alpha, joint_powers, sigma2)
            failures = int(not fixed_diag.converged) + int(not joint_diag.converged)
            return ep, pa, joint, joint_alpha, failures

        outcomes = run_trials(trial, config.trials, config.threads)
        ep = np.array([o[0] for o in outcomes])
        pa = np.array([o[1] for o in outcomes])
        joint = np.array([o[2] for o in outcomes])
        failures = int(sum(o[4] for o in outcomes))
        soft_failures_total += failures

        pa_violations = int(np.sum(pa < ep - DOMINANCE_TOL))
        joint_violations = int(np.sum(joint < pa - DOMINANCE_TOL))
        if pa_violations or joint_violations:
            logger.warning(
                f"Dominance violated at {snr_db:g} dB: PA<EP in {pa_violations}, joint<PA in {joint_violations} trials"
            )

        ep_mean, ep_err = mean_and_stderr(ep / K)
        pa_mean, pa_err = mean_and_stderr(pa / K)
        joint_mean, joint_err = mean_and_stderr(joint / K)
        gain = (pa_mean - ep_mean) / ep_mean if ep_mean > 0 else 0.0
        result.per_point.extend(
            [
                SweepPoint(
                    snr_db=snr_db, scheme=Scheme.RCI_LS.value, mean_rate_bits=ep_mean, std_err=ep_err, n=config.trials
                ),
                SweepPoint(
                    snr_db=snr_db,
                    scheme=Scheme.RCI_PA_FIXED_ALPHA.value,
                    mean_rate_bits=pa_mean,
                    std_err=pa_err,
                    n=config.trials,
                    extra={"relative_gain": gain, "dominance_violations": float(pa_violations)},
                ),
                SweepPoint(
                    snr_db=snr_db,
                    scheme=Scheme.RCI_PA_JOINT.value,
                    mean_rate_bits=joint_mean,
                    std_err=joint_err,
                    n=config.trials,
                    extra={
                        "alpha": float(np.mean([o[3] for o in outcomes])),
                        "dominance_violations": float(joint_violations),
                        "soft_failures": float(failures),
                    },
                ),
                SweepPoint(
                    snr_db=snr_db,
                    scheme=MISOME_LABEL,
                    mean_rate_bits=max(0.0, 0.5 * math.log2(rho)),
                    std_err=0.0,
                    n=0,
                ),
            ]
        )
        logger.info(f"Power allocation at {snr_db:g} dB: EP {ep_mean:.4f}, PA {pa_mean:.4f}, joint {joint_mean:.4f}")

    monitor.add_stage_details(stage, trials=config.trials, soft_failures=soft_failures_total)
    monitor.end_stage(stage)
    return result


def ccdf_alpha_penalty(
    K: int,
    rho: float,
    trials: int,
    seed: int,
    thresholds: Sequence[float],
    M: Optional[int] = None,
    threads: int = 1,
    process_monitor: Optional[ProcessMonitor] = None,
) -> CcdfTable:
    """
    CCDF of d = (R(alpha_FS(H)) - R(alpha_LS)) / R(alpha_FS(H)) over channels.

    Trials with R(alpha_FS(H)) = 0 are skipped and counted. Trials whose
    per-channel search ends on the boundary use the best boundary point and
    are counted too.
    """
    if not rho > 0:
        raise ExperimentError(f"CCDF needs rho > 0, got {rho}")
    M = K if M is None else M
    monitor = process_monitor if process_monitor is not None else get_process_monitor()
    stage = "ccdf"
    monitor.start_stage(stage)
    sigma2 = 1.0 / rho
    channels = draw_channels(K, M, trials, seed)

    def trial(i: int) -> Tuple[Optional[float], bool]:
        H = channels[i]
        best, boundary = _per_channel_search(H, sigma2)
        if best.rate_bits <= 0.0:
            return None, boundary
        reference = _rci_rate(H, alpha_ls(rho, K), sigma2)
        return (best.rate_bits - reference) / best.rate_bits, boundary

    outcomes = run_trials(trial, trials, threads)
    diffs = np.array([d for d, _ in outcomes if d is not None], dtype=float)
    skipped = trials - diffs.size
    boundary = sum(1 for _, hit in outcomes if hit)
    if skipped:
        logger.warning(f"Skipped {skipped} of {trials} trials with zero optimized secrecy sum-rate")

    ordered = sorted(float(t) for t in thresholds)
    if diffs.size:
        ccdf = [float(np.mean(diffs > t)) for t in ordered]
        mean_diff = float(np.mean(diffs))
    else:
        ccdf = [0.0 for _ in ordered]
        mean_diff = 0.0
    logger.info(f"alpha_LS penalty for K={K}, M={M}, rho={rho:.4g}: mean {mean_diff:.4%}")

    monitor.add_stage_details(stage, trials=trials, skipped_trials=skipped)
    monitor.end_stage(stage)
    return CcdfTable(
        thresholds=ordered,
        ccdf=ccdf,
        mean_diff=mean_diff,
        trials=trials,
        skipped=skipped,
        boundary=boundary,
        metadata=build_metadata("ccdf_alpha_penalty", K=K, M=M, rho=rho, seed=seed),
    )


def alpha_comparison_sweep(
    K_values: Sequence[int],
    snr_grid_db: Sequence[float],
    trials: int = env_config.DEFAULT_TRIALS,
    seed: int = env_config.DEFAULT_MASTER_SEED,
    threads: int = 1,
    process_monitor: Optional[ProcessMonitor] = None,
) -> SweepResult:
    """
    alpha_LS against the averaged alpha_FS for each K (with M = K) over SNR.

    Points carry the regularization in the `alpha` extra column and the
    system size in `K`; the averaged search's boundary hits go to `boundary`.
    """
    monitor = process_monitor if process_monitor is not None else get_process_monitor()
    result = SweepResult(
        metadata=build_metadata(
            "alpha_comparison_sweep", K_values=list(K_values), snr_grid_db=list(snr_grid_db), trials=trials, seed=seed
        )
    )
    for K in K_values:
        channels = draw_channels(K, K, trials, seed)
        for snr_db in snr_grid_db:
            rho = snr_to_rho(snr_db)
            sigma2 = 1.0 / rho
            reference_alpha = alpha_ls(rho, K)
            rates = run_trials(lambda i: _rci_rate(channels[i], reference_alpha, sigma2), trials, threads)
            mean, stderr = mean_and_stderr(rates)
            result.per_point.append(
                SweepPoint(
                    snr_db=snr_db,
                    scheme=Scheme.RCI_LS.value,
                    mean_rate_bits=mean,
                    std_err=stderr,
                    n=trials,
                    extra={"K": float(K), "alpha": reference_alpha},
                )
            )

            boundary = 0.0
            try:
                best = optimize_alpha_average(
                    K, K, rho, trials, seed, threads=threads, channels=channels, process_monitor=monitor
                )
            except BracketFailure as e:
                logger.warning(f"Averaged alpha search for K={K} at {snr_db:g} dB hit the boundary")
                best, boundary = e.best, 1.0
            result.per_point.append(
                SweepPoint(
                    snr_db=snr_db,
                    scheme=Scheme.RCI_FS_AVG.value,
                    mean_rate_bits=best.rate_bits,
                    std_err=0.0,
                    n=trials,
                    extra={"K": float(K), "alpha": best.alpha, "boundary": boundary},
                )
            )
            logger.info(
                f"K={K}, {snr_db:g} dB: alpha_LS={reference_alpha:.4g}, averaged alpha_FS={best.alpha:.4g}"
            )
    return result


def large_system_convergence(
    K_values: Sequence[int] = (4, 8, 16, 32),
    snr_db: float = 10.0,
    trials: int = env_config.DEFAULT_TRIALS,
    seed: int = env_config.DEFAULT_MASTER_SEED,
    threads: int = 1,
    process_monitor: Optional[ProcessMonitor] = None,
) -> SweepResult:
    """
    Simulated RCI(alpha_LS) secrecy sum-rate for M = K against the
    closed-form optimum, per antenna. `abs_gap` should shrink as K grows.
    """
    monitor = process_monitor if process_monitor is not None else get_process_monitor()
    stage = "sweep_convergence"
    monitor.start_stage(stage)
    rho = snr_to_rho(snr_db)
    sigma2 = 1.0 / rho
    result = SweepResult(
        metadata=build_metadata(
            "large_system_convergence", K_values=list(K_values), snr_db=snr_db, trials=trials, seed=seed
        )
    )
    for K in K_values:
        channels = draw_channels(K, K, trials, seed)
        alpha = alpha_ls(rho, K)
        rates = run_trials(lambda i: _rci_rate(channels[i], alpha, sigma2), trials, threads)
        mean, stderr = mean_and_stderr(rates)
        closed_form = optimal_secrecy_sum_rate(rho, K) / K
        gap = abs(mean / K - closed_form)
        result.per_point.append(
            SweepPoint(
                snr_db=snr_db,
                scheme=Scheme.RCI_LS.value,
                mean_rate_bits=mean,
                std_err=stderr,
                n=trials,
                extra={"K": float(K), "closed_form_per_antenna": closed_form, "abs_gap": gap},
            )
        )
        logger.info(f"K={K}: simulated {mean / K:.4f} vs closed form {closed_form:.4f} bits/antenna")
    monitor.add_stage_details(stage, snr_points=len(K_values), trials=trials)
    monitor.end_stage(stage)
    return result
