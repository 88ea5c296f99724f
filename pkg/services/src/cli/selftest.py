# services/src/cli/selftest.py
"""
Self-Test Module

Property checks for every component at reduced scale, runnable without
pytest. Each suite is an ordered list of named checks; a suite stops at its
first failing property.

Functions:
    run_selftest: Runs the requested suites and prints one line per suite

Dependencies:
    - numpy
    - logging
"""

import logging
import math
import sys
from typing import Callable, Dict, List, Optional, Sequence, TextIO, Tuple

import numpy as np

from ..channel.channel_model import RngSpec, insert_row, remove_row, sample_channel
from ..experiments.monte_carlo import average_secrecy_sum_rate, constant_alpha
from ..experiments.experiment_config import ExperimentConfig
from ..experiments.sweeps import ccdf_alpha_penalty
from ..large_system.asymptotics import (
    asymptote_report,
    asymptotic_secrecy_sum_rate,
    g_of_xi,
    optimal_secrecy_sum_rate,
    xi_opt,
)
from ..power_alloc.sca import joint_optimize, sca_power_allocation, true_secrecy_rate
from ..power_alloc.tangent_bound import tangent_coeffs
from ..precoder.precoder import PowerVector, ci_precoder, mf_precoder, rci_precoder
from ..rates.secrecy_rates import rci_sinrs_via_akbk, secrecy_sum_rate, sinr_vectors
from .config_file import ConfigError

logger = logging.getLogger(__name__)

SELFTEST_SEED = 20240917
Check = Tuple[str, Callable[[], bool]]


def _relclose(a: float, b: float, rel: float) -> bool:
    return abs(a - b) <= rel * max(1.0, abs(a), abs(b))


def _channel_checks() -> List[Check]:
    def reproducible() -> bool:
        first = sample_channel(3, 4, RngSpec(SELFTEST_SEED, 5))
        second = sample_channel(3, 4, RngSpec(SELFTEST_SEED, 5))
        return np.array_equal(first.entries, second.entries)

    def row_round_trip() -> bool:
        H = sample_channel(4, 4, RngSpec(SELFTEST_SEED, 0))
        rebuilt = insert_row(remove_row(H, 2), 2, H.entries[2])
        return np.array_equal(rebuilt.entries, H.entries)

    return [("sampling is reproducible per (seed, trial)", reproducible), ("remove/insert row round trip", row_round_trip)]


def _precoder_checks() -> List[Check]:
    H = sample_channel(4, 4, RngSpec(SELFTEST_SEED, 1))

    def gamma_is_trace() -> bool:
        return all(
            _relclose(float(W.column_norms_sq().sum()), W.gamma, 1e-9)
            for W in (rci_precoder(H, 0.3), ci_precoder(H), mf_precoder(H))
        )

    def equal_power_fills_budget() -> bool:
        W = rci_precoder(H, 0.3)
        return _relclose(PowerVector.equal_power(W).power_load(W), 1.0, 1e-9)

    return [("gamma equals trace(W^H W)", gamma_is_trace), ("equal power meets the budget", equal_power_fills_budget)]


def _rates_checks() -> List[Check]:
    def sinr_identity() -> bool:
        for trial, (K, alpha) in enumerate([(2, 0.01), (4, 0.1), (8, 1.0), (4, 1.0)]):
            H = sample_channel(K, K, RngSpec(SELFTEST_SEED, 100 + trial))
            sigma2 = 0.1
            intended, eavesdropper = sinr_vectors(H, rci_precoder(H, alpha), sigma2)
            for k in range(K):
                pair = rci_sinrs_via_akbk(H, alpha, sigma2, k)
                if not (_relclose(pair.intended, intended[k], 1e-9) and _relclose(pair.eavesdropper, eavesdropper[k], 1e-9)):
                    return False
        return True

    def rates_nonnegative() -> bool:
        H = sample_channel(4, 4, RngSpec(SELFTEST_SEED, 2))
        return secrecy_sum_rate(H, rci_precoder(H, 0.2), 0.1).sum_bits >= 0.0

    return [("SINRs via A_k, B_k match direct SINRs", sinr_identity), ("secrecy sum-rate is nonnegative", rates_nonnegative)]


def _large_system_checks() -> List[Check]:
    def constants() -> bool:
        report = asymptote_report()
        return (
            abs(report.secrecy_loss_bits_per_antenna - 0.6246) <= 1e-3
            and abs(report.gain_vs_xi_inv_rho_bits - 0.3774) <= 1e-3
            and abs(report.power_loss_db - 3.747) <= 1e-2
        )

    def g_fixed_point() -> bool:
        return all(_relclose(xi * g_of_xi(xi) * (1.0 + g_of_xi(xi)), 1.0, 1e-12) for xi in (1e-3, 0.1, 1.0, 10.0, 1e3))

    def xi_opt_endpoints() -> bool:
        return xi_opt(0.0) == 0.5 and 0.99 <= xi_opt(1e4) * 3e4 <= 1.0

    def optimum_dominates() -> bool:
        grid = np.logspace(-4, 2, 200)
        for rho in (0.01, 0.1, 1.0, 10.0, 100.0, 1e4):
            best = optimal_secrecy_sum_rate(rho, 1)
            if not _relclose(asymptotic_secrecy_sum_rate(xi_opt(rho), rho, 1), best, 1e-9):
                return False
            if max(asymptotic_secrecy_sum_rate(float(xi), rho, 1) for xi in grid) > best * (1 + 1e-9):
                return False
        return True

    return [
        ("asymptotic constants", constants),
        ("g solves xi g (1 + g) = 1", g_fixed_point),
        ("xi_opt endpoints", xi_opt_endpoints),
        ("closed-form optimum matches and dominates", optimum_dominates),
    ]


def _power_alloc_checks() -> List[Check]:
    H = sample_channel(3, 3, RngSpec(SELFTEST_SEED, 3))
    sigma2 = 0.1
    alpha = 3 * xi_opt(1.0 / sigma2)

    def tangent_is_lower_bound() -> bool:
        coeffs = tangent_coeffs(2.0)
        return all(coeffs.bound(z) <= math.log1p(z) + 1e-12 for z in (0.1, 0.5, 1.0, 2.0, 5.0, 50.0))

    def pa_dominates_equal_power() -> bool:
        powers, _ = sca_power_allocation(H, alpha, sigma2)
        W = rci_precoder(H, alpha)
        ep = secrecy_sum_rate(H, W, sigma2).sum_bits
        return powers.is_feasible(W) and true_secrecy_rate(H, alpha, powers, sigma2) >= ep - 1e-9

    def joint_dominates_pa() -> bool:
        powers, _ = sca_power_allocation(H, alpha, sigma2)
        pa = true_secrecy_rate(H, alpha, powers, sigma2)
        joint_alpha, joint_powers, _ = joint_optimize(H, sigma2)
        return true_secrecy_rate(H, joint_alpha, joint_powers, sigma2) >= pa - 1e-6

    return [
        ("tangent bound lies below log(1 + z)", tangent_is_lower_bound),
        ("power allocation beats equal power", pa_dominates_equal_power),
        ("joint optimization beats fixed-alpha allocation", joint_dominates_pa),
    ]


def _experiments_checks() -> List[Check]:
    def deterministic() -> bool:
        config = ExperimentConfig(K=2, M=2, snr_grid_db=[10.0], trials=3, master_seed=SELFTEST_SEED)
        first = average_secrecy_sum_rate(config, constant_alpha(0.1))
        second = average_secrecy_sum_rate(config, constant_alpha(0.1))
        return first.per_point == second.per_point

    def ccdf_shape() -> bool:
        table = ccdf_alpha_penalty(2, 10.0, 4, SELFTEST_SEED, [0.0, 0.05, 0.5])
        return table.mean_diff >= 0.0 and all(b <= a for a, b in zip(table.ccdf, table.ccdf[1:]))

    return [("same config gives identical sweeps", deterministic), ("alpha penalty CCDF is well formed", ccdf_shape)]


SUITES: Dict[str, Callable[[], List[Check]]] = {
    "channel": _channel_checks,
    "precoder": _precoder_checks,
    "rates": _rates_checks,
    "large-system": _large_system_checks,
    "power-alloc": _power_alloc_checks,
    "experiments": _experiments_checks,
}


def run_selftest(suites: Optional[Sequence[str]] = None, stream: Optional[TextIO] = None) -> int:
    """
    Run the property suites and print PASS/FAIL per suite.

    Returns:
        int: 0 if every property holds, 1 otherwise

    Raises:
        ConfigError: If an unknown suite is requested.
    """
    stream = stream if stream is not None else sys.stdout
    names = list(suites) if suites else list(SUITES)
    unknown = [name for name in names if name not in SUITES]
    if unknown:
        raise ConfigError(f"Unknown suite '{unknown[0]}'; expected one of {sorted(SUITES)}")

    failed = False
    for name in names:
        failure = None
        for label, check in SUITES[name]():
            try:
                ok = bool(check())
            except Exception as e:
                logger.error(f"Suite {name}: '{label}' raised {e}")
                ok = False
            if not ok:
                failure = label
                break
        if failure is None:
            stream.write(f"PASS {name}\n")
        else:
            failed = True
            stream.write(f"FAIL {name}: {failure}\n")
    return 1 if failed else 0
