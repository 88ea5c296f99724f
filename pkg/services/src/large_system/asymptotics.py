# services/src/large_system/asymptotics.py
"""
Large-System Asymptotics Module

This module holds the deterministic limits of the RCI precoder when K = M
grows large with the regularization scaled as alpha = xi K. Every rate here
is a per-antenna quantity multiplied by K; SNRs are linear.

In this regime gamma/K, A_k and B_k converge to deterministic values built
from g(xi) = sqrt(1 + 4/xi)/2 - 1/2 and its derivative, so every user ends
up with the same pair of SINRs.

Classes:
    LargeSystemPoint: One (rho, xi) evaluation of the asymptotic rate
    LargeSystemLimits: Limits of gamma/K, A_k and B_k for a given xi
    ComparisonLimits: CI and matched-filter large-system secrecy rates
    AsymptoteReport: High-SNR loss and gain constants
    HighSnrAsymptotes: High-SNR approximations of the main quantities

Functions:
    g_of_xi / xi_g_prime: g(xi) and xi g'(xi)
    asymptotic_secrecy_sum_rate: Secrecy sum-rate of RCI for a given xi
    xi_opt / optimal_secrecy_sum_rate: Optimal xi and its rate
    sum_rate_no_secrecy / secrecy_rate_xi_inv_rho: Reference schemes
    comparison_limits / asymptote_report / high_snr_asymptotes
    large_system_table: Closed-form rate at xi_opt over an SNR grid

Dependencies:
    - pydantic
    - logging
"""

import logging
import math
from typing import Iterable, List

from pydantic import BaseModel, ConfigDict, Field

from ..rates.secrecy_rates import SinrPair

logger = logging.getLogger(__name__)


class LargeSystemError(Exception):
    """Base exception class for large-system errors."""

    pass


class DomainError(LargeSystemError, ValueError):
    """Raised when an argument lies outside the domain of a closed form."""

    pass


class LargeSystemPoint(BaseModel):
    model_config = ConfigDict(frozen=True)

    rho: float = Field(..., ge=0.0, description="Linear SNR")
    xi: float = Field(..., ge=0.0, description="Normalized regularization alpha / K")
    K: int = Field(..., ge=1)
    g: float = Field(..., ge=0.0)
    rate_bits: float = Field(..., ge=0.0)


class LargeSystemLimits(BaseModel):
    model_config = ConfigDict(frozen=True)

    xi: float
    g: float
    xi_g_prime: float
    gamma: float = Field(..., description="Limit of gamma / K")
    a: float = Field(..., description="Limit of A_k")
    b: float = Field(..., description="Limit of B_k")


class ComparisonLimits(BaseModel):
    model_config = ConfigDict(frozen=True)

    ci_bits_per_antenna: float
    mf_bits_per_antenna: float
    mf_unclipped_bits: float


class AsymptoteReport(BaseModel):
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    secrecy_loss_bits_per_antenna: float
    gain_vs_xi_inv_rho_bits: float
    power_loss_db: float


class HighSnrAsymptotes(BaseModel):
    model_config = ConfigDict(frozen=True)

    rho: float
    K: int
    xi_opt_approx: float
    secrecy_rate_approx_bits: float
    no_secrecy_rate_approx_bits: float
    misome_per_user_bits: float


def _check_rho(rho: float) -> None:
    if not rho >= 0 or math.isinf(rho):
        raise DomainError(f"SNR must be finite and nonnegative, got {rho}")


def _check_xi(xi: float) -> None:
    if not xi > 0 or math.isinf(xi):
        raise DomainError(f"xi must be finite and positive, got {xi}")


def _check_k(K: int) -> None:
    if int(K) != K or K < 1:
        raise DomainError(f"K must be a positive integer, got {K}")


def _root(xi: float) -> float:
    return math.sqrt(1.0 + 4.0 / xi)


def g_of_xi(xi: float) -> float:
    """
    g(xi) = sqrt(1 + 4/xi)/2 - 1/2, the almost-sure limit of A_k.

    Evaluated as (2/xi) / (s + 1) with s = sqrt(1 + 4/xi), which avoids the
    cancellation for large xi.
    """
    _check_xi(xi)
    return (2.0 / xi) / (_root(xi) + 1.0)


def xi_g_prime(xi: float) -> float:
    """xi g'(xi) = -1 / (xi sqrt(1 + 4/xi))."""
    _check_xi(xi)
    return -1.0 / (xi * _root(xi))


def _gamma_limit(xi: float) -> float:
    # g + xi g' reduces to (s - 1)^2 / (4 s)
    s = _root(xi)
    s_minus_one = (4.0 / xi) / (s + 1.0)
    return s_minus_one * s_minus_one / (4.0 * s)


def large_system_limits(xi: float) -> LargeSystemLimits:
    """
    Deterministic limits of gamma/K, A_k and B_k for alpha = xi K.

    gamma/K and B_k both tend to g + xi g', A_k tends to g.
    """
    g = g_of_xi(xi)
    gamma = _gamma_limit(xi)
    return LargeSystemLimits(xi=xi, g=g, xi_g_prime=xi_g_prime(xi), gamma=gamma, a=g, b=gamma)


def asymptotic_sinrs(xi: float, rho: float) -> SinrPair:
    """
    Limiting SINR pair of every user.

    Intended: rho g^2 / ((rho + (1+g)^2)(g + xi g')); eavesdropper: rho / (1+g)^2.
    """
    _check_rho(rho)
    limits = large_system_limits(xi)
    g, gamma = limits.g, limits.gamma
    intended = rho * g * g / ((rho + (1.0 + g) ** 2) * gamma)
    eavesdropper = rho / (1.0 + g) ** 2
    return SinrPair(intended=intended, eavesdropper=eavesdropper)


def asymptotic_secrecy_sum_rate(xi: float, rho: float, K: int) -> float:
    """
    Large-system secrecy sum-rate of RCI with alpha = xi K.

    Args:
        xi (float): Normalized regularization, > 0
        rho (float): Linear SNR, >= 0
        K (int): Number of users, a scale factor only

    Returns:
        float: K [log2((1 + SINR) / (1 + SINR~))]^+ in bits

    Raises:
        DomainError: If xi <= 0, rho < 0 or K is not a positive integer.
    """
    _check_k(K)
    sinrs = asymptotic_sinrs(xi, rho)
    per_antenna = (math.log1p(sinrs.intended) - math.log1p(sinrs.eavesdropper)) / math.log(2.0)
    return K * max(0.0, per_antenna)


def evaluate_point(rho: float, xi: float, K: int) -> LargeSystemPoint:
    return LargeSystemPoint(
        rho=rho, xi=xi, K=K, g=g_of_xi(xi), rate_bits=asymptotic_secrecy_sum_rate(xi, rho, K)
    )


def xi_opt(rho: float) -> float:
    """
    Optimal normalized regularization 1 / (3 rho + 1 + sqrt(3 rho + 1)).

    Equals 1/2 at rho = 0 and approaches 1/(3 rho) from below at high SNR.
    """
    _check_rho(rho)
    t = 3.0 * rho + 1.0
    return 1.0 / (t + math.sqrt(t))


def optimal_secrecy_sum_rate(rho: float, K: int) -> float:
    """K log2[(9 rho + 2 + (6 rho + 2) sqrt(3 rho + 1)) / (4 (4 rho + 1))]."""
    _check_rho(rho)
    _check_k(K)
    ratio = (9.0 * rho + 2.0 + (6.0 * rho + 2.0) * math.sqrt(3.0 * rho + 1.0)) / (4.0 * (4.0 * rho + 1.0))
    return K * max(0.0, math.log2(ratio))


def sum_rate_no_secrecy(rho: float, K: int) -> float:
    """Large-system sum-rate without secrecy, RCI with xi = 1/rho."""
    _check_rho(rho)
    _check_k(K)
    return K * math.log2((1.0 + math.sqrt(4.0 * rho + 1.0)) / 2.0)


def secrecy_rate_xi_inv_rho(rho: float, K: int) -> float:
    """
    Secrecy sum-rate of RCI tuned for the sum-rate, xi = 1/rho.

    K log2[(4 rho + 1 + (2 rho + 1) sqrt(4 rho + 1)) / (2 (4 rho + 1))];
    rho = 0 returns the limit 0.
    """
    _check_rho(rho)
    _check_k(K)
    if rho == 0:
        return 0.0
    s = math.sqrt(4.0 * rho + 1.0)
    ratio = (4.0 * rho + 1.0 + (2.0 * rho + 1.0) * s) / (2.0 * (4.0 * rho + 1.0))
    return K * max(0.0, math.log2(ratio))


def comparison_limits(rho: float) -> ComparisonLimits:
    """
    Per-antenna large-system secrecy rates of CI (xi -> 0) and the matched
    filter (xi -> inf). Both vanish; the unclipped matched-filter argument
    log2((2 rho + 1) / (rho + 1)^2) is returned as well.
    """
    _check_rho(rho)
    mf_arg = math.log2((2.0 * rho + 1.0) / (rho + 1.0) ** 2)
    return ComparisonLimits(
        ci_bits_per_antenna=0.0,
        mf_bits_per_antenna=max(0.0, mf_arg),
        mf_unclipped_bits=mf_arg,
    )


def asymptote_report() -> AsymptoteReport:
    """High-SNR constants: secrecy loss, gain over xi = 1/rho, power loss."""
    return AsymptoteReport(
        secrecy_loss_bits_per_antenna=0.5 * math.log2(64.0 / 27.0),
        gain_vs_xi_inv_rho_bits=math.log2(3.0 * math.sqrt(3.0) / 4.0),
        power_loss_db=10.0 * math.log10(64.0 / 27.0),
    )


def high_snr_asymptotes(rho: float, K: int) -> HighSnrAsymptotes:
    """
    High-SNR approximations at a given rho.

    xi_opt ~ 1/(3 rho); optimal secrecy sum-rate ~ (K/2) log2(27 rho / 64);
    sum-rate without secrecy ~ (K/2) log2 rho; MISOME benchmark 1/2 log2 rho
    per user.
    """
    _check_k(K)
    if not rho > 0 or math.isinf(rho):
        raise DomainError(f"High-SNR approximations need a finite rho > 0, got {rho}")
    half_log_rho = 0.5 * math.log2(rho)
    return HighSnrAsymptotes(
        rho=rho,
        K=K,
        xi_opt_approx=1.0 / (3.0 * rho),
        secrecy_rate_approx_bits=K * (0.5 * math.log2(27.0 / 64.0) + half_log_rho),
        no_secrecy_rate_approx_bits=K * half_log_rho,
        misome_per_user_bits=half_log_rho,
    )


def large_system_table(snr_grid_db: Iterable[float], K: int) -> List[LargeSystemPoint]:
    """Closed-form optimal point for each SNR (in dB) of the grid."""
    points = []
    for snr_db in snr_grid_db:
        rho = 10.0 ** (float(snr_db) / 10.0)
        xi = xi_opt(rho)
        points.append(
            LargeSystemPoint(rho=rho, xi=xi, K=K, g=g_of_xi(xi), rate_bits=optimal_secrecy_sum_rate(rho, K))
        )
    logger.debug(f"Large-system table with {len(points)} points for K={K}")
    return points
