# services/src/large_system/__init__.py
"""
Large-system module for the rci-secrecy project.
Closed-form K = M -> infinity quantities of the RCI precoder.
"""

from .asymptotics import (
    AsymptoteReport,
    ComparisonLimits,
    DomainError,
    HighSnrAsymptotes,
    LargeSystemError,
    LargeSystemLimits,
    LargeSystemPoint,
    asymptote_report,
    asymptotic_secrecy_sum_rate,
    asymptotic_sinrs,
    comparison_limits,
    evaluate_point,
    g_of_xi,
    high_snr_asymptotes,
    large_system_limits,
    large_system_table,
    optimal_secrecy_sum_rate,
    secrecy_rate_xi_inv_rho,
    sum_rate_no_secrecy,
    xi_g_prime,
    xi_opt,
)

__all__ = [
    "AsymptoteReport",
    "ComparisonLimits",
    "DomainError",
    "HighSnrAsymptotes",
    "LargeSystemError",
    "LargeSystemLimits",
    "LargeSystemPoint",
    "asymptote_report",
    "asymptotic_secrecy_sum_rate",
    "asymptotic_sinrs",
    "comparison_limits",
    "evaluate_point",
    "g_of_xi",
    "high_snr_asymptotes",
    "large_system_limits",
    "large_system_table",
    "optimal_secrecy_sum_rate",
    "secrecy_rate_xi_inv_rho",
    "sum_rate_no_secrecy",
    "xi_g_prime",
    "xi_opt",
]
