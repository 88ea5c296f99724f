# services/src/rates/__init__.py
"""
Rates module for the rci-secrecy project.
SINRs and secrecy sum-rates of linear precoders.
"""

from .secrecy_rates import (
    AkBk,
    RatesError,
    SecrecyRateReport,
    SinrPair,
    UserSecrecyRate,
    ak_bk,
    gain_matrix,
    interference_powers,
    leakage_powers,
    pa_sinr_vectors,
    rci_sinrs_via_akbk,
    secrecy_rate_bits,
    secrecy_sum_rate,
    secrecy_sum_rate_pa,
    sinr_eavesdropper,
    sinr_intended,
    sinr_vectors,
    sum_rate_without_secrecy,
)

__all__ = [
    "AkBk",
    "RatesError",
    "SecrecyRateReport",
    "SinrPair",
    "UserSecrecyRate",
    "ak_bk",
    "gain_matrix",
    "interference_powers",
    "leakage_powers",
    "pa_sinr_vectors",
    "rci_sinrs_via_akbk",
    "secrecy_rate_bits",
    "secrecy_sum_rate",
    "secrecy_sum_rate_pa",
    "sinr_eavesdropper",
    "sinr_intended",
    "sinr_vectors",
    "sum_rate_without_secrecy",
]
