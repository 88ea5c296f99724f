# services/src/rates/secrecy_rates.py
"""
Secrecy Rates Module

This module evaluates the SINRs and the achievable secrecy sum-rate of a
linear precoder on a given channel. For message k the eavesdropper is the
coalition of the other K-1 users, which can cancel the interference of all
other messages and matched-filter its K-1 observations.

Rates are reported in bits. Per-user secrecy rates are clipped at zero.

Classes:
    SinrPair: Intended and eavesdropper SINR of one message
    UserSecrecyRate: One entry of the per-user report
    SecrecyRateReport: Per-user rates and their sum (JSON serializable)
    AkBk: The two quadratic forms that give the RCI SINRs in closed form

Functions:
    sinr_intended / sinr_eavesdropper: SINRs of message k, equal power
    secrecy_sum_rate: Clipped secrecy sum-rate for W with power gamma
    ak_bk / rci_sinrs_via_akbk: RCI SINRs through the M x M resolvent
    secrecy_sum_rate_pa: Secrecy sum-rate with per-user powers
    sum_rate_without_secrecy: Plain sum-rate of the same precoder

Dependencies:
    - numpy
    - scipy.linalg
    - pydantic
    - logging
"""

import logging
import math
from typing import List, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy import linalg

from ..channel.channel_model import ChannelMatrix, DimensionError, remove_row
from ..precoder.precoder import (
    PowerVector,
    PrecoderMatrix,
    apply_power_allocation,
    power_normalization,
)

logger = logging.getLogger(__name__)

LN2 = math.log(2.0)


class RatesError(Exception):
    """Base exception class for rate-evaluation errors."""

    pass


class SinrPair(BaseModel):
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    intended: float = Field(..., ge=0.0, description="SINR at the intended user")
    eavesdropper: float = Field(..., ge=0.0, description="SINR at the colluding eavesdroppers")


class UserSecrecyRate(BaseModel):
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    sinr_k: float = Field(..., ge=0.0)
    sinr_ke: float = Field(..., ge=0.0)
    rate_bits: float = Field(..., ge=0.0)
    clipped: bool = Field(..., description="True when the unclipped rate was negative")

    @property
    def sinr(self) -> SinrPair:
        return SinrPair(intended=self.sinr_k, eavesdropper=self.sinr_ke)


class SecrecyRateReport(BaseModel):
    """
    Per-user secrecy rates and their sum.

    Serializes as {per_user: [{sinr_k, sinr_ke, rate_bits, clipped}], sum_bits}.
    """

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    per_user: List[UserSecrecyRate]
    sum_bits: float = Field(..., ge=0.0)

    @classmethod
    def from_sinrs(cls, intended: Sequence[float], eavesdropper: Sequence[float]) -> "SecrecyRateReport":
        raw = secrecy_rate_bits(np.asarray(intended, dtype=float), np.asarray(eavesdropper, dtype=float))
        per_user = [
            UserSecrecyRate(
                sinr_k=float(s_k),
                sinr_ke=float(s_e),
                rate_bits=max(0.0, float(r)),
                clipped=bool(r < 0),
            )
            for s_k, s_e, r in zip(intended, eavesdropper, raw)
        ]
        return cls(per_user=per_user, sum_bits=float(sum(u.rate_bits for u in per_user)))

    @property
    def num_users(self) -> int:
        return len(self.per_user)

    def rates(self) -> np.ndarray:
        return np.array([u.rate_bits for u in self.per_user])

    def unclipped_sum_bits(self) -> float:
        """Sum of log2(1+SINR_k) - log2(1+SINR_k~) without clipping."""
        return float(
            np.sum(
                secrecy_rate_bits(
                    np.array([u.sinr_k for u in self.per_user]),
                    np.array([u.sinr_ke for u in self.per_user]),
                )
            )
        )


class AkBk(BaseModel):
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    a_k: float = Field(..., ge=0.0)
    b_k: float = Field(..., ge=0.0)


def secrecy_rate_bits(intended: np.ndarray, eavesdropper: np.ndarray) -> np.ndarray:
    """Unclipped log2(1 + SINR_k) - log2(1 + SINR_k~), elementwise."""
    return (np.log1p(intended) - np.log1p(eavesdropper)) / LN2


def _check_sigma2(sigma2: float) -> None:
    if not sigma2 > 0:
        raise RatesError(f"Noise variance must be positive, got {sigma2}")


def _check_dimensions(H: ChannelMatrix, W: PrecoderMatrix) -> None:
    if W.num_antennas != H.num_antennas or W.num_users != H.num_users:
        raise DimensionError(
            f"Precoder shape {W.columns.shape} does not match channel shape {H.shape} (need M x K)"
        )


def _check_user(H: ChannelMatrix, k: int) -> None:
    if not 0 <= k < H.num_users:
        raise DimensionError(f"User index {k} out of range for K={H.num_users}")


def gain_matrix(H: ChannelMatrix, W: Union[PrecoderMatrix, np.ndarray]) -> np.ndarray:
    """
    Return G with G[k, j] = |h_k^H w_j|^2.

    Row sums off the diagonal are the interference at user k; column sums off
    the diagonal are the leakage of message j to the other users.
    """
    columns = W.columns if isinstance(W, PrecoderMatrix) else np.asarray(W)
    return np.abs(H.entries @ columns) ** 2


def leakage_powers(G: np.ndarray) -> np.ndarray:
    """L_k = sum_{j != k} G[j, k] = ||H_k~ w_k||^2."""
    return G.sum(axis=0) - np.diag(G)


def interference_powers(G: np.ndarray) -> np.ndarray:
    """sum_{j != k} G[k, j] for every k."""
    return G.sum(axis=1) - np.diag(G)


def _safe_ratio(numerator: np.ndarray, denominator: np.ndarray) -> np.ndarray:
    # A zero signal has zero SINR even when the denominator vanishes too
    numerator = np.asarray(numerator, dtype=float)
    denominator = np.asarray(denominator, dtype=float)
    out = np.zeros(np.broadcast(numerator, denominator).shape)
    mask = numerator > 0
    np.divide(numerator, denominator, out=out, where=mask)
    return out


def sinr_vectors(H: ChannelMatrix, W: PrecoderMatrix, sigma2: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Intended and eavesdropper SINRs of every message under equal power.

    Returns:
        Tuple[np.ndarray, np.ndarray]: (SINR_k, SINR_k~) for k = 0..K-1
    """
    _check_dimensions(H, W)
    _check_sigma2(sigma2)
    G = gain_matrix(H, W)
    noise = W.gamma * sigma2
    intended = _safe_ratio(np.diag(G), interference_powers(G) + noise)
    eavesdropper = _safe_ratio(leakage_powers(G), np.full(H.num_users, noise))
    return intended, eavesdropper


def sinr_intended(H: ChannelMatrix, W: PrecoderMatrix, sigma2: float, k: int) -> float:
    """
    SINR_k = |h_k^H w_k|^2 / (gamma sigma2 + sum_{j != k} |h_k^H w_j|^2).

    Args:
        H (ChannelMatrix): Channel
        W (PrecoderMatrix): Precoder with its normalization gamma
        sigma2 (float): Noise variance
        k (int): User index

    Returns:
        float: Linear SINR, 0 when w_k = 0
    """
    _check_dimensions(H, W)
    _check_sigma2(sigma2)
    _check_user(H, k)
    products = np.abs(H.entries[k] @ W.columns) ** 2
    signal = products[k]
    interference = products.sum() - signal
    return float(_safe_ratio(signal, interference + W.gamma * sigma2))


def sinr_eavesdropper(H: ChannelMatrix, W: PrecoderMatrix, sigma2: float, k: int) -> float:
    """
    SINR_k~ = ||H_k~ w_k||^2 / (gamma sigma2).

    The eavesdroppers have removed all other messages and combine their
    observations with the matched filter. Returns 0 when K = 1.
    """
    _check_dimensions(H, W)
    _check_sigma2(sigma2)
    _check_user(H, k)
    if H.num_users == 1:
        return 0.0
    others = remove_row(H, k).entries
    leakage = float(np.sum(np.abs(others @ W.columns[:, k]) ** 2))
    return float(_safe_ratio(leakage, W.gamma * sigma2))


def secrecy_sum_rate(H: ChannelMatrix, W: PrecoderMatrix, sigma2: float) -> SecrecyRateReport:
    """
    Achievable secrecy sum-rate of the linear precoder W.

    Each user's rate is max(0, log2(1 + SINR_k) - log2(1 + SINR_k~)); the sum
    runs over all users.

    Args:
        H (ChannelMatrix): Channel
        W (PrecoderMatrix): Precoder
        sigma2 (float): Noise variance, may be inf

    Returns:
        SecrecyRateReport: Per-user SINRs, rates and the sum in bits
    """
    intended, eavesdropper = sinr_vectors(H, W, sigma2)
    return SecrecyRateReport.from_sinrs(intended, eavesdropper)


def sum_rate_without_secrecy(H: ChannelMatrix, W: PrecoderMatrix, sigma2: float) -> float:
    """Sum of log2(1 + SINR_k) over users, ignoring the eavesdroppers."""
    intended, _ = sinr_vectors(H, W, sigma2)
    return float(np.sum(np.log1p(intended)) / LN2)


def ak_bk(H: ChannelMatrix, alpha: float, k: int) -> AkBk:
    """
    Quadratic forms of user k in the resolvent of the other users' channel.

    A_k = h_k^H R h_k and B_k = h_k^H R H_k~^H H_k~ R h_k with
    R = (H_k~^H H_k~ + alpha I_M)^-1. The RCI precoder satisfies
    h_k^H w_k = A_k / (1 + A_k) and ||H_k~ w_k||^2 = B_k / (1 + A_k)^2.

    Raises:
        RatesError: If alpha <= 0.
        DimensionError: If k is out of range.
    """
    if not alpha > 0:
        raise RatesError(f"A_k and B_k need alpha > 0, got {alpha}")
    _check_user(H, k)
    h_k = H.user_vector(k)
    others = remove_row(H, k).entries
    resolvent = others.conj().T @ others + alpha * np.eye(H.num_antennas)
    x = linalg.cho_solve(linalg.cho_factor(resolvent, lower=True, check_finite=False), h_k)
    a_k = float(np.real(np.vdot(h_k, x)))
    b_k = float(np.sum(np.abs(others @ x) ** 2))
    return AkBk(a_k=max(a_k, 0.0), b_k=b_k)


def rci_sinrs_via_akbk(H: ChannelMatrix, alpha: float, sigma2: float, k: int) -> SinrPair:
    """
    RCI SINRs of message k from A_k and B_k.

    SINR_k = A_k^2 / (B_k + gamma sigma2 (1 + A_k)^2) and
    SINR_k~ = B_k / (gamma sigma2 (1 + A_k)^2).
    """
    _check_sigma2(sigma2)
    coeffs = ak_bk(H, alpha, k)
    gamma = power_normalization(H, alpha)
    a, b = coeffs.a_k, coeffs.b_k
    noise = gamma * sigma2 * (1.0 + a) ** 2
    return SinrPair(
        intended=float(_safe_ratio(a * a, b + noise)),
        eavesdropper=float(_safe_ratio(b, noise)),
    )


def pa_sinr_vectors(G: np.ndarray, p: np.ndarray, sigma2: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    SINRs with per-user powers p, from a precomputed gain matrix.

    SINR_k = p_k G_kk / (sum_{j != k} p_j G_kj + sigma2) and
    SINR_k~ = p_k sum_{j != k} G_jk / sigma2.
    """
    _check_sigma2(sigma2)
    p = np.asarray(p, dtype=float)
    received = G * p[np.newaxis, :]
    signal = np.diag(received)
    intended = _safe_ratio(signal, received.sum(axis=1) - signal + sigma2)
    eavesdropper = _safe_ratio(p * leakage_powers(G), np.full(p.size, sigma2))
    return intended, eavesdropper


def secrecy_sum_rate_pa(
    H: ChannelMatrix, W: PrecoderMatrix, p: Union[PowerVector, Sequence[float]], sigma2: float
) -> SecrecyRateReport:
    """
    Secrecy sum-rate of W diag(sqrt(p)) under the unit power budget.

    With p_k = 1/gamma for all users this equals secrecy_sum_rate(H, W, sigma2).

    Raises:
        PowerBudgetExceededError: If sum_k p_k ||w_k||^2 > 1.
        DimensionError: If shapes disagree.
    """
    _check_dimensions(H, W)
    allocated = apply_power_allocation(W, p)
    intended, eavesdropper = pa_sinr_vectors(gain_matrix(H, W), allocated.powers.p, sigma2)
    return SecrecyRateReport.from_sinrs(intended, eavesdropper)
