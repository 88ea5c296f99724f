# services/src/precoder/precoder.py
"""
Linear Precoder Module

This module builds the linear precoding matrices used by the transmitter:
regularized channel inversion (RCI), plain channel inversion (CI), the
matched filter (MF), and RCI with an arbitrary per-user power allocation.

The transmitted signal is x = W u / sqrt(gamma) for the equal-power
precoders, with gamma = tr{W^H W}. With power allocation the columns are
scaled by sqrt(p_k) and the power budget is carried by p instead.

Linear systems in (H H^H + alpha I) are solved through a Cholesky
factorization; no explicit inverse is formed.

Functions:
    rci_precoder: W = H^H (H H^H + alpha I)^-1
    power_normalization: gamma for the RCI precoder, trace form
    ci_precoder: W = H^H (H H^H)^-1, K <= M
    mf_precoder: W = H^H
    apply_power_allocation: W_p = W diag(sqrt(p))

Dependencies:
    - numpy
    - scipy.linalg
    - logging
"""

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
from scipy import linalg

from ..channel.channel_model import ChannelMatrix, DimensionError
from ..initial_setup.env_config import config

logger = logging.getLogger(__name__)

DUAL_FORM_TOL = 1e-9
GAMMA_REL_TOL = 1e-10
SINGULAR_RCOND = 1e-12


class PrecoderError(Exception):
    """Base exception class for precoder-related errors."""

    pass


class SingularMatrixError(PrecoderError):
    """Raised when alpha = 0 and H H^H is rank-deficient."""

    pass


class ZeroChannelError(PrecoderError):
    """Raised when a precoder is requested for the all-zero channel."""

    pass


class PowerBudgetExceededError(PrecoderError):
    """Raised when sum_k p_k ||w_k||^2 exceeds the unit power budget."""

    pass


@dataclass(frozen=True, eq=False)
class PrecoderMatrix:
    """
    M x K precoder with its long-term power normalization gamma.

    `alpha` is the regularization used to build it (None for the matched
    filter). `scheme` is a short label: rci, ci, mf or scaled.
    """

    columns: np.ndarray
    gamma: float
    alpha: Optional[float] = None
    scheme: str = "rci"

    def __post_init__(self):
        columns = np.array(self.columns, dtype=np.complex128, copy=True)
        if columns.ndim != 2:
            raise DimensionError(f"Precoder must be two-dimensional, got shape {columns.shape}")
        columns.setflags(write=False)
        object.__setattr__(self, "columns", columns)
        if self.gamma < 0 or not np.isfinite(self.gamma):
            raise PrecoderError(f"Power normalization must be finite and nonnegative, got {self.gamma}")

    @property
    def num_antennas(self) -> int:
        return self.columns.shape[0]

    @property
    def num_users(self) -> int:
        return self.columns.shape[1]

    def column_norms_sq(self) -> np.ndarray:
        """Return ||w_k||^2 for every user."""
        return np.sum(np.abs(self.columns) ** 2, axis=0)

    def scaled(self, factor: float) -> "PrecoderMatrix":
        """Return c W with gamma recomputed; every rate is invariant to c > 0."""
        if factor <= 0:
            raise PrecoderError(f"Scale factor must be positive, got {factor}")
        return PrecoderMatrix(
            columns=self.columns * factor,
            gamma=self.gamma * factor**2,
            alpha=self.alpha,
            scheme="scaled",
        )


@dataclass(frozen=True, eq=False)
class PowerVector:
    """
    Per-user power weights p and their log-domain twin log_p.

    Users at or below p_floor are effectively muted.
    """

    p: np.ndarray
    log_p: np.ndarray
    p_floor: float = field(default=config.P_FLOOR)

    def __post_init__(self):
        p = np.array(self.p, dtype=float, copy=True).reshape(-1)
        log_p = np.array(self.log_p, dtype=float, copy=True).reshape(-1)
        if p.shape != log_p.shape:
            raise DimensionError(f"p has {p.size} entries but log_p has {log_p.size}")
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise PrecoderError("Powers must be finite and nonnegative")
        p.setflags(write=False)
        log_p.setflags(write=False)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "log_p", log_p)

    @classmethod
    def from_powers(cls, p: Sequence[float], p_floor: float = config.P_FLOOR) -> "PowerVector":
        p = np.asarray(p, dtype=float)
        return cls(p=p, log_p=np.log(np.maximum(p, p_floor)), p_floor=p_floor)

    @classmethod
    def from_log(cls, log_p: Sequence[float], p_floor: float = config.P_FLOOR) -> "PowerVector":
        log_p = np.asarray(log_p, dtype=float)
        return cls(p=np.exp(log_p), log_p=log_p, p_floor=p_floor)

    @classmethod
    def equal_power(cls, W: PrecoderMatrix, p_floor: float = config.P_FLOOR) -> "PowerVector":
        """p_k = 1/gamma for every user, the RCI-EP point."""
        return cls.from_powers(np.full(W.num_users, 1.0 / W.gamma), p_floor=p_floor)

    @property
    def num_users(self) -> int:
        return self.p.size

    def muted(self) -> np.ndarray:
        """Boolean mask of users whose power sits at the floor."""
        return self.p <= self.p_floor * (1.0 + 1e-9)

    def power_load(self, W: PrecoderMatrix) -> float:
        """Return tr{W_p^H W_p} = sum_k p_k ||w_k||^2."""
        return float(np.dot(self.p, W.column_norms_sq()))

    def is_feasible(self, W: PrecoderMatrix, slack: float = config.FEASIBILITY_SLACK) -> bool:
        return self.power_load(W) <= 1.0 + slack


@dataclass(frozen=True, eq=False)
class PowerAllocatedPrecoder:
    """RCI precoder with columns scaled by sqrt(p_k); no gamma rescaling."""

    base: PrecoderMatrix
    powers: PowerVector
    effective_columns: np.ndarray

    def trace(self) -> float:
        return float(np.sum(np.abs(self.effective_columns) ** 2))


def _check_alpha(alpha: float) -> None:
    if alpha < 0 or not np.isfinite(alpha):
        raise PrecoderError(f"Regularization must be finite and nonnegative, got {alpha}")


def _factor_regularized_gram(H: ChannelMatrix, alpha: float):
    """Cholesky factor of H H^H + alpha I, refusing singular alpha = 0 systems."""
    gram = H.gram()
    if alpha == 0:
        if H.num_users > H.num_antennas:
            raise SingularMatrixError(
                f"H H^H is singular for K={H.num_users} > M={H.num_antennas} with alpha = 0"
            )
        eigenvalues = linalg.eigvalsh(gram)
        if eigenvalues[0] <= SINGULAR_RCOND * max(eigenvalues[-1], np.finfo(float).tiny):
            raise SingularMatrixError("H H^H is rank-deficient and alpha = 0")
    regularized = gram + alpha * np.eye(H.num_users)
    try:
        return linalg.cho_factor(regularized, lower=True, check_finite=False)
    except linalg.LinAlgError as e:
        raise SingularMatrixError("H H^H + alpha I is not positive definite") from e


def power_normalization(H: ChannelMatrix, alpha: float) -> float:
    """
    Long-term power normalization of the RCI precoder.

    Evaluates tr{H^H H (H^H H + alpha I)^-2} through the eigenvalues lambda_i
    of H H^H, i.e. sum_i lambda_i / (lambda_i + alpha)^2.

    Args:
        H (ChannelMatrix): Channel
        alpha (float): Regularization parameter

    Returns:
        float: gamma

    Raises:
        SingularMatrixError: If alpha = 0 and H H^H is rank-deficient.
    """
    _check_alpha(alpha)
    eigenvalues = np.clip(linalg.eigvalsh(H.gram()), 0.0, None)
    if alpha == 0:
        if H.num_users > H.num_antennas or eigenvalues[0] <= SINGULAR_RCOND * max(
            eigenvalues[-1], np.finfo(float).tiny
        ):
            raise SingularMatrixError("H H^H is rank-deficient and alpha = 0")
        return float(np.sum(1.0 / eigenvalues))
    return float(np.sum(eigenvalues / (eigenvalues + alpha) ** 2))


def rci_precoder(H: ChannelMatrix, alpha: float, verify_dual: bool = True) -> PrecoderMatrix:
    """
    Regularized channel inversion precoder W = H^H (H H^H + alpha I_K)^-1.

    Args:
        H (ChannelMatrix): Channel
        alpha (float): Regularization parameter, >= 0
        verify_dual (bool): Cross-check against (H^H H + alpha I_M)^-1 H^H
            when alpha > 0; a mismatch above 1e-9 is logged.

    Returns:
        PrecoderMatrix: W with gamma from power_normalization

    Raises:
        SingularMatrixError: If alpha = 0 and H H^H is rank-deficient.
    """
    _check_alpha(alpha)
    factor = _factor_regularized_gram(H, alpha)
    # (H H^H + alpha I) is Hermitian, so W = ((H H^H + alpha I)^-1 H)^H
    W = linalg.cho_solve(factor, H.entries, check_finite=False).conj().T

    if verify_dual and alpha > 0:
        dual_factor = linalg.cho_factor(
            H.entries.conj().T @ H.entries + alpha * np.eye(H.num_antennas),
            lower=True,
            check_finite=False,
        )
        W_dual = linalg.cho_solve(dual_factor, H.entries.conj().T, check_finite=False)
        mismatch = np.linalg.norm(W - W_dual) / max(np.linalg.norm(W), np.finfo(float).tiny)
        if mismatch > DUAL_FORM_TOL:
            logger.warning(f"RCI dual form mismatch {mismatch:.3e} at alpha={alpha:.3e}")

    gamma = power_normalization(H, alpha)
    column_sum = float(np.sum(np.abs(W) ** 2))
    if abs(gamma - column_sum) > GAMMA_REL_TOL * max(column_sum, 1.0):
        logger.debug(f"gamma trace form {gamma:.15e} vs column sum {column_sum:.15e}")

    return PrecoderMatrix(columns=W, gamma=gamma, alpha=alpha, scheme="rci" if alpha > 0 else "ci")


def ci_precoder(H: ChannelMatrix) -> PrecoderMatrix:
    """
    Channel inversion (zero-forcing) precoder W = H^H (H H^H)^-1.

    Raises:
        DimensionError: If K > M.
        SingularMatrixError: If H H^H is rank-deficient.
    """
    if H.num_users > H.num_antennas:
        raise DimensionError(
            f"Channel inversion needs K <= M, got K={H.num_users}, M={H.num_antennas}"
        )
    return rci_precoder(H, 0.0, verify_dual=False)


def mf_precoder(H: ChannelMatrix) -> PrecoderMatrix:
    """
    Matched-filter precoder W = H^H, the alpha -> infinity direction of RCI.

    No scaling is applied; rates divide by gamma = tr{H H^H}, so any positive
    factor on W cancels.

    Raises:
        ZeroChannelError: If H = 0.
    """
    if H.is_zero():
        raise ZeroChannelError("Matched filter is undefined for the all-zero channel")
    W = H.entries.conj().T
    gamma = float(np.sum(np.abs(H.entries) ** 2))
    return PrecoderMatrix(columns=W, gamma=gamma, alpha=None, scheme="mf")


def apply_power_allocation(
    W: PrecoderMatrix, p: Union[PowerVector, Sequence[float]]
) -> PowerAllocatedPrecoder:
    """
    Scale column k of W by sqrt(p_k).

    Args:
        W (PrecoderMatrix): Base precoder
        p (PowerVector | sequence): Per-user powers

    Returns:
        PowerAllocatedPrecoder: W diag(sqrt(p)) together with its inputs

    Raises:
        DimensionError: If p does not have K entries.
        PowerBudgetExceededError: If sum_k p_k ||w_k||^2 > 1 + 1e-9.
    """
    powers = p if isinstance(p, PowerVector) else PowerVector.from_powers(p)
    if powers.num_users != W.num_users:
        raise DimensionError(f"Power vector has {powers.num_users} entries, precoder has K={W.num_users}")
    load = powers.power_load(W)
    if load > 1.0 + config.FEASIBILITY_SLACK:
        raise PowerBudgetExceededError(f"Power load {load:.12f} exceeds the unit budget")
    effective = W.columns * np.sqrt(powers.p)[np.newaxis, :]
    return PowerAllocatedPrecoder(base=W, powers=powers, effective_columns=effective)
