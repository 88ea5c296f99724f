# services/src/channel/channel_model.py
"""
Channel Model Module

This module generates and manipulates the random channel ensemble of the
multi-user MISO broadcast channel: a K x M matrix H whose row k is the
conjugated channel h_k^H of user k, with i.i.d. CN(0, 1) entries.

User indices are zero-based throughout the package.

Classes:
    ChannelMatrix: Immutable K x M complex channel
    NoiseModel: Receiver noise variance and the matching SNR
    RngSpec: (master_seed, trial_index) pair that pins one channel draw

Functions:
    sample_channel: Draws an i.i.d. Rayleigh channel for one trial
    remove_row: Leave-one-out channel H_k~ (eavesdropper rows of message k)
    insert_row: Inverse of remove_row
    dump_channel_csv / load_channel_csv: Regression fixture format

Dependencies:
    - numpy
    - csv
    - logging
"""

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np

logger = logging.getLogger(__name__)

CSV_HEADER = ["k", "j", "re", "im"]
MAX_SEED = 2**64


class ChannelError(Exception):
    """Base exception class for channel-related errors."""

    pass


class DimensionError(ChannelError, ValueError):
    """Raised when matrix dimensions do not agree."""

    pass


class UserIndexError(ChannelError, IndexError):
    """Raised when a user index falls outside 0..K-1."""

    pass


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=np.complex128, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class ChannelMatrix:
    """
    K x M complex fading matrix.

    Row k holds h_k^H, so the received sample of user k is entries[k] @ x.
    A leave-one-out matrix may have zero rows (K = 1 has no eavesdroppers).
    """

    entries: np.ndarray

    def __post_init__(self):
        entries = np.asarray(self.entries)
        if entries.ndim != 2:
            raise DimensionError(f"Channel must be two-dimensional, got shape {entries.shape}")
        if entries.shape[1] < 1:
            raise DimensionError("Channel must have at least one antenna")
        if not np.all(np.isfinite(entries)):
            raise ChannelError("Channel entries must be finite")
        object.__setattr__(self, "entries", _frozen(entries))

    @property
    def num_users(self) -> int:
        return self.entries.shape[0]

    @property
    def num_antennas(self) -> int:
        return self.entries.shape[1]

    @property
    def shape(self) -> tuple:
        return self.entries.shape

    def user_vector(self, k: int) -> np.ndarray:
        """Return h_k as an M-vector (the conjugate of row k)."""
        _check_user_index(self, k)
        return self.entries[k].conj()

    def gram(self) -> np.ndarray:
        """Return the K x K Gram matrix H H^H."""
        return self.entries @ self.entries.conj().T

    def is_zero(self) -> bool:
        return not np.any(self.entries)


@dataclass(frozen=True)
class NoiseModel:
    """
    Receiver noise with variance sigma2 per user; SNR rho = 1 / sigma2.

    rho = 0 is represented by sigma2 = inf.
    """

    sigma2: float
    rho: float = field(init=False)

    def __post_init__(self):
        if not self.sigma2 > 0:
            raise ValueError(f"Noise variance must be positive, got {self.sigma2}")
        object.__setattr__(self, "rho", 0.0 if math.isinf(self.sigma2) else 1.0 / self.sigma2)

    @classmethod
    def from_rho(cls, rho: float) -> "NoiseModel":
        if rho < 0:
            raise ValueError(f"SNR must be nonnegative, got {rho}")
        return cls(sigma2=math.inf if rho == 0 else 1.0 / rho)

    @classmethod
    def from_snr_db(cls, snr_db: float) -> "NoiseModel":
        return cls.from_rho(10.0 ** (snr_db / 10.0))


@dataclass(frozen=True)
class RngSpec:
    """Seed pair for one Monte Carlo trial."""

    master_seed: int
    trial_index: int = 0

    def __post_init__(self):
        if not 0 <= self.master_seed < MAX_SEED:
            raise ValueError(f"master_seed must be a 64-bit unsigned integer, got {self.master_seed}")
        if self.trial_index < 0:
            raise ValueError(f"trial_index must be nonnegative, got {self.trial_index}")

    def generator(self) -> np.random.Generator:
        """
        Build the trial's generator.

        The stream depends only on (master_seed, trial_index), never on the
        order in which other trials are drawn.
        """
        seed_seq = np.random.SeedSequence(entropy=self.master_seed, spawn_key=(self.trial_index,))
        return np.random.default_rng(seed_seq)


def _check_user_index(H: ChannelMatrix, k: int) -> None:
    if not 0 <= k < H.num_users:
        raise UserIndexError(f"User index {k} out of range for K={H.num_users}")


def sample_channel(K: int, M: int, rng: RngSpec) -> ChannelMatrix:
    """
    Draw a K x M channel with i.i.d. CN(0, 1) entries.

    Real and imaginary parts are independent N(0, 1/2).

    Args:
        K (int): Number of users
        M (int): Number of transmit antennas
        rng (RngSpec): Trial seed

    Returns:
        ChannelMatrix: The drawn channel
    """
    if K < 1 or M < 1:
        raise DimensionError(f"K and M must be positive, got K={K}, M={M}")
    normals = rng.generator().standard_normal((K, M, 2))
    entries = (normals[..., 0] + 1j * normals[..., 1]) / math.sqrt(2.0)
    return ChannelMatrix(entries)


def remove_row(H: ChannelMatrix, k: int) -> ChannelMatrix:
    """
    Return H with row k removed, rows kept in their original order.

    The input is never modified.
    """
    _check_user_index(H, k)
    return ChannelMatrix(np.delete(H.entries, k, axis=0))


def insert_row(H: ChannelMatrix, k: int, row: np.ndarray) -> ChannelMatrix:
    """Insert `row` so that it becomes row k of the result."""
    if not 0 <= k <= H.num_users:
        raise UserIndexError(f"Insert position {k} out of range for K={H.num_users}")
    row = np.asarray(row, dtype=np.complex128).reshape(-1)
    if row.size != H.num_antennas:
        raise DimensionError(f"Row has {row.size} entries, channel has M={H.num_antennas}")
    return ChannelMatrix(np.insert(H.entries, k, row, axis=0))


def dump_channel_csv(H: ChannelMatrix, path: Union[str, Path]) -> None:
    """
    Write H as CSV with header `k,j,re,im`, row-major.

    Floats are written with repr so that load_channel_csv reproduces H exactly.
    """
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(CSV_HEADER)
        for k in range(H.num_users):
            for j in range(H.num_antennas):
                value = H.entries[k, j]
                writer.writerow([k, j, repr(float(value.real)), repr(float(value.imag))])
    logger.debug(f"Channel {H.shape} written to {path}")


def load_channel_csv(path: Union[str, Path]) -> ChannelMatrix:
    """
    Read a channel written by dump_channel_csv.

    Raises:
        ChannelError: If the header is wrong, a row is malformed, an index is
            negative or repeated, or entries are missing.
    """
    path = Path(path)
    records = []
    seen = set()
    with path.open("r", newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != CSV_HEADER:
            raise ChannelError(f"Unexpected channel CSV header in {path}: {header}")
        for row in reader:
            try:
                k, j, re, im = int(row[0]), int(row[1]), float(row[2]), float(row[3])
            except (IndexError, ValueError) as e:
                raise ChannelError(f"Malformed row at {path}:{reader.line_num}: {row}") from e
            if len(row) != 4 or k < 0 or j < 0:
                raise ChannelError(f"Bad entry at {path}:{reader.line_num}: {row}")
            if (k, j) in seen:
                raise ChannelError(f"Duplicate entry ({k},{j}) at {path}:{reader.line_num}")
            seen.add((k, j))
            records.append((k, j, re, im))

    if not records:
        raise ChannelError(f"Channel CSV {path} has no entries")

    K = max(r[0] for r in records) + 1
    M = max(r[1] for r in records) + 1
    if len(records) != K * M:
        raise ChannelError(f"Channel CSV {path} has {len(records)} entries, expected {K * M}")

    entries = np.zeros((K, M), dtype=np.complex128)
    for k, j, re, im in records:
        entries[k, j] = complex(re, im)
    return ChannelMatrix(entries)
