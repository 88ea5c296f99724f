# services/src/experiments/experiment_config.py
"""
Experiment Configuration Module

Pydantic models describing a Monte Carlo sweep: system size, SNR grid in dB,
number of trials, master seed, worker threads and the precoding schemes to
evaluate. Defaults come from the environment configuration.

Classes:
    Scheme: Precoding schemes known to the sweeps
    ExperimentConfig: One sweep request
"""

from enum import Enum
from typing import List

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..initial_setup.env_config import config

MAX_SEED = 2**64


class ExperimentError(Exception):
    """Base exception class for experiment-related errors."""

    pass


class Scheme(str, Enum):
    RCI_LS = "rci-ls"
    RCI_FS_AVG = "rci-fs-avg"
    RCI_FS_PER_CHANNEL = "rci-fs-per-channel"
    CI = "ci"
    MF = "mf"
    RCI_XI_INV_RHO = "rci-xi-inv-rho"
    RCI_PA_FIXED_ALPHA = "rci-pa-fixed-alpha"
    RCI_PA_JOINT = "rci-pa-joint"
    RCI_NO_SECRECY = "rci-no-secrecy"

    @classmethod
    def parse(cls, name: str) -> "Scheme":
        """Accept either the CLI label (rci-ls) or the member name (RCI_LS)."""
        key = name.strip()
        for scheme in cls:
            if key == scheme.value or key.upper() == scheme.name:
                return scheme
        raise ValueError(f"Unknown scheme '{name}'; expected one of {[s.value for s in cls]}")


class ExperimentConfig(BaseModel):
    """
    A Monte Carlo sweep.

    All schemes of one config see the same channel draws: trial i always uses
    the channel seeded by (master_seed, i).
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    K: int = Field(..., ge=1, description="Number of users")
    M: int = Field(..., ge=1, description="Number of transmit antennas")
    snr_grid_db: List[float] = Field(..., min_length=1, description="SNR grid in dB")
    trials: int = Field(default_factory=lambda: config.get_experiment_defaults()["trials"], ge=1)
    master_seed: int = Field(
        default_factory=lambda: config.get_experiment_defaults()["master_seed"], ge=0, lt=MAX_SEED
    )
    schemes: List[Scheme] = Field(default_factory=lambda: [Scheme.RCI_LS], min_length=1)
    threads: int = Field(default_factory=lambda: config.get_experiment_defaults()["threads"], ge=1)

    @field_validator("schemes", mode="before")
    @classmethod
    def _parse_schemes(cls, value):
        if isinstance(value, str):
            value = [part for part in value.split(",") if part.strip()]
        return [v if isinstance(v, Scheme) else Scheme.parse(str(v)) for v in value]

    @model_validator(mode="after")
    def _check_ci_dimensions(self) -> "ExperimentConfig":
        if Scheme.CI in self.schemes and self.K > self.M:
            raise ValueError(f"Channel inversion needs K <= M, got K={self.K}, M={self.M}")
        return self

    @property
    def scheme(self) -> Scheme:
        """First requested scheme."""
        return self.schemes[0]

    def echo(self) -> dict:
        """Fully resolved config for result metadata."""
        return self.model_dump(mode="json")
