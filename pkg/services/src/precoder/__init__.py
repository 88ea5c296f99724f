# services/src/precoder/__init__.py
"""
Precoder module for the rci-secrecy project.
RCI, CI and matched-filter precoders plus power-allocated RCI.
"""

from .precoder import (
    PowerAllocatedPrecoder,
    PowerBudgetExceededError,
    PowerVector,
    PrecoderError,
    PrecoderMatrix,
    SingularMatrixError,
    ZeroChannelError,
    apply_power_allocation,
    ci_precoder,
    mf_precoder,
    power_normalization,
    rci_precoder,
)

__all__ = [
    "PowerAllocatedPrecoder",
    "PowerBudgetExceededError",
    "PowerVector",
    "PrecoderError",
    "PrecoderMatrix",
    "SingularMatrixError",
    "ZeroChannelError",
    "apply_power_allocation",
    "ci_precoder",
    "mf_precoder",
    "power_normalization",
    "rci_precoder",
]
