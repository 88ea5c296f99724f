# services/src/experiments/__init__.py
"""
Experiments module for the rci-secrecy project.
Monte Carlo sweeps, regularization searches and their result records.
"""

from .alpha_search import (
    AlphaSearchResult,
    BracketFailure,
    golden_section_log,
    optimize_alpha_average,
    optimize_alpha_per_channel,
)
from .experiment_config import ExperimentConfig, ExperimentError, Scheme
from .monte_carlo import (
    alpha_ls,
    alpha_xi_inv_rho,
    average_secrecy_sum_rate,
    constant_alpha,
    draw_channels,
    mean_and_stderr,
    run_trials,
    snr_to_rho,
)
from .results import CcdfTable, LargeSystemTable, SweepPoint, SweepResult
from .sweeps import (
    alpha_comparison_sweep,
    ccdf_alpha_penalty,
    large_system_convergence,
    power_allocation_sweep,
    scheme_comparison_sweep,
)

__all__ = [
    "AlphaSearchResult",
    "BracketFailure",
    "CcdfTable",
    "LargeSystemTable",
    "ExperimentConfig",
    "ExperimentError",
    "Scheme",
    "SweepPoint",
    "SweepResult",
    "alpha_comparison_sweep",
    "alpha_ls",
    "alpha_xi_inv_rho",
    "average_secrecy_sum_rate",
    "ccdf_alpha_penalty",
    "constant_alpha",
    "draw_channels",
    "golden_section_log",
    "large_system_convergence",
    "mean_and_stderr",
    "optimize_alpha_average",
    "optimize_alpha_per_channel",
    "power_allocation_sweep",
    "run_trials",
    "scheme_comparison_sweep",
    "snr_to_rho",
]
