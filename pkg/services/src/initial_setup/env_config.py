# services/src/initial_setup/env_config.py
"""
Environment Configuration Manager

This module provides centralized environment variable management for the
rci-secrecy project. It loads solver tolerances, Monte Carlo defaults and
service settings from environment variables with type conversion and
validation.

All configuration values are loaded as class attributes on the Config class,
making them easily accessible throughout the application.

Usage:
    from ..initial_setup.env_config import config

    # Access configuration values
    trials = config.DEFAULT_TRIALS
    tol = config.SCA_TOL

Dependencies:
    - os
    - logging
    - python-dotenv (optional, for .env file support)
"""

import logging
import os
from typing import Any, Dict

# Try to import python-dotenv if available
try:
    from dotenv import load_dotenv

    load_dotenv()  # Load .env file if it exists
except ImportError:
    pass  # dotenv not installed, use system environment variables only

logger = logging.getLogger(__name__)


def _safe_int_conversion(value: str, default: int, field_name: str) -> int:
    """Safely convert string to int with error handling."""
    try:
        return int(value)
    except (ValueError, TypeError):
        logger.warning(f"Invalid integer value for {field_name}, using default: {default}")
        return default


def _safe_float_conversion(value: str, default: float, field_name: str) -> float:
    """Safely convert string to float with error handling."""
    try:
        return float(value)
    except (ValueError, TypeError):
        logger.warning(f"Invalid float value for {field_name}, using default: {default}")
        return default


def _env_flag(name: str, default: str) -> bool:
    return os.getenv(name, default).lower() == "true"


class Config:
    """
    Centralized configuration class that loads all settings from environment variables.
    Every variable is prefixed with SECRECY_.
    """

    # Logging Configuration
    LOG_LEVEL: str = os.getenv("SECRECY_LOG_LEVEL", "INFO")
    SHOW_RUN_SUMMARY: bool = _env_flag("SECRECY_SHOW_RUN_SUMMARY", "true")

    # Monte Carlo Configuration
    DEFAULT_THREADS: int = _safe_int_conversion(os.getenv("SECRECY_THREADS", "1"), 1, "DEFAULT_THREADS")
    DEFAULT_TRIALS: int = _safe_int_conversion(os.getenv("SECRECY_TRIALS", "1000"), 1000, "DEFAULT_TRIALS")
    DEFAULT_MASTER_SEED: int = _safe_int_conversion(
        os.getenv("SECRECY_MASTER_SEED", "0"), 0, "DEFAULT_MASTER_SEED"
    )

    # Power Allocation Solver Configuration
    SCA_TOL: float = _safe_float_conversion(os.getenv("SECRECY_SCA_TOL", "1e-6"), 1e-6, "SCA_TOL")
    SCA_MAX_OUTER: int = _safe_int_conversion(os.getenv("SECRECY_SCA_MAX_OUTER", "50"), 50, "SCA_MAX_OUTER")
    INNER_TOL: float = _safe_float_conversion(os.getenv("SECRECY_INNER_TOL", "1e-8"), 1e-8, "INNER_TOL")
    INNER_MAX_NEWTON: int = _safe_int_conversion(
        os.getenv("SECRECY_INNER_MAX_NEWTON", "200"), 200, "INNER_MAX_NEWTON"
    )
    JOINT_TOL: float = _safe_float_conversion(os.getenv("SECRECY_JOINT_TOL", "1e-5"), 1e-5, "JOINT_TOL")
    JOINT_MAX_OUTER: int = _safe_int_conversion(
        os.getenv("SECRECY_JOINT_MAX_OUTER", "30"), 30, "JOINT_MAX_OUTER"
    )
    P_FLOOR: float = _safe_float_conversion(os.getenv("SECRECY_P_FLOOR", "1e-12"), 1e-12, "P_FLOOR")

    # Regularization Search Configuration
    ALPHA_SEARCH_REL_TOL: float = _safe_float_conversion(
        os.getenv("SECRECY_ALPHA_SEARCH_REL_TOL", "1e-3"), 1e-3, "ALPHA_SEARCH_REL_TOL"
    )
    ALPHA_GRID_POINTS: int = _safe_int_conversion(
        os.getenv("SECRECY_ALPHA_GRID_POINTS", "25"), 25, "ALPHA_GRID_POINTS"
    )

    # Service Configuration
    API_HOST: str = os.getenv("SECRECY_API_HOST", "0.0.0.0")
    API_PORT: int = _safe_int_conversion(os.getenv("SECRECY_API_PORT", "8000"), 8000, "API_PORT")
    API_MAX_TRIALS: int = _safe_int_conversion(
        os.getenv("SECRECY_API_MAX_TRIALS", "200"), 200, "API_MAX_TRIALS"
    )

    # Static Constants (not from environment)
    ALPHA_BRACKET: tuple = (1e-4, 10.0)  # Search range as multiples of K
    ALPHA_BOUNDS: tuple = (1e-8, 10.0)  # Steepest-descent range, upper bound as multiple of K
    FEASIBILITY_SLACK: float = 1e-9
    VERSION: str = "1.0.0"

    @classmethod
    def validate(cls) -> bool:
        """
        Validate that all configuration values are usable.

        Returns:
            bool: True if all values are valid, False otherwise
        """
        validation_errors = []

        positive_fields = [
            ("SCA_TOL", cls.SCA_TOL),
            ("INNER_TOL", cls.INNER_TOL),
            ("JOINT_TOL", cls.JOINT_TOL),
            ("ALPHA_SEARCH_REL_TOL", cls.ALPHA_SEARCH_REL_TOL),
        ]
        for field_name, field_value in positive_fields:
            if field_value <= 0:
                validation_errors.append(f"{field_name} must be positive")

        if cls.DEFAULT_THREADS < 1:
            validation_errors.append("DEFAULT_THREADS must be at least 1")
        if cls.DEFAULT_TRIALS < 1:
            validation_errors.append("DEFAULT_TRIALS must be at least 1")
        if cls.SCA_MAX_OUTER < 1 or cls.JOINT_MAX_OUTER < 1 or cls.INNER_MAX_NEWTON < 1:
            validation_errors.append("Iteration limits must be at least 1")
        if not 0 < cls.P_FLOOR < 1e-3:
            validation_errors.append("P_FLOOR must lie in (0, 1e-3)")
        if cls.ALPHA_GRID_POINTS < 5:
            validation_errors.append("ALPHA_GRID_POINTS must be at least 5")

        if validation_errors:
            logger.error("Configuration validation failed")
            for error in validation_errors:
                logger.error(error)
            return False

        logger.debug("Configuration validation successful")
        return True

    @classmethod
    def get_solver_params(cls) -> Dict[str, Any]:
        """
        Get power allocation solver parameters as a dictionary.

        Returns:
            dict: Tolerances and iteration limits for the SCA and joint solvers
        """
        return {
            "sca_tol": cls.SCA_TOL,
            "sca_max_outer": cls.SCA_MAX_OUTER,
            "inner_tol": cls.INNER_TOL,
            "inner_max_newton": cls.INNER_MAX_NEWTON,
            "joint_tol": cls.JOINT_TOL,
            "joint_max_outer": cls.JOINT_MAX_OUTER,
            "p_floor": cls.P_FLOOR,
        }

    @classmethod
    def get_experiment_defaults(cls) -> Dict[str, Any]:
        """
        Get Monte Carlo defaults used when a config leaves them unset.

        Returns:
            dict: Trials, master seed and worker thread count
        """
        return {
            "trials": cls.DEFAULT_TRIALS,
            "master_seed": cls.DEFAULT_MASTER_SEED,
            "threads": cls.DEFAULT_THREADS,
        }


# Create a singleton instance
config = Config()
