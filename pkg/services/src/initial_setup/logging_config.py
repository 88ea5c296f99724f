# services/src/initial_setup/logging_config.py
"""
Logging setup for the CLI, the API server and scripts.

Everything goes to stderr so CSV/JSON on stdout stays machine-readable.
Each record carries the id of the run the monitor is tracking ("-" when
monitoring is off), which ties worker-thread messages of a Monte Carlo
sweep to the run summary.

Functions:
    configure_logging: Install the single stderr handler on the root logger

Classes:
    RunContextFilter: Adds `run_id` to every record
"""

import logging
import sys
from typing import Optional, Union

from ..initial_setup.env_config import config
from ..initial_setup.process_monitor_setup import get_process_monitor

LOG_FORMAT = "%(asctime)s %(levelname)-7s [run %(run_id)s] %(name)s: %(message)s"


class RunContextFilter(logging.Filter):
    def filter(self, record: logging.LogRecord) -> bool:
        record.run_id = (get_process_monitor().run_id or "-")[:8]
        return True


def _resolve_level(level: Union[int, str]) -> int:
    if isinstance(level, int):
        return level
    resolved = logging.getLevelName(level.strip().upper())
    if not isinstance(resolved, int):
        logging.getLogger(__name__).warning(f"Unknown log level '{level}', using INFO")
        return logging.INFO
    return resolved


def configure_logging(level: Optional[Union[int, str]] = None) -> logging.Logger:
    """
    Replace the root handlers with one stderr handler.

    Safe to call again (the CLI does so after reading --log-level from a
    config file).

    Args:
        level (int | str, optional): Level or level name, any case. Defaults
            to SECRECY_LOG_LEVEL.

    Returns:
        logging.Logger: The root logger
    """
    root_logger = logging.getLogger()
    for handler in list(root_logger.handlers):
        root_logger.removeHandler(handler)

    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    handler.addFilter(RunContextFilter())
    root_logger.addHandler(handler)
    root_logger.setLevel(_resolve_level(config.LOG_LEVEL if level is None else level))
    return root_logger
