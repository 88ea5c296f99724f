# services/src/initial_setup/__init__.py
"""
Initial setup module for the rci-secrecy project.
Contains configuration, logging and run monitoring.
"""

from ..initial_setup.env_config import Config, config
from ..initial_setup.logging_config import configure_logging
from ..initial_setup.process_monitor_setup import (
    ProcessMonitor,
    enable_monitoring,
    get_process_monitor,
)

__all__ = [
    "Config",
    "config",
    "configure_logging",
    "ProcessMonitor",
    "enable_monitoring",
    "get_process_monitor",
]
