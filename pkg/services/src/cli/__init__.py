# services/src/cli/__init__.py
"""
CLI module for the rci-secrecy project.
Argument parsing, config files, dispatch and the self-test suites.
"""

from .cli import build_parser, main, parse_and_dispatch
from .config_file import ConfigError, load_config_file, parse_grid, parse_overrides, resolve_settings
from .selftest import SUITES, run_selftest

__all__ = [
    "ConfigError",
    "SUITES",
    "build_parser",
    "load_config_file",
    "main",
    "parse_and_dispatch",
    "parse_grid",
    "parse_overrides",
    "resolve_settings",
    "run_selftest",
]
