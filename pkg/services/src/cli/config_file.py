# services/src/cli/config_file.py
"""
CLI Configuration Module

Resolves the settings of one subcommand from three layers, later layers
winning: the section of a YAML config file named after the subcommand,
`--set key=value` overrides, then explicit command-line flags.

Every key is typed by the subcommand's schema below; unknown keys and
unparsable values raise ConfigError naming the key. The YAML file is read
with the base loader so every scalar stays a string until the schema
converts it (an SNR grid such as 0:5:30 would otherwise load as a
base-60 integer).

Functions:
    parse_grid: "start:step:stop" or a comma list into a list of floats
    load_config_file: One section of a YAML config file
    parse_overrides: `key=value` strings into a dictionary
    resolve_settings: Merges the layers and converts every value

Dependencies:
    - yaml
    - logging
"""

import logging
import math
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, Optional, Union

import yaml

logger = logging.getLogger(__name__)


class ConfigError(Exception):
    """Base exception class for CLI configuration errors."""

    pass


Converter = Callable[[Any], Any]


def _as_items(value: Any) -> List[str]:
    if isinstance(value, (list, tuple)):
        return [str(v).strip() for v in value]
    return [part.strip() for part in str(value).split(",") if part.strip()]


def _to_int(value: Any) -> int:
    text = str(value).strip()
    number = float(text)
    if not number.is_integer():
        raise ValueError(f"{text} is not an integer")
    return int(number)


def _to_float(value: Any) -> float:
    return float(str(value).strip())


def _to_bool(value: Any) -> bool:
    text = str(value).strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"{value} is not a boolean")


def _to_int_list(value: Any) -> List[int]:
    return [_to_int(item) for item in _as_items(value)]


def _to_float_list(value: Any) -> List[float]:
    return [_to_float(item) for item in _as_items(value)]


def _to_str_list(value: Any) -> List[str]:
    return _as_items(value)


def parse_grid(value: Any) -> List[float]:
    """
    Parse an SNR grid.

    "0:5:30" is start:step:stop with the stop included; anything else is a
    comma-separated list (or a YAML list) of values.
    """
    if isinstance(value, (list, tuple)):
        return [_to_float(v) for v in value]
    text = str(value).strip()
    if ":" not in text:
        return _to_float_list(text)
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"grid '{text}' must look like start:step:stop")
    start, step, stop = (float(p) for p in parts)
    if step <= 0 or stop < start:
        raise ValueError(f"grid '{text}' needs step > 0 and stop >= start")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [start + i * step for i in range(count)]


_COMMON: Dict[str, Converter] = {
    "output": str,
    "format": str,
    "log_level": str,
}
_MONTE_CARLO: Dict[str, Converter] = {
    "trials": _to_int,
    "seed": _to_int,
    "threads": _to_int,
}

SECTION_KEYS: Dict[str, Dict[str, Converter]] = {
    "large-system": {**_COMMON, "k": _to_int, "snr_db": parse_grid},
    "sweep": {
        **_COMMON,
        **_MONTE_CARLO,
        "k": _to_int,
        "m": _to_int,
        "snr_db": parse_grid,
        "schemes": _to_str_list,
    },
    "ccdf": {
        **_COMMON,
        **_MONTE_CARLO,
        "k": _to_int,
        "m": _to_int,
        "snr_db": _to_float,
        "thresholds": _to_float_list,
    },
    "power-alloc": {
        **_COMMON,
        **_MONTE_CARLO,
        "k": _to_int,
        "m": _to_int,
        "snr_db": parse_grid,
    },
    "alpha-search": {
        **_COMMON,
        **_MONTE_CARLO,
        "k": _to_int_list,
        "snr_db": parse_grid,
        "convergence": _to_bool,
    },
    "selftest": {"suite": _to_str_list, "log_level": str},
}


def load_config_file(path: Union[str, Path], section: str) -> Dict[str, Any]:
    """
    Read one subcommand section of a YAML config file.

    Returns:
        dict: The section's raw key/value pairs ({} when the section is absent)

    Raises:
        ConfigError: If the file cannot be read or is not a mapping of mappings.
    """
    try:
        with open(path, "r", encoding="utf-8") as f:
            document = yaml.load(f, Loader=yaml.BaseLoader)
    except (OSError, IOError) as e:
        raise ConfigError(f"Configuration file {path} could not be read") from e
    except yaml.YAMLError as e:
        raise ConfigError(f"Configuration file {path} format is invalid") from e

    if document is None:
        return {}
    if not isinstance(document, dict):
        raise ConfigError(f"Configuration file {path} must hold one mapping per subcommand")
    for name in document:
        if name not in SECTION_KEYS:
            raise ConfigError(f"Unknown section '{name}' in {path}")
    values = document.get(section) or {}
    if not isinstance(values, dict):
        raise ConfigError(f"Section '{section}' in {path} must be a mapping")
    logger.debug(f"Loaded {len(values)} settings for '{section}' from {path}")
    return dict(values)


def parse_overrides(items: Optional[Iterable[str]]) -> Dict[str, str]:
    """Split `key=value` strings; keys are normalized to snake_case."""
    overrides: Dict[str, str] = {}
    for item in items or []:
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"Override '{item}' must have the form key=value")
        overrides[key.strip().replace("-", "_").lower()] = value.strip()
    return overrides


def resolve_settings(
    section: str,
    file_values: Optional[Dict[str, Any]] = None,
    overrides: Optional[Dict[str, Any]] = None,
    flags: Optional[Dict[str, Any]] = None,
) -> Dict[str, Any]:
    """
    Merge file values, overrides and flags (in that order of precedence,
    lowest first) and convert each value with the section's schema.

    Flags whose value is None are treated as not given.

    Raises:
        ConfigError: Naming the first unknown key or invalid value.
    """
    if section not in SECTION_KEYS:
        raise ConfigError(f"Unknown subcommand '{section}'")
    schema = SECTION_KEYS[section]

    merged: Dict[str, Any] = {}
    for layer in (file_values or {}, overrides or {}, {k: v for k, v in (flags or {}).items() if v is not None}):
        for key, value in layer.items():
            name = str(key).replace("-", "_").lower()
            if name not in schema:
                raise ConfigError(f"Unknown key '{name}' for '{section}'")
            merged[name] = value

    resolved: Dict[str, Any] = {}
    for key, value in merged.items():
        try:
            resolved[key] = schema[key](value)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"Invalid value for '{key}': {e}") from e
    return resolved


def require(settings: Dict[str, Any], *keys: str) -> None:
    """Raise ConfigError naming the first missing key."""
    for key in keys:
        if key not in settings:
            raise ConfigError(f"Missing required setting '{key}'")
