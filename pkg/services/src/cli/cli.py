# services/src/cli/cli.py
"""
Command-Line Interface Module

Front end over the calculator and the Monte Carlo experiments.

Subcommands:
    large-system   Closed-form xi_opt and secrecy sum-rate over an SNR grid
    sweep          Scheme comparison sweep
    ccdf           CCDF of the alpha_LS penalty at one SNR
    power-alloc    Equal power vs. power allocation vs. joint optimization
    alpha-search   alpha_LS vs. averaged alpha_FS (or large-system convergence)
    selftest       Reduced-scale property checks

SNR values are given in dB (`--snr-db` or its alias `--rho-db`) and
converted to linear rho once, inside the experiments. Results go to
`--output` (CSV, or JSON for a .json path or `--format json`) or stdout;
diagnostics go to stderr.

Exit codes: 0 on success, 2 on configuration errors, 1 on runtime errors.

Functions:
    build_parser: The argparse parser
    parse_and_dispatch: Parses argv, runs the subcommand, returns the exit code
    main: Console-script entry point

Dependencies:
    - argparse
    - pydantic
    - logging
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

from pydantic import ValidationError

from ..experiments.experiment_config import MAX_SEED, ExperimentConfig
from ..experiments.monte_carlo import snr_to_rho
from ..experiments.results import LargeSystemTable, build_metadata
from ..experiments.sweeps import (
    alpha_comparison_sweep,
    ccdf_alpha_penalty,
    large_system_convergence,
    power_allocation_sweep,
    scheme_comparison_sweep,
)
from ..initial_setup.env_config import config
from ..initial_setup.logging_config import configure_logging
from ..initial_setup.process_monitor_setup import enable_monitoring, get_process_monitor
from .config_file import ConfigError, load_config_file, parse_overrides, require, resolve_settings
from .selftest import SUITES, run_selftest

logger = logging.getLogger(__name__)

DEFAULT_THRESHOLDS = [0.0, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2]

# Keys that argparse stores under a different name than the settings schema
_FLAG_KEYS = {"k_values": "k"}
_NOT_SETTINGS = {"command", "config", "overrides"}


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="YAML config file with one section per subcommand")
    parser.add_argument(
        "--set", dest="overrides", action="append", metavar="KEY=VALUE", help="Override a config value"
    )
    parser.add_argument("--output", help="Output path (.csv or .json); stdout when omitted")
    parser.add_argument("--format", choices=["csv", "json"], help="Output format (default from the extension)")
    parser.add_argument("--log-level", dest="log_level", help="DEBUG, INFO, WARNING or ERROR")


def _add_monte_carlo(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--trials", help=f"Channel realizations (default {config.DEFAULT_TRIALS})")
    parser.add_argument("--seed", help=f"Master seed (default {config.DEFAULT_MASTER_SEED})")
    parser.add_argument("--threads", help=f"Worker threads (default {config.DEFAULT_THREADS}, SECRECY_THREADS)")


def _add_snr(parser: argparse.ArgumentParser, help_text: str) -> None:
    parser.add_argument("--snr-db", "--rho-db", dest="snr_db", help=help_text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rci-secrecy",
        description="Secrecy sum-rate of RCI precoding: closed forms and Monte Carlo experiments",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    large = subparsers.add_parser("large-system", help="Closed-form optimum over an SNR grid")
    _add_common(large)
    large.add_argument("--k", help="Number of users")
    _add_snr(large, "SNR grid in dB: start:step:stop or a comma list")

    for name, help_text in (("sweep", "Scheme comparison"), ("power-alloc", "Power allocation gains")):
        sub = subparsers.add_parser(name, help=help_text)
        _add_common(sub)
        _add_monte_carlo(sub)
        sub.add_argument("--k", help="Number of users")
        sub.add_argument("--m", help="Number of antennas")
        _add_snr(sub, "SNR grid in dB: start:step:stop or a comma list")
        if name == "sweep":
            sub.add_argument("--schemes", help="Comma list, e.g. rci-ls,ci,mf")

    ccdf = subparsers.add_parser("ccdf", help="CCDF of the alpha_LS penalty")
    _add_common(ccdf)
    _add_monte_carlo(ccdf)
    ccdf.add_argument("--k", help="Number of users")
    ccdf.add_argument("--m", help="Number of antennas (default K)")
    _add_snr(ccdf, "SNR in dB")
    ccdf.add_argument("--thresholds", help="Comma list of thresholds")

    alpha = subparsers.add_parser("alpha-search", help="alpha_LS against the averaged alpha_FS")
    _add_common(alpha)
    _add_monte_carlo(alpha)
    alpha.add_argument("--k", dest="k_values", help="Comma list of K (M = K)")
    _add_snr(alpha, "SNR grid in dB")
    alpha.add_argument(
        "--convergence",
        action="store_const",
        const="true",
        help="Compare the simulated rate with the closed form instead (first SNR only)",
    )

    selftest = subparsers.add_parser("selftest", help="Reduced-scale property checks")
    selftest.add_argument("--suite", help=f"Comma list of suites: {', '.join(SUITES)}")
    selftest.add_argument("--config", help=argparse.SUPPRESS)
    selftest.add_argument("--set", dest="overrides", action="append", help=argparse.SUPPRESS)
    selftest.add_argument("--log-level", dest="log_level", help="DEBUG, INFO, WARNING or ERROR")
    return parser


def _resolve(args: argparse.Namespace) -> Dict[str, Any]:
    flags = {
        _FLAG_KEYS.get(key, key): value
        for key, value in vars(args).items()
        if key not in _NOT_SETTINGS
    }
    file_values = load_config_file(args.config, args.command) if args.config else {}
    return resolve_settings(args.command, file_values, parse_overrides(args.overrides), flags)


def _experiment_config(settings: Dict[str, Any], schemes: Optional[List[str]] = None) -> ExperimentConfig:
    require(settings, "k", "m", "snr_db")
    fields = {
        "K": settings["k"],
        "M": settings["m"],
        "snr_grid_db": settings["snr_db"],
        "trials": settings.get("trials", config.DEFAULT_TRIALS),
        "master_seed": settings.get("seed", config.DEFAULT_MASTER_SEED),
        "threads": settings.get("threads", config.DEFAULT_THREADS),
    }
    if schemes is not None:
        fields["schemes"] = schemes
    try:
        return ExperimentConfig(**fields)
    except ValidationError as e:
        error = e.errors()[0]
        location = ".".join(str(part) for part in error.get("loc", ())) or "config"
        raise ConfigError(f"Invalid setting '{location}': {error.get('msg')}") from e


def _wants_json(settings: Dict[str, Any]) -> bool:
    if "format" in settings:
        if settings["format"] not in ("csv", "json"):
            raise ConfigError(f"Invalid value for 'format': {settings['format']}")
        return settings["format"] == "json"
    return str(settings.get("output", "")).lower().endswith(".json")


def _emit(text: str, settings: Dict[str, Any]) -> None:
    output = settings.get("output")
    if output:
        Path(output).write_text(text, encoding="utf-8")
        logger.info(f"Wrote {output}")
    else:
        sys.stdout.write(text)


def _run_large_system(settings: Dict[str, Any]) -> str:
    require(settings, "k", "snr_db")
    table = LargeSystemTable.from_grid(
        settings["snr_db"],
        _checked_positive(settings, "k", 1),
        build_metadata("large_system", config=settings),
    )
    return table.to_json() if _wants_json(settings) else table.to_csv()


def _run_sweep(settings: Dict[str, Any]) -> str:
    experiment = _experiment_config(settings, settings.get("schemes"))
    result = scheme_comparison_sweep(experiment)
    return result.to_json() if _wants_json(settings) else result.to_csv()


def _run_power_alloc(settings: Dict[str, Any]) -> str:
    experiment = _experiment_config(settings)
    result = power_allocation_sweep(experiment)
    return result.to_json() if _wants_json(settings) else result.to_csv()


def _checked_seed(settings: Dict[str, Any]) -> int:
    seed = settings.get("seed", config.DEFAULT_MASTER_SEED)
    if not 0 <= seed < MAX_SEED:
        raise ConfigError(f"Invalid value for 'seed': must be a 64-bit unsigned integer, got {seed}")
    return seed


def _checked_positive(settings: Dict[str, Any], key: str, default: int) -> int:
    value = settings.get(key, default)
    if value < 1:
        raise ConfigError(f"Invalid value for '{key}': must be at least 1, got {value}")
    return value


def _run_ccdf(settings: Dict[str, Any]) -> str:
    require(settings, "k", "snr_db")
    K = _checked_positive(settings, "k", 1)
    M = _checked_positive(settings, "m", K)
    trials = _checked_positive(settings, "trials", config.DEFAULT_TRIALS)
    threads = _checked_positive(settings, "threads", config.DEFAULT_THREADS)
    seed = _checked_seed(settings)
    thresholds = settings.get("thresholds", DEFAULT_THRESHOLDS)
    table = ccdf_alpha_penalty(K, snr_to_rho(settings["snr_db"]), trials, seed, thresholds, M=M, threads=threads)
    table.metadata["config"] = {
        **settings, "m": M, "trials": trials, "threads": threads, "seed": seed, "thresholds": thresholds
    }
    return table.to_json() if _wants_json(settings) else table.to_csv()


def _run_alpha_search(settings: Dict[str, Any]) -> str:
    require(settings, "k", "snr_db")
    K_values = settings["k"]
    if not K_values or min(K_values) < 1:
        raise ConfigError(f"Invalid value for 'k': {K_values}")
    trials = _checked_positive(settings, "trials", config.DEFAULT_TRIALS)
    threads = _checked_positive(settings, "threads", config.DEFAULT_THREADS)
    seed = _checked_seed(settings)
    if settings.get("convergence"):
        result = large_system_convergence(K_values, settings["snr_db"][0], trials, seed, threads)
    else:
        result = alpha_comparison_sweep(K_values, settings["snr_db"], trials, seed, threads)
    result.metadata["config"] = {**settings, "trials": trials, "threads": threads, "seed": seed}
    return result.to_json() if _wants_json(settings) else result.to_csv()


HANDLERS: Dict[str, Callable[[Dict[str, Any]], str]] = {
    "large-system": _run_large_system,
    "sweep": _run_sweep,
    "ccdf": _run_ccdf,
    "power-alloc": _run_power_alloc,
    "alpha-search": _run_alpha_search,
}


def parse_and_dispatch(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parse argv, run the subcommand and return its exit code.

    Returns:
        int: 0 on success, 2 on configuration errors, 1 on runtime errors
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    configure_logging(args.log_level)
    try:
        settings = _resolve(args)
        if "log_level" in settings:
            configure_logging(settings["log_level"])

        if args.command == "selftest":
            return run_selftest(settings.get("suite"))

        enable_monitoring(True)
        monitor = get_process_monitor()
        monitor.start_monitoring()
        text = HANDLERS[args.command](settings)
        monitor.end_monitoring()
        _emit(text, settings)
        if config.SHOW_RUN_SUMMARY:
            logger.info(monitor.format_summary())
        return 0
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        return 2
    except Exception as e:
        logger.error(f"{args.command} failed: {e}", exc_info=logger.isEnabledFor(logging.DEBUG))
        return 1


def main() -> None:
    sys.exit(parse_and_dispatch())
