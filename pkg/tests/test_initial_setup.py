import json
import logging

import pytest

from services.src.initial_setup import Config, ProcessMonitor, configure_logging, enable_monitoring, get_process_monitor
from services.src.initial_setup.env_config import _safe_float_conversion, _safe_int_conversion


def test_safe_conversions_fall_back(caplog):
    with caplog.at_level(logging.WARNING):
        assert _safe_int_conversion("many", 7, "TRIALS") == 7
        assert _safe_float_conversion("tiny", 1e-6, "SCA_TOL") == 1e-6
    assert "TRIALS" in caplog.text
    assert _safe_int_conversion("12", 7, "TRIALS") == 12
    assert _safe_float_conversion("1e-9", 1e-6, "SCA_TOL") == 1e-9


def test_defaults_validate():
    assert Config.validate()
    params = Config.get_solver_params()
    assert params["joint_tol"] == Config.JOINT_TOL
    assert set(Config.get_experiment_defaults()) == {"trials", "master_seed", "threads"}


def test_invalid_values_fail_validation(monkeypatch):
    monkeypatch.setattr(Config, "SCA_TOL", 0.0)
    assert not Config.validate()
    monkeypatch.setattr(Config, "SCA_TOL", 1e-6)
    monkeypatch.setattr(Config, "P_FLOOR", 0.5)
    assert not Config.validate()


def test_configure_logging_uses_stderr():
    try:
        root = configure_logging("debug")
        assert root.level == logging.DEBUG
        assert len(root.handlers) == 1
        assert configure_logging("Warning").level == logging.WARNING
        assert configure_logging("nonsense").level == logging.INFO
    finally:
        logging.getLogger().handlers.clear()


def test_log_lines_carry_run_id(capsys):
    enable_monitoring(True)
    try:
        monitor = get_process_monitor()
        monitor.start_monitoring()
        configure_logging("info")
        logging.getLogger("services.src.experiments").info("sweep point done")
        err = capsys.readouterr().err
        assert f"[run {monitor.run_id[:8]}]" in err
        assert "sweep point done" in err
    finally:
        enable_monitoring(False)
        logging.getLogger().handlers.clear()
    configure_logging("info")
    logging.getLogger("services.src.experiments").info("no run")
    assert "[run -]" in capsys.readouterr().err
    logging.getLogger().handlers.clear()


def test_disabled_monitor_is_inert():
    monitor = ProcessMonitor(enabled=False)
    monitor.start_monitoring()
    monitor.start_stage("ccdf")
    monitor.add_stage_details("ccdf", trials=5)
    monitor.end_stage("ccdf")
    assert monitor.get_all_stages() == []
    assert monitor.format_summary() == ""
    assert monitor.to_json() == "{}"


def test_monitor_records_stages():
    monitor = ProcessMonitor(enabled=True)
    monitor.start_monitoring()
    monitor.start_stage("ccdf")
    monitor.add_stage_details("ccdf", trials=100, skipped_trials=2)
    monitor.end_stage("ccdf")
    monitor.start_stage("alpha_search_average")
    monitor.add_stage_details("alpha_search_average", alpha=0.37)
    monitor.end_stage("alpha_search_average", "boundary")
    monitor.end_monitoring()

    stage = monitor.get_stage_data("ccdf")
    assert stage["status"] == "completed"
    assert stage["details"]["skipped_trials"] == 2
    summary = monitor.format_summary()
    assert "Skipped: 2" in summary
    assert "Alpha: 0.37" in summary
    assert json.loads(monitor.to_json())["stages"]["alpha_search_average"]["status"] == "boundary"


def test_enable_monitoring_swaps_global():
    enable_monitoring(True)
    try:
        assert get_process_monitor().enabled
    finally:
        enable_monitoring(False)
    assert not get_process_monitor().enabled
