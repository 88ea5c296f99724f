# services/src/initial_setup/process_monitor_setup.py
"""
Run Monitoring Module

Times the stages of a simulation run (sweeps, alpha searches, CCDF and
power-allocation passes) and keeps the counters each stage reports:
trial counts, skipped trials, soft solver failures and searched alphas.

Timing data lives here only and never reaches sweep results, so results
stay reproducible bit for bit.

Classes:
    RunStage: Timing and counters for one stage
    ProcessMonitor: Collects stages for one run and reports on them

Dependencies:
    - dataclasses
    - json
    - logging
    - time
    - uuid
"""

import json
import logging
import time
import uuid
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from typing import Any, Callable, Dict, List, Optional

logger = logging.getLogger(__name__)


def _points_and_trials(details: Dict[str, Any]) -> str:
    return f"Points: {details.get('snr_points', 0)}, Trials: {details.get('trials', 0)}"


def _searched_alpha(details: Dict[str, Any]) -> Optional[str]:
    alpha = details.get("alpha")
    return f"Alpha: {alpha:.6g}" if alpha is not None else None


def _soft_failures(details: Dict[str, Any]) -> str:
    return f"Trials: {details.get('trials', 0)}, Soft failures: {details.get('soft_failures', 0)}"


def _skipped(details: Dict[str, Any]) -> str:
    return f"Trials: {details.get('trials', 0)}, Skipped: {details.get('skipped_trials', 0)}"


# Stage-name prefix -> one-line headline for the summary
HEADLINES: Dict[str, Callable[[Dict[str, Any]], Optional[str]]] = {
    "sweep_": _points_and_trials,
    "alpha_search": _searched_alpha,
    "power_alloc": _soft_failures,
    "ccdf": _skipped,
}


@dataclass
class RunStage:
    """One timed stage of a run; `seconds` is measured on the monotonic clock."""

    name: str
    status: str = "not_started"
    started_at: Optional[str] = None
    seconds: Optional[float] = None
    details: Dict[str, Any] = field(default_factory=dict)
    _t0: Optional[float] = field(default=None, repr=False)

    def begin(self) -> None:
        self.started_at = datetime.now(timezone.utc).isoformat()
        self._t0 = time.perf_counter()
        self.status = "in_progress"

    def finish(self, status: str) -> None:
        if self._t0 is not None:
            self.seconds = time.perf_counter() - self._t0
        self.status = status

    def headline(self) -> Optional[str]:
        for prefix, formatter in HEADLINES.items():
            if self.name.startswith(prefix):
                try:
                    return formatter(self.details)
                except (TypeError, ValueError):
                    logger.warning(f"Could not format details for stage '{self.name}'")
                    return None
        return None

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data.pop("_t0")
        return data


class ProcessMonitor:
    """
    Collects RunStage records for one simulation run.

    A disabled monitor accepts every call and records nothing, so the
    experiment functions can report unconditionally.
    """

    def __init__(self, enabled: bool = False):
        self.enabled = enabled
        self.run_id: Optional[str] = None
        self.stages: Dict[str, RunStage] = {}
        self._t0: Optional[float] = None
        self._total: Optional[float] = None

    def start_monitoring(self) -> None:
        """Reset the monitor and start timing a new run."""
        if not self.enabled:
            return
        self.run_id = str(uuid.uuid4())
        self.stages = {}
        self._t0 = time.perf_counter()
        self._total = None
        logger.debug(f"Run monitoring started: {self.run_id}")

    def end_monitoring(self) -> None:
        if not self.enabled or self._t0 is None:
            return
        self._total = time.perf_counter() - self._t0
        logger.debug(f"Run monitoring ended after {self._total:.2f}s")

    def start_stage(self, stage_name: str) -> None:
        if not self.enabled:
            return
        stage = self.stages.setdefault(stage_name, RunStage(stage_name))
        stage.begin()
        logger.debug(f"Stage started: {stage_name}")

    def end_stage(self, stage_name: str, status: str = "completed") -> None:
        """
        Close a stage.

        Args:
            stage_name (str): Stage to close; unknown names are ignored
            status (str): "completed", "boundary" or "error"
        """
        stage = self.stages.get(stage_name) if self.enabled else None
        if stage is None:
            return
        stage.finish(status)
        logger.debug(f"Stage {stage_name} ended: {status}")

    def add_stage_details(self, stage_name: str, **kwargs) -> None:
        stage = self.stages.get(stage_name) if self.enabled else None
        if stage is not None:
            stage.details.update(kwargs)

    def get_stage_data(self, stage_name: str) -> Optional[Dict[str, Any]]:
        stage = self.stages.get(stage_name) if self.enabled else None
        return stage.to_dict() if stage is not None else None

    def get_all_stages(self) -> List[Dict[str, Any]]:
        if not self.enabled:
            return []
        return [stage.to_dict() for stage in self.stages.values()]

    def get_total_duration(self) -> Optional[float]:
        """Seconds since start_monitoring, frozen once the run has ended."""
        if not self.enabled or self._t0 is None:
            return None
        if self._total is not None:
            return self._total
        return time.perf_counter() - self._t0

    def format_summary(self) -> str:
        """
        Plain-text report of the run, one block per stage in start order.

        Returns:
            str: The report, or "" when monitoring is disabled
        """
        if not self.enabled:
            return ""

        lines = [f"Run summary ({self.run_id})"]
        total = self.get_total_duration()
        if total is not None:
            lines.append(f"  total: {total:.2f}s")

        for stage in sorted(self.stages.values(), key=lambda s: s.started_at or ""):
            icon = {"completed": "✅", "boundary": "⚠️", "error": "❌"}.get(stage.status, "⏳")
            took = f" {stage.seconds:.2f}s" if stage.seconds is not None else ""
            lines.append(f"  {icon} {stage.name} [{stage.status}]{took}")
            headline = stage.headline()
            if headline:
                lines.append(f"      {headline}")

        return "\n".join(lines)

    def to_json(self) -> str:
        if not self.enabled:
            return "{}"
        data = {
            "run_id": self.run_id,
            "total_duration": self.get_total_duration(),
            "stages": {name: stage.to_dict() for name, stage in self.stages.items()},
        }
        return json.dumps(data, indent=2, default=str)


_monitor = ProcessMonitor(enabled=False)


def enable_monitoring(enabled: bool = True) -> None:
    """Replace the shared monitor when the enabled flag changes."""
    global _monitor
    if _monitor.enabled != enabled:
        _monitor = ProcessMonitor(enabled=enabled)


def get_process_monitor() -> ProcessMonitor:
    return _monitor
