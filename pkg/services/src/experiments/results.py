# services/src/experiments/results.py
"""
Experiment Results Module

Result records produced by the Monte Carlo harness and their file formats.

SweepResult CSV has the fixed columns snr_db,scheme,mean_bits,stderr,n
followed by one column per extra statistic. CcdfTable CSV has the columns
threshold,ccdf and LargeSystemTable CSV snr_db,xi_opt,rate_bits. All start
with a single `# metadata: {...}` comment line holding the JSON metadata, so
a CSV re-parses into the record that wrote it.

Classes:
    SweepPoint: Mean rate of one scheme at one SNR
    SweepResult: All points of a sweep plus metadata
    CcdfTable: CCDF of the normalized alpha penalty
    LargeSystemTable: Closed-form optimum over an SNR grid

Dependencies:
    - pydantic
    - csv
    - json
"""

import csv
import io
import json
import math
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from pydantic import BaseModel, Field, model_validator

from ..initial_setup.env_config import config
from ..large_system.asymptotics import LargeSystemPoint, g_of_xi, large_system_table
from .experiment_config import ExperimentError

SWEEP_COLUMNS = ["snr_db", "scheme", "mean_bits", "stderr", "n"]
CCDF_COLUMNS = ["threshold", "ccdf"]
LARGE_SYSTEM_COLUMNS = ["snr_db", "xi_opt", "rate_bits"]
METADATA_PREFIX = "# metadata: "

PathLike = Union[str, Path]


class SweepPoint(BaseModel):
    snr_db: float
    scheme: str
    mean_rate_bits: float
    std_err: float = Field(..., ge=0.0)
    n: int = Field(..., ge=0)
    extra: Dict[str, float] = Field(default_factory=dict)


class SweepResult(BaseModel):
    per_point: List[SweepPoint] = Field(default_factory=list)
    metadata: Dict[str, Any] = Field(default_factory=dict)

    def schemes(self) -> List[str]:
        seen: List[str] = []
        for point in self.per_point:
            if point.scheme not in seen:
                seen.append(point.scheme)
        return seen

    def for_scheme(self, scheme: str) -> List[SweepPoint]:
        return [p for p in self.per_point if p.scheme == scheme]

    def means(self, scheme: str) -> List[float]:
        return [p.mean_rate_bits for p in self.for_scheme(scheme)]

    def extend(self, other: "SweepResult") -> None:
        self.per_point.extend(other.per_point)

    def to_csv(self, path: Optional[PathLike] = None) -> str:
        """Write the CSV to `path` (when given) and return it as text."""
        extra_keys = sorted({key for p in self.per_point for key in p.extra})
        buffer = io.StringIO()
        buffer.write(METADATA_PREFIX + json.dumps(self.metadata, sort_keys=True) + "\n")
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(SWEEP_COLUMNS + extra_keys)
        for p in self.per_point:
            row = [repr(p.snr_db), p.scheme, repr(p.mean_rate_bits), repr(p.std_err), p.n]
            row += [repr(p.extra[key]) if key in p.extra else "" for key in extra_keys]
            writer.writerow(row)
        text = buffer.getvalue()
        if path is not None:
            Path(path).write_text(text, encoding="utf-8")
        return text

    @classmethod
    def from_csv(cls, source: PathLike) -> "SweepResult":
        metadata, rows = _read_csv(source)
        points = []
        for row in rows:
            missing = [c for c in SWEEP_COLUMNS if c not in row]
            if missing:
                raise ExperimentError(f"Sweep CSV is missing columns {missing}")
            extra = {k: float(v) for k, v in row.items() if k not in SWEEP_COLUMNS and v != ""}
            points.append(
                SweepPoint(
                    snr_db=float(row["snr_db"]),
                    scheme=row["scheme"],
                    mean_rate_bits=float(row["mean_bits"]),
                    std_err=float(row["stderr"]),
                    n=int(row["n"]),
                    extra=extra,
                )
            )
        return cls(per_point=points, metadata=metadata)

    def to_json(self, path: Optional[PathLike] = None) -> str:
        text = self.model_dump_json(indent=2)
        if path is not None:
            Path(path).write_text(text, encoding="utf-8")
        return text

    @classmethod
    def from_json(cls, source: PathLike) -> "SweepResult":
        return cls.model_validate_json(Path(source).read_text(encoding="utf-8"))


class CcdfTable(BaseModel):
    """
    Empirical CCDF of d = (R(alpha_FS(H)) - R(alpha_LS)) / R(alpha_FS(H)).

    ccdf[i] is the fraction of counted trials with d > thresholds[i].
    Trials with R(alpha_FS(H)) = 0 are skipped and counted.
    """

    thresholds: List[float]
    ccdf: List[float]
    mean_diff: float
    trials: int = Field(default=0, ge=0)
    skipped: int = Field(default=0, ge=0)
    boundary: int = Field(default=0, ge=0)
    metadata: Dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _check_shape(self) -> "CcdfTable":
        if len(self.thresholds) != len(self.ccdf):
            raise ValueError("thresholds and ccdf must have the same length")
        if any(b < a for a, b in zip(self.thresholds, self.thresholds[1:])):
            raise ValueError("thresholds must be sorted")
        if any(not 0.0 <= c <= 1.0 for c in self.ccdf):
            raise ValueError("ccdf values must lie in [0, 1]")
        if any(b > a for a, b in zip(self.ccdf, self.ccdf[1:])):
            raise ValueError("ccdf must be nonincreasing")
        return self

    def to_csv(self, path: Optional[PathLike] = None) -> str:
        metadata = dict(self.metadata)
        metadata.update(
            mean_diff=self.mean_diff, trials=self.trials, skipped=self.skipped, boundary=self.boundary
        )
        buffer = io.StringIO()
        buffer.write(METADATA_PREFIX + json.dumps(metadata, sort_keys=True) + "\n")
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(CCDF_COLUMNS)
        for threshold, value in zip(self.thresholds, self.ccdf):
            writer.writerow([repr(threshold), repr(value)])
        text = buffer.getvalue()
        if path is not None:
            Path(path).write_text(text, encoding="utf-8")
        return text

    @classmethod
    def from_csv(cls, source: PathLike) -> "CcdfTable":
        metadata, rows = _read_csv(source)
        counts = {key: metadata.pop(key, 0) for key in ("trials", "skipped", "boundary")}
        mean_diff = metadata.pop("mean_diff", math.nan)
        return cls(
            thresholds=[float(r["threshold"]) for r in rows],
            ccdf=[float(r["ccdf"]) for r in rows],
            mean_diff=float(mean_diff),
            metadata=metadata,
            **counts,
        )

    def to_json(self, path: Optional[PathLike] = None) -> str:
        text = self.model_dump_json(indent=2)
        if path is not None:
            Path(path).write_text(text, encoding="utf-8")
        return text

    @classmethod
    def from_json(cls, source: PathLike) -> "CcdfTable":
        return cls.model_validate_json(Path(source).read_text(encoding="utf-8"))


class LargeSystemTable(BaseModel):
    """xi_opt and the optimal secrecy sum-rate at each grid SNR for one K."""

    snr_db: List[float]
    points: List[LargeSystemPoint]
    metadata: Dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _check_shape(self) -> "LargeSystemTable":
        if len(self.snr_db) != len(self.points):
            raise ValueError("snr_db and points must have the same length")
        if len({p.K for p in self.points}) > 1:
            raise ValueError("all points must share one K")
        return self

    @classmethod
    def from_grid(
        cls, snr_db: List[float], K: int, metadata: Optional[Dict[str, Any]] = None
    ) -> "LargeSystemTable":
        grid = [float(s) for s in snr_db]
        return cls(snr_db=grid, points=large_system_table(grid, K), metadata=metadata or {})

    def to_csv(self, path: Optional[PathLike] = None) -> str:
        metadata = dict(self.metadata)
        if self.points:
            metadata["K"] = self.points[0].K
        buffer = io.StringIO()
        buffer.write(METADATA_PREFIX + json.dumps(metadata, sort_keys=True) + "\n")
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(LARGE_SYSTEM_COLUMNS)
        for snr_db, point in zip(self.snr_db, self.points):
            writer.writerow([repr(snr_db), repr(point.xi), repr(point.rate_bits)])
        text = buffer.getvalue()
        if path is not None:
            Path(path).write_text(text, encoding="utf-8")
        return text

    @classmethod
    def from_csv(cls, source: PathLike) -> "LargeSystemTable":
        metadata, rows = _read_csv(source)
        if rows and "K" not in metadata:
            raise ExperimentError(f"Large-system CSV {source} does not record K in its metadata")
        K = int(metadata.pop("K", 1))
        snr_db, points = [], []
        for row in rows:
            missing = [c for c in LARGE_SYSTEM_COLUMNS if c not in row]
            if missing:
                raise ExperimentError(f"Large-system CSV is missing columns {missing}")
            xi = float(row["xi_opt"])
            snr_db.append(float(row["snr_db"]))
            points.append(
                LargeSystemPoint(
                    rho=10.0 ** (snr_db[-1] / 10.0), xi=xi, K=K, g=g_of_xi(xi), rate_bits=float(row["rate_bits"])
                )
            )
        return cls(snr_db=snr_db, points=points, metadata=metadata)

    def to_json(self, path: Optional[PathLike] = None) -> str:
        text = self.model_dump_json(indent=2)
        if path is not None:
            Path(path).write_text(text, encoding="utf-8")
        return text

    @classmethod
    def from_json(cls, source: PathLike) -> "LargeSystemTable":
        return cls.model_validate_json(Path(source).read_text(encoding="utf-8"))


def build_metadata(kind: str, **fields: Any) -> Dict[str, Any]:
    """Metadata block shared by all results: experiment kind, code version and inputs."""
    metadata: Dict[str, Any] = {"kind": kind, "version": config.VERSION}
    metadata.update(fields)
    return metadata


def _read_csv(source: PathLike) -> Tuple[Dict[str, Any], List[Dict[str, str]]]:
    """Split a result CSV into its metadata and its data rows."""
    text = Path(source).read_text(encoding="utf-8")
    metadata: Dict[str, Any] = {}
    lines = text.splitlines()
    if lines and lines[0].startswith(METADATA_PREFIX):
        try:
            metadata = json.loads(lines[0][len(METADATA_PREFIX):])
        except json.JSONDecodeError as e:
            raise ExperimentError(f"Result metadata in {source} is not valid JSON") from e
        lines = lines[1:]
    return metadata, list(csv.DictReader(lines))
