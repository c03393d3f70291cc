"""Verification reports and their JSON serialization."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__


@dataclass
class CheckResult:
    name: str
    max_residual: float | None
    tolerance: float
    passed: bool
    wall_time: float = 0.0
    details: dict = field(default_factory=dict)
    error: str | None = None

    def to_dict(self, timings: bool = False) -> dict:
        out = {
            "name": self.name,
            "maxResidual": _clean(self.max_residual),
            "tolerance": self.tolerance,
            "pass": bool(self.passed),
        }
        if self.details:
            out["details"] = _clean(self.details)
        if self.error is not None:
            out["error"] = self.error
        if timings:
            out["wallTime"] = round(self.wall_time, 6)
        return out


@dataclass
class VerificationReport:
    suite: str
    config: dict
    checks: list[CheckResult] = field(default_factory=list)
    artifact_version: str = __version__

    @property
    def overall(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self, timings: bool = False) -> dict:
        return {
            "suite": self.suite,
            "config": _clean(self.config),
            "checks": [c.to_dict(timings) for c in self.checks],
            "overall": self.overall,
            "artifactVersion": self.artifact_version,
        }

    def to_json(self, timings: bool = False) -> str:
        return json.dumps(self.to_dict(timings), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _clean(x):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if hasattr(x, "item") and not isinstance(x, (str, bytes)):
        x = x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return repr(x)
    return x


def emit_report(report: VerificationReport, path, timings: bool = False) -> None:
    """Write ``report`` as key-sorted UTF-8 JSON."""
    path = Path(path)
    try:
        path.write_text(report.to_json(timings), encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc}") from exc
