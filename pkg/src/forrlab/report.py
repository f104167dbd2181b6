"""Experiment reports and their json-lines / csv emission."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any, Iterable

CSV_FIELDS = ("experiment", "params", "estimate", "stderr", "n_samples", "seed", "passed", "extra", "wall_time")


@dataclass
class ExperimentReport:
    experiment: str
    params: dict
    estimate: float
    stderr: float = 0.0
    n_samples: int = 0
    seed: int | None = None
    passed: bool | None = None
    extra: dict = field(default_factory=dict)
    wall_time: float | None = None

    def __post_init__(self):
        if self.stderr < 0:
            raise ValueError("stderr must be non-negative")

    def within(self, target: float, n_sigma: float = 3.0) -> bool:
        return abs(self.estimate - target) <= n_sigma * self.stderr


def mean_report(experiment: str, params: dict, values, seed=None, **extra) -> ExperimentReport:
    """Sample mean with standard error ``stdev / sqrt(n)``."""
    import numpy as np

    values = np.asarray(values, dtype=np.float64)
    n = values.size
    se = float(values.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return ExperimentReport(experiment, dict(params), float(values.mean()), se, int(n), seed, extra=extra)


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"non-finite value {x!r} cannot be emitted")
    return format(x, ".17g")


def _encode(value: Any) -> str:
    if isinstance(value, bool) or value is None:
        return json.dumps(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return _fmt_float(value)
    if hasattr(value, "item") and not isinstance(value, (list, tuple, dict)):
        return _encode(value.item())
    if isinstance(value, dict):
        parts = [f"{json.dumps(str(k))}: {_encode(v)}" for k, v in sorted(value.items())]
        return "{" + ", ".join(parts) + "}"
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_encode(v) for v in value) + "]"
    return json.dumps(value)


def _check(report: ExperimentReport):
    if not math.isfinite(report.estimate):
        raise ValueError(f"report {report.experiment!r} has non-finite estimate {report.estimate!r}")


def to_json_line(report: ExperimentReport, timing: bool = False) -> str:
    _check(report)
    fields = [
        ("experiment", report.experiment),
        ("params", report.params),
        ("estimate", float(report.estimate)),
        ("stderr", float(report.stderr)),
        ("n_samples", int(report.n_samples)),
        ("seed", report.seed),
        ("passed", report.passed),
        ("extra", report.extra),
    ]
    if timing:
        fields.append(("wall_time", report.wall_time))
    return "{" + ", ".join(f"{json.dumps(k)}: {_encode(v)}" for k, v in fields) + "}"


def emit(reports: Iterable[ExperimentReport], fmt: str = "json-lines", timing: bool = False) -> str:
    """Render reports as text with a stable field order.

    Wall time is left out unless ``timing`` is set, so identical runs give
    byte-identical output.
    """
    reports = list(reports)
    if fmt == "json-lines":
        return "".join(to_json_line(r, timing) + "\n" for r in reports)
    if fmt == "csv":
        buf = io.StringIO()
        names = CSV_FIELDS if timing else CSV_FIELDS[:-1]
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(names)
        for r in reports:
            _check(r)
            row = [
                r.experiment,
                _encode(r.params),
                _fmt_float(float(r.estimate)),
                _fmt_float(float(r.stderr)),
                str(r.n_samples),
                "" if r.seed is None else str(r.seed),
                "" if r.passed is None else str(r.passed).lower(),
                _encode(r.extra),
            ]
            if timing:
                row.append("" if r.wall_time is None else _fmt_float(r.wall_time))
            writer.writerow(row)
        return buf.getvalue()
    raise ValueError(f"unknown format {fmt!r}")


def parse_json_lines(text: str) -> list[ExperimentReport]:
    out = []
    for line in text.splitlines():
        if not line.strip():
            continue
        d = json.loads(line)
        out.append(ExperimentReport(**d))
    return out
