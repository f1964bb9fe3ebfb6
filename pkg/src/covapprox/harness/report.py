"""Report files.

A report is written as deterministic JSON (sorted keys, repr floats,
non-finite floats spelled as strings) or as CSV of the per-trial rows.
Wall-clock data never enters the report body; it goes to a sidecar file
``<output>.sidecar.json`` so identical configs give byte-identical reports.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .. import __version__

SCHEMA = "covapprox-report/1"


@dataclass
class ReportFile:
    experiment: str
    config: dict
    columns: list[str]
    rows: list[dict] = field(default_factory=list)
    aggregate: dict = field(default_factory=dict)
    library_version: str = __version__
    sidecar: dict = field(default_factory=dict)  # wall clock etc., excluded from the body

    @property
    def passed(self) -> bool | None:
        return self.aggregate.get("passed")

    def body(self) -> dict:
        return {
            "schema": SCHEMA,
            "experiment": self.experiment,
            "library_version": self.library_version,
            "config": self.config,
            "columns": list(self.columns),
            "rows": self.rows,
            "aggregate": self.aggregate,
        }


def _clean(obj):
    if isinstance(obj, float):
        if math.isnan(obj):
            return "nan"
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return obj
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        return _clean(obj.item())
    return obj


def _restore(obj):
    if isinstance(obj, str) and obj in ("nan", "inf", "-inf"):
        return float(obj)
    if isinstance(obj, dict):
        return {k: _restore(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_restore(v) for v in obj]
    return obj


def report_json(report: ReportFile) -> str:
    return json.dumps(_clean(report.body()), sort_keys=True, indent=1) + "\n"


def report_csv(report: ReportFile) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(report.columns), extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    for row in report.rows:
        writer.writerow({k: _clean(v) for k, v in row.items()})
    return buf.getvalue()


def write_report(report: ReportFile, path, format: str = "json") -> Path:
    if format not in ("json", "csv"):
        raise ValueError(f"unknown report format {format!r}; expected 'json' or 'csv'")
    path = Path(path)
    text = report_json(report) if format == "json" else report_csv(report)
    path.write_text(text)
    if report.sidecar:
        Path(str(path) + ".sidecar.json").write_text(json.dumps(_clean(report.sidecar), sort_keys=True) + "\n")
    return path


def read_report(path) -> ReportFile:
    data = _restore(json.loads(Path(path).read_text()))
    if data.get("schema") != SCHEMA:
        raise ValueError(f"{path} is not a {SCHEMA} report")
    return ReportFile(
        experiment=data["experiment"],
        config=data["config"],
        columns=data["columns"],
        rows=data["rows"],
        aggregate=data["aggregate"],
        library_version=data["library_version"],
    )
