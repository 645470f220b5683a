"""Deterministic CSV/JSON report emission."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

__all__ = ["Report", "report_emit", "format_value"]


def format_value(v) -> str:
    """Text for one CSV cell; floats use ``repr`` so reruns are byte-identical."""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    if hasattr(v, "item"):
        return format_value(v.item())
    return str(v)


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return format_value(v)
    if hasattr(v, "item"):
        return _jsonable(v.item())
    return v


@dataclass
class Report:
    """Tabular result: per-trial ``rows`` plus plot-ready ``summary`` rows."""

    name: str
    columns: tuple
    rows: list = field(default_factory=list)
    summary: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)
    passed: Optional[bool] = None

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([format_value(row.get(c, "")) for c in self.columns])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "columns": list(self.columns),
            "rows": [[_jsonable(r.get(c)) for c in self.columns] for r in self.rows],
            "summary": [{k: _jsonable(v) for k, v in s.items()} for s in self.summary],
            "meta": {k: _jsonable(v) for k, v in self.meta.items()},
            "passed": self.passed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def report_emit(report: Report, out: Optional[str] = None, fmt: str = "csv") -> list:
    """Write the report; ``out`` gets the main format and a mirror goes next to it.

    With ``fmt="csv"`` the CSV is written to ``out`` and JSON to ``out`` with
    a ``.json`` suffix; ``fmt="json"`` swaps the roles. Returns written paths.
    """
    if out is None:
        return []
    main = Path(out)
    if fmt not in ("csv", "json"):
        raise ValueError(f"format must be csv or json, got {fmt!r}")
    mirror = main.with_suffix(".json" if fmt == "csv" else ".csv")
    if mirror == main:
        mirror = main.with_name(main.name + (".json" if fmt == "csv" else ".csv"))
    texts = {"csv": report.to_csv(), "json": report.to_json()}
    other = "json" if fmt == "csv" else "csv"
    written = []
    for path, kind in ((main, fmt), (mirror, other)):
        try:
            path.write_text(texts[kind], encoding="utf-8")
        except OSError as exc:
            raise OSError(f"cannot write report to {path}: {exc.strerror or exc}") from exc
        written.append(str(path))
    return written
