"""Rendering of command results (json/csv/table/dot)."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .errors import InvalidInput

FORMATS = ("json", "dot", "csv", "table")


@dataclass
class Report:
    """Result of one subcommand.

    ``payload`` is the JSON document. ``rows`` feed csv and table output;
    when absent the payload is flattened into key/value rows instead.
    """

    kind: str
    payload: Dict[str, Any]
    rows: List[Dict[str, Any]] = field(default_factory=list)
    columns: Tuple[str, ...] = ()
    dot: Optional[str] = None
    sort_rows: bool = True


def _json_default(value: Any) -> Any:
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (set, frozenset)):
        return sorted(value)
    if hasattr(value, "to_dict"):
        return value.to_dict()
    raise TypeError(f"cannot serialise {type(value).__name__}")


def _flatten(value: Any, prefix: str = "") -> List[Tuple[str, Any]]:
    if isinstance(value, Mapping):
        items: List[Tuple[str, Any]] = []
        for key in sorted(value):
            items.extend(_flatten(value[key], f"{prefix}.{key}" if prefix else str(key)))
        return items
    if isinstance(value, (list, tuple)):
        items = []
        for index, item in enumerate(value):
            items.extend(_flatten(item, f"{prefix}[{index}]"))
        return items
    return [(prefix, value)]


def _sort_key(value: Any) -> Tuple[int, Any]:
    if isinstance(value, (int, float, np.integer, np.floating)) and not isinstance(value, bool):
        return (0, float(value))
    return (1, "" if value is None else str(value))


def _cell(value: Any) -> str:
    if isinstance(value, float):
        return "nan" if math.isnan(value) else repr(value)
    if isinstance(value, bool):
        return str(value).lower()
    return "" if value is None else str(value)


class ReportBuilder:
    """Renders a :class:`Report` in one output format and persists it."""

    def __init__(self, fmt: str = "json") -> None:
        fmt = fmt.strip().lower()
        if fmt not in FORMATS:
            raise InvalidInput(f"unknown output format {fmt!r}; choose from {', '.join(FORMATS)}")
        self.fmt = fmt

    def build(self, report: Report) -> str:
        if self.fmt == "json":
            return self._render_json(report)
        if self.fmt == "dot":
            if report.dot is None:
                raise InvalidInput(f"dot output is not available for {report.kind}")
            return report.dot
        columns, rows = self._tabular(report)
        if self.fmt == "csv":
            return self._render_csv(columns, rows)
        return self._render_table(report.kind, columns, rows)

    def persist(self, content: str, path: Path) -> str:
        target = Path(path).expanduser()
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(content if content.endswith("\n") else content + "\n", encoding="utf-8")
        return str(target)

    def _render_json(self, report: Report) -> str:
        return json.dumps(report.payload, sort_keys=True, indent=2, default=_json_default)

    def _tabular(self, report: Report) -> Tuple[Sequence[str], List[Dict[str, Any]]]:
        if report.rows:
            columns = report.columns or tuple(report.rows[0])
            rows = list(report.rows)
            if report.sort_rows:
                rows.sort(key=lambda row: tuple(_sort_key(row.get(c)) for c in columns))
            return columns, rows
        payload = json.loads(self._render_json(report))
        return ("key", "value"), [{"key": k, "value": v} for k, v in _flatten(payload)]

    def _render_csv(self, columns: Sequence[str], rows: List[Dict[str, Any]]) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(row.get(c)) for c in columns])
        return buffer.getvalue().rstrip("\n")

    def _render_table(self, kind: str, columns: Sequence[str], rows: List[Dict[str, Any]]) -> str:
        cells = [[_cell(row.get(c)) for c in columns] for row in rows]
        widths = [
            max([len(c)] + [len(line[i]) for line in cells]) for i, c in enumerate(columns)
        ]
        rule = "=" * (sum(widths) + 3 * (len(widths) - 1))
        lines = [rule, kind, rule]
        lines.append(" | ".join(c.ljust(w) for c, w in zip(columns, widths)))
        lines.append("-+-".join("-" * w for w in widths))
        for line in cells:
            lines.append(" | ".join(v.ljust(w) for v, w in zip(line, widths)))
        lines.append(f"({len(cells)} rows)")
        return "\n".join(lines)
