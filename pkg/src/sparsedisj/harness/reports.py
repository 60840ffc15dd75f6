"""
Machine readable reports.  JSON is the canonical form (sorted keys, 2-space
indent, schema_version at the top level); CSV is a flat rendering for
spreadsheets and plotting tools.
"""
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, TextIO
import csv
import io
import sys

from ..resources import ResourceBase, SCHEMA_VERSION, dumps, to_jsonable

SWEEP_COLUMNS = ("k", "r", "total_bits", "bits_over_k_logr_k", "error_rate")


@dataclass
class Report(ResourceBase):
    config: dict
    results: Any = None
    verdicts: dict = field(default_factory=dict)
    wall_clock: float = 0.0
    rows: list[dict]|None = None
    schema_version: int = SCHEMA_VERSION

    @property
    def verdict(self) -> bool:
        return all(self.verdicts.values())

    def __bool__(self) -> bool:
        return self.verdict

    def __str__(self) -> str:
        failed = [k for k, v in self.verdicts.items() if not v]
        return f"{self.config.get('subcommand')}:{'pass' if not failed else 'fail ' + ','.join(failed)}"

    def __repr__(self) -> str:
        return f"{str(self.__class__)}:{str(self)}"

    def to_base(self) -> dict:
        b = super().to_base()
        b['verdict'] = self.verdict
        if b['rows'] is None:
            del b['rows']
        return b


def flatten(value: Any, prefix: str = "") -> dict:
    """Nested dicts become dotted keys; lists are kept as JSON text."""
    out = {}
    base = to_jsonable(value)
    if not isinstance(base, dict):
        return {prefix or "value": base}
    for k, v in base.items():
        key = f"{prefix}.{k}" if prefix else str(k)
        if isinstance(v, dict):
            out |= flatten(v, key)
        elif isinstance(v, list):
            out[key] = dumps(v).strip().replace("\n", "").replace("  ", "")
        else:
            out[key] = v
    return out


def csv_text(rows: Iterable[dict], columns: Iterable[str]|None = None) -> str:
    rows = list(rows)
    if columns is None:
        columns = []
        for row in rows:
            columns.extend(c for c in row if c not in columns)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n", extrasaction="ignore")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def render(report: Report, fmt: str) -> str:
    if fmt == "json":
        return dumps(report)
    if fmt == "csv":
        if report.rows is not None:
            return csv_text(report.rows, SWEEP_COLUMNS if report.config.get('subcommand') == "sweep" else None)
        row = flatten(report.results, "results") | flatten(report.verdicts, "verdicts")
        row['verdict'] = report.verdict
        row['wall_clock'] = report.wall_clock
        return csv_text([row])
    raise ValueError(f"unknown report format: {fmt}")


def write_report(report: Report, out: str|Path|None, fmt: str = "json",
                 stream: TextIO|None = None) -> None:
    """Write to `out`, or to `stream` (stdout by default) when out is None or "-"."""
    text = render(report, fmt)
    if out is None or str(out) == "-":
        (stream or sys.stdout).write(text)
        return
    path = Path(out)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
