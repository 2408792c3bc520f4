"""
CSV report sink and the per-replicate CSV run log.
"""

import csv
import math
import sys
import threading
from pathlib import Path
from typing import Any, TextIO

from rfw2s.exceptions import ReportIOError
from rfw2s.schemas import RunResult
from rfw2s.sinks.base import ReportSink
from rfw2s.types import TabularReport

RUN_LOG_COLUMNS = ("replicate", "seed", "teacher_error", "student_error", "beta_t_norm", "beta_gap_norm")


def format_cell(value: Any) -> str:
    """
    Renders one CSV cell. Floats use 17 significant digits, None becomes an empty cell and
    enums their value.
    """
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return format(value, ".17g")
    return str(getattr(value, "value", value))


def _write_rows(f: TextIO, report: TabularReport) -> None:
    writer = csv.writer(f, lineterminator="\n")
    columns = list(report.columns)
    writer.writerow(columns)
    for row in report.rows:
        writer.writerow([format_cell(row.get(column)) for column in columns])


class CsvSink(ReportSink):
    """
    Writes a report as CSV with a header row in the report's column order.

    Attributes:
        path (Path | None): Destination file; None writes to standard output.
    """

    def __init__(self, path: Path | str | None = None) -> None:
        self.path = Path(path) if path is not None else None

    def write(self, report: TabularReport) -> None:
        if self.path is None:
            _write_rows(sys.stdout, report)
            return
        try:
            with open(self.path, "w", newline="", encoding="utf-8") as f:
                _write_rows(f, report)
        except OSError as e:
            raise ReportIOError(f"cannot write CSV report to {self.path}: {e}") from e


class CsvRunLog:
    """
    Replicate hook that appends one CSV row per finished replicate.

    The header is written when the file is new or empty. Appends are serialized with a lock.

    Attributes:
        path (Path): Log file.
    """

    def __init__(self, path: Path | str) -> None:
        self.path = Path(path)
        self._lock = threading.Lock()

    def __call__(self, replicate: int, seed: int, result: RunResult) -> None:
        row = (
            replicate,
            seed,
            result.teacher_error,
            result.student_error,
            result.beta_t_norm,
            result.beta_gap_norm,
        )
        with self._lock:
            try:
                fresh = not self.path.exists() or self.path.stat().st_size == 0
                with open(self.path, "a", newline="", encoding="utf-8") as f:
                    writer = csv.writer(f, lineterminator="\n")
                    if fresh:
                        writer.writerow(RUN_LOG_COLUMNS)
                    writer.writerow([format_cell(v) for v in row])
            except OSError as e:
                raise ReportIOError(f"cannot append to run log {self.path}: {e}") from e
