"""
JSON report sink.
"""

import json
import sys
from pathlib import Path

from rfw2s.exceptions import InvalidParameter, ReportIOError
from rfw2s.schemas import Report
from rfw2s.sinks.base import ReportSink
from rfw2s.types import TabularReport


def _jsonable(value: object) -> object:
    return getattr(value, "value", value)


class JsonSink(ReportSink):
    """
    Writes a report as a JSON object {"columns": [...], "rows": [{...}, ...]}.

    Each row is a flat object keyed by column name, so a deterministic-equivalent report
    row carries exactly the flat key schema of the equivalents. Floats are written with
    their shortest round-tripping representation, which read() restores bit for bit.

    Attributes:
        path (Path | None): Destination file; None writes to standard output.
    """

    def __init__(self, path: Path | str | None = None) -> None:
        self.path = Path(path) if path is not None else None

    def write(self, report: TabularReport) -> None:
        columns = list(report.columns)
        payload = {
            "columns": columns,
            "rows": [{column: _jsonable(row.get(column)) for column in columns} for row in report.rows],
        }
        text = json.dumps(payload, indent=2)
        if self.path is None:
            sys.stdout.write(text + "\n")
            return
        try:
            self.path.write_text(text + "\n", encoding="utf-8")
        except OSError as e:
            raise ReportIOError(f"cannot write JSON report to {self.path}: {e}") from e

    @staticmethod
    def read(path: Path | str) -> Report:
        """
        Parses a report written by JsonSink.

        Raises:
            ReportIOError: If the file cannot be read.
            InvalidParameter: If the content is not a report.
        """
        try:
            payload = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as e:
            raise ReportIOError(f"cannot read JSON report from {path}: {e}") from e
        except json.JSONDecodeError as e:
            raise InvalidParameter(f"{path} is not valid JSON: {e}") from e
        if not isinstance(payload, dict) or "columns" not in payload or "rows" not in payload:
            raise InvalidParameter(f"{path} does not contain a report")
        return Report(columns=tuple(payload["columns"]), rows=list(payload["rows"]))
