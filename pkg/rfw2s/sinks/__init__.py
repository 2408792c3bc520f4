from pathlib import Path

from rfw2s.constants import OutputFormat
from rfw2s.sinks.base import ReportSink
from rfw2s.sinks.csv import CsvRunLog, CsvSink
from rfw2s.sinks.inmemory import InMemorySink
from rfw2s.sinks.json import JsonSink
from rfw2s.types import TabularReport

_SINKS: dict[OutputFormat, type[CsvSink] | type[JsonSink]] = {
    OutputFormat.CSV: CsvSink,
    OutputFormat.JSON: JsonSink,
}


def make_sink(fmt: OutputFormat | str, path: Path | str | None = None) -> ReportSink:
    """
    Creates the sink of an output format.

    Args:
        fmt (OutputFormat | str): "csv", "json" or "memory".
        path (Path | str | None): Destination of a file sink; None writes to standard output.
            Ignored by the in-memory sink.

    Raises:
        ValueError: On an unknown format.
    """
    fmt = OutputFormat(fmt)
    if fmt == OutputFormat.MEMORY:
        return InMemorySink()
    return _SINKS[fmt](path)


def emit_report(report: TabularReport, fmt: OutputFormat | str, path: Path | str | None = None) -> None:
    """
    Writes a report in the requested format with a stable column order.

    Args:
        report (TabularReport): Header plus rows.
        fmt (OutputFormat | str): "csv" or "json".
        path (Path | str | None): Destination; None writes to standard output.

    Raises:
        ReportIOError: If the destination cannot be written.
    """
    sink = make_sink(fmt, path)
    try:
        sink.write(report)
    finally:
        sink.close()


__all__ = [
    "ReportSink",
    "CsvSink",
    "JsonSink",
    "InMemorySink",
    "CsvRunLog",
    "make_sink",
    "emit_report",
]
