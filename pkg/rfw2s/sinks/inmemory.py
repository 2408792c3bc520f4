"""
In-memory report sink implementation.
"""

import copy
import threading

from rfw2s.schemas import Report
from rfw2s.sinks.base import ReportSink
from rfw2s.types import TabularReport


class InMemorySink(ReportSink):
    """
    Keeps every written report in memory.

    Reports are deep-copied on write so later mutation by the producer does not leak in.
    Writes are serialized with a lock.

    Attributes:
        reports (list[Report]): Reports in write order.
    """

    def __init__(self) -> None:
        self.reports: list[Report] = []
        self._lock = threading.RLock()

    def write(self, report: TabularReport) -> None:
        with self._lock:
            self.reports.append(Report(columns=tuple(report.columns), rows=copy.deepcopy(list(report.rows))))

    @property
    def last(self) -> Report | None:
        with self._lock:
            return self.reports[-1] if self.reports else None
