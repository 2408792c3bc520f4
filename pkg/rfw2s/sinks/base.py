"""
Base report sink interface.
"""

from abc import ABC, abstractmethod

from rfw2s.types import TabularReport


class ReportSink(ABC):
    """Destination for tabular reports (blocking I/O)."""

    @abstractmethod
    def write(self, report: TabularReport) -> None:
        """Write a whole report, replacing earlier content."""
        pass

    def close(self) -> None:
        """Cleanup resources (optional)."""
        pass
