from typing import Any, Protocol, Sequence

from rfw2s.schemas import RunResult


class ReplicateHook(Protocol):
    """
    Callable notified after every Monte-Carlo replicate, in ascending replicate order.

    Hooks are the extension point for per-run logging and progress reporting. A hook that
    raises aborts the run; the failure surfaces as HookError.
    """

    def __call__(self, replicate: int, seed: int, result: RunResult) -> None:
        """
        Receives one finished replicate.

        Args:
            replicate (int): Zero-based replicate index.
            seed (int): Seed of the generator stream the replicate consumed.
            result (RunResult): Errors and coefficient norms of the replicate.

        Returns:
            None
        """
        ...


class TabularReport(Protocol):
    """
    Anything the report sinks can write: an ordered header plus rows keyed by column name.
    """

    @property
    def columns(self) -> Sequence[str]: ...

    @property
    def rows(self) -> Sequence[dict[str, Any]]: ...
