"""Exception types shared across the engine."""

from __future__ import annotations


class MoonError(Exception):
    """Base class for all engine errors."""


class NotebookParseError(MoonError):
    """The notebook document is not well-formed."""

    def __init__(self, message: str, position: int | None = None):
        super().__init__(message)
        self.position = position


class NotebookVersionError(MoonError):
    """The notebook format version is unsupported."""


class TraceFormatError(MoonError):
    """The stored log trace metadata is present but malformed."""


class ScriptSyntaxError(MoonError):
    """A scenario script failed to parse.

    ``span`` is a half-open (start, end) character range into the source.
    """

    def __init__(self, message: str, span: tuple[int, int]):
        super().__init__(f"{message} (at {span[0]}..{span[1]})")
        self.reason = message
        self.span = span


class ScriptValidationError(MoonError):
    """A script failed validation against a notebook.

    Carries the full report so callers can surface individual issues.
    """

    def __init__(self, report):
        issues = "; ".join(i.message for i in report.issues if i.severity == "error")
        super().__init__(f"script does not validate: {issues}")
        self.report = report


class AnyOrderBlowupError(MoonError):
    """An any-order group has too many elements to expand."""

    def __init__(self, group: str, size: int, limit: int):
        super().__init__(
            f"any-order group {group} has {size} elements; "
            f"expansion limit is {limit}"
        )
        self.group = group
        self.size = size
        self.limit = limit


class StateLimitError(MoonError):
    """Compilation exceeded the configured automaton size budget."""


class CellRangeError(MoonError):
    """A cell position is outside the notebook."""


class UnknownCellError(MoonError):
    """An executed cell reference does not name a code cell of the notebook."""


class ForbiddenCellError(MoonError):
    """Attempted deletion of a cell bound to the scenario."""


class UndefinedMetricError(MoonError):
    """A metric is undefined for the given trace (e.g. fitness of an empty trace)."""
