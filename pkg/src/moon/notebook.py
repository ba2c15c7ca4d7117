"""Notebook documents, cell labels, and the persisted log trace.

Cells are labelled by kind and position: ``C<i>`` for code cells and
``T<j>`` for text (markdown) cells.  The log trace of code-cell executions
lives under the ``moon`` key of the notebook's top-level metadata and is
the only part of the document this module rewrites; everything else
round-trips untouched.
"""

from __future__ import annotations

import json
import uuid
from dataclasses import dataclass, field, replace
from typing import Any, Iterable, Literal

from .errors import (
    CellRangeError,
    NotebookParseError,
    NotebookVersionError,
    TraceFormatError,
)

CellKind = Literal["code", "text"]

LOG_TRACE_KEY = "moon"

_KIND_PREFIX = {"code": "C", "text": "T"}
_PREFIX_KIND = {"C": "code", "T": "text"}


@dataclass(frozen=True, order=True)
class CellRef:
    """A cell identity in label space: kind plus notebook position."""

    kind: CellKind
    index: int

    def __post_init__(self):
        if self.index < 0:
            raise ValueError(f"negative cell index: {self.index}")

    def __str__(self) -> str:
        return f"{_KIND_PREFIX[self.kind]}{self.index}"

    @classmethod
    def parse(cls, label: str) -> CellRef:
        """Parse a ``C<i>`` / ``T<j>`` label."""
        if not label or label[0] not in _PREFIX_KIND or not label[1:].isdigit():
            raise ValueError(f"not a cell label: {label!r}")
        return cls(_PREFIX_KIND[label[0]], int(label[1:]))

    @classmethod
    def code(cls, index: int) -> CellRef:
        return cls("code", index)

    @classmethod
    def text(cls, index: int) -> CellRef:
        return cls("text", index)


@dataclass(frozen=True)
class Cell:
    """One notebook cell.

    ``stable_id`` survives insertions and deletions of other cells while
    ``position`` is reassigned; scenario bookkeeping hangs off the former.
    ``raw`` keeps the original document fields (outputs, attachments, ...)
    so serialization is lossless.
    """

    stable_id: str
    position: int
    kind: CellKind
    source: str
    raw: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def ref(self) -> CellRef:
        return CellRef(self.kind, self.position)


@dataclass(frozen=True)
class LogEntry:
    """One recorded code-cell execution.

    ``white`` marks executions of cells outside the scenario; these are
    kept in the log but excluded from conformance metrics.
    """

    cell: CellRef
    ts: int
    white: bool = False

    def __post_init__(self):
        if self.cell.kind != "code":
            raise ValueError("log entries record code cells only")


@dataclass(frozen=True)
class LogTrace:
    """Every code-cell execution in order, compliant or not."""

    entries: tuple[LogEntry, ...] = ()

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def append(self, cell: CellRef, white: bool = False) -> LogTrace:
        """Return a new trace with one more entry at the next tick."""
        ts = self.entries[-1].ts + 1 if self.entries else 0
        return LogTrace(self.entries + (LogEntry(cell, ts, white),))

    def cells(self) -> tuple[CellRef, ...]:
        return tuple(e.cell for e in self.entries)

    @classmethod
    def of(cls, cells: Iterable[CellRef]) -> LogTrace:
        trace = cls()
        for cell in cells:
            trace = trace.append(cell)
        return trace


@dataclass(frozen=True)
class NotebookDoc:
    """An in-memory notebook: ordered cells plus open metadata."""

    cells: tuple[Cell, ...] = ()
    metadata: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict, repr=False, compare=False)

    def __len__(self) -> int:
        return len(self.cells)

    def cell_at(self, position: int) -> Cell:
        if not 0 <= position < len(self.cells):
            raise CellRangeError(
                f"position {position} out of range for {len(self.cells)}-cell notebook"
            )
        return self.cells[position]

    def code_refs(self) -> tuple[CellRef, ...]:
        return tuple(c.ref for c in self.cells if c.kind == "code")


def _cell_source(raw_source: Any) -> str:
    if isinstance(raw_source, str):
        return raw_source
    if isinstance(raw_source, list) and all(isinstance(s, str) for s in raw_source):
        return "".join(raw_source)
    raise NotebookParseError(f"invalid cell source: {raw_source!r}")


def _fresh_id() -> str:
    return uuid.uuid4().hex[:12]


def parse_notebook(document: str | bytes) -> NotebookDoc:
    """Parse a notebook document (standard JSON format, version >= 4).

    Code cells map to kind ``code`` and markdown cells to kind ``text``;
    any other cell type is rejected.  Parsing is pure: the same bytes
    always produce an equal document.
    """
    if isinstance(document, bytes):
        document = document.decode("utf-8")
    try:
        data = json.loads(document)
    except json.JSONDecodeError as exc:
        raise NotebookParseError(
            f"malformed notebook document: {exc.msg}", position=exc.pos
        ) from exc
    if not isinstance(data, dict):
        raise NotebookParseError("notebook document must be a JSON object")

    version = data.get("nbformat")
    if not isinstance(version, int):
        raise NotebookParseError("missing or invalid nbformat field")
    if version < 4:
        raise NotebookVersionError(f"unsupported notebook format version {version}")

    raw_cells = data.get("cells")
    if not isinstance(raw_cells, list):
        raise NotebookParseError("notebook has no cell list")

    cells = []
    for position, raw in enumerate(raw_cells):
        if not isinstance(raw, dict):
            raise NotebookParseError(f"cell {position} is not an object")
        cell_type = raw.get("cell_type")
        if cell_type == "code":
            kind: CellKind = "code"
        elif cell_type == "markdown":
            kind = "text"
        else:
            raise NotebookParseError(
                f"cell {position} has unsupported type {cell_type!r}"
            )
        stable_id = raw.get("id")
        if not isinstance(stable_id, str) or not stable_id:
            stable_id = _fresh_id()
        cells.append(
            Cell(
                stable_id=stable_id,
                position=position,
                kind=kind,
                source=_cell_source(raw.get("source", "")),
                raw=raw,
            )
        )

    metadata = data.get("metadata", {})
    if not isinstance(metadata, dict):
        raise NotebookParseError("notebook metadata must be an object")
    return NotebookDoc(cells=tuple(cells), metadata=dict(metadata), raw=data)


def dumps_notebook(doc: NotebookDoc) -> str:
    """Serialize back to document text, preserving unknown fields."""
    data = dict(doc.raw) if doc.raw else {"nbformat": 4, "nbformat_minor": 5}
    data["metadata"] = doc.metadata
    raw_cells = []
    for cell in doc.cells:
        raw = dict(cell.raw) if cell.raw else _minimal_raw_cell(cell)
        raw_cells.append(raw)
    data["cells"] = raw_cells
    return json.dumps(data, ensure_ascii=False, indent=1)


def _minimal_raw_cell(cell: Cell) -> dict:
    raw: dict = {
        "id": cell.stable_id,
        "cell_type": "code" if cell.kind == "code" else "markdown",
        "metadata": {},
        "source": cell.source,
    }
    if cell.kind == "code":
        raw["execution_count"] = None
        raw["outputs"] = []
    return raw


def cell_label(doc: NotebookDoc, position: int) -> CellRef:
    """Label of the cell at ``position`` (``C<i>`` or ``T<i>``)."""
    return doc.cell_at(position).ref


def read_log_trace(doc: NotebookDoc) -> LogTrace:
    """Load the stored log trace, or an empty one when absent.

    A present-but-malformed trace raises :class:`TraceFormatError` rather
    than being silently dropped.
    """
    stored = doc.metadata.get(LOG_TRACE_KEY)
    if stored is None:
        return LogTrace()
    if not isinstance(stored, list):
        raise TraceFormatError(
            f"metadata key {LOG_TRACE_KEY!r} holds {type(stored).__name__}, not a list"
        )
    entries = []
    for i, item in enumerate(stored):
        if not isinstance(item, dict):
            raise TraceFormatError(f"log trace entry {i} is not an object")
        try:
            cell = CellRef.parse(item["cell"])
        except (KeyError, TypeError, ValueError) as exc:
            raise TraceFormatError(f"log trace entry {i} has no valid cell label") from exc
        ts = item.get("ts")
        if not isinstance(ts, int) or isinstance(ts, bool):
            raise TraceFormatError(f"log trace entry {i} has no integer timestamp")
        white = item.get("white", False)
        if not isinstance(white, bool):
            raise TraceFormatError(f"log trace entry {i} has a non-boolean white marker")
        if cell.kind != "code":
            raise TraceFormatError(f"log trace entry {i} references a non-code cell")
        entries.append(LogEntry(cell, ts, white))
    return LogTrace(tuple(entries))


def write_log_trace(doc: NotebookDoc, trace: LogTrace) -> NotebookDoc:
    """Store ``trace`` under the engine's metadata key; other keys untouched."""
    stored = []
    for entry in trace:
        item: dict = {"cell": str(entry.cell), "ts": entry.ts}
        if entry.white:
            item["white"] = True
        stored.append(item)
    metadata = dict(doc.metadata)
    metadata[LOG_TRACE_KEY] = stored
    return replace(doc, metadata=metadata)
