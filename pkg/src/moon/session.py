"""Live guidance: execute cells against the compiled scenario automaton.

A session tracks the automaton state, a user trace of valid transitions,
and the raw log of every execution.  Cells are colored green (executable
now), orange (already executed), red (not yet reachable); cells outside
the scenario stay white.  Scenario identity survives cell insertion
because bindings are keyed by stable cell ids, not positions.
"""

from __future__ import annotations

import uuid
from dataclasses import dataclass, replace
from typing import Literal

from .automaton import CompileLimits, Dfa, compile as compile_script
from .errors import (
    CellRangeError,
    ForbiddenCellError,
    ScriptValidationError,
    UnknownCellError,
)
from .notebook import Cell, CellRef, LogTrace, NotebookDoc, read_log_trace, write_log_trace
from .script import Node, code_cells, text_associations, validate_script

Color = Literal["green", "orange", "red", "white"]

GREEN: Color = "green"
ORANGE: Color = "orange"
RED: Color = "red"
WHITE: Color = "white"

COLOR_EMOJI: dict[Color, str] = {
    GREEN: "▶",   # runnable
    ORANGE: "✔",  # done
    RED: "⛔",     # locked
    WHITE: "✏",   # free
}

_COLOR_PRIORITY = {GREEN: 0, ORANGE: 1, RED: 2}

Classification = Literal["advance", "reexec-stay", "backtrack", "deviation", "white"]

ADVANCE: Classification = "advance"
REEXEC_STAY: Classification = "reexec-stay"
BACKTRACK: Classification = "backtrack"
DEVIATION: Classification = "deviation"
WHITE_EXEC: Classification = "white"


@dataclass(frozen=True)
class TracePair:
    """One valid transition: the executed cell and the state it led to."""

    cell: CellRef
    state: int


@dataclass(frozen=True)
class ExecOutcome:
    classification: Classification
    new_state: int
    complete: bool


@dataclass(frozen=True)
class SessionState:
    dfa: Dfa
    doc: NotebookDoc
    current: int
    user_trace: tuple[TracePair, ...]
    log_trace: LogTrace
    id_map: dict[str, CellRef]  # stable cell id -> scenario-time reference
    text_assoc: dict[CellRef, frozenset[CellRef]]

    @property
    def complete(self) -> bool:
        return self.current in self.dfa.accepting

    def scenario_ref(self, cell: Cell) -> CellRef | None:
        return self.id_map.get(cell.stable_id)

    def display_position(self, scenario: CellRef) -> int:
        """Current notebook position of a scenario cell."""
        for cell in self.doc.cells:
            if self.id_map.get(cell.stable_id) == scenario:
                return cell.position
        raise UnknownCellError(f"{scenario} is not bound to any cell")


def replay_step(
    dfa: Dfa, current: int, trace: tuple[TracePair, ...], symbol: CellRef
) -> tuple[Classification, int, tuple[TracePair, ...]]:
    """Apply one scenario-cell execution to (state, user trace).

    Priority: a defined transition advances; re-executing the most recent
    trace cell stays put; re-executing any earlier trace cell backtracks
    to its last occurrence, discarding everything after it; anything else
    is a deviation and changes nothing.
    """
    nxt = dfa.delta(current, symbol)
    if nxt is not None:
        return ADVANCE, nxt, trace + (TracePair(symbol, nxt),)
    if trace and trace[-1].cell == symbol:
        return REEXEC_STAY, current, trace
    for i in range(len(trace) - 1, -1, -1):
        if trace[i].cell == symbol:
            return BACKTRACK, trace[i].state, trace[: i + 1]
    return DEVIATION, current, trace


def start_session(
    doc: NotebookDoc, script: Node, limits: CompileLimits | None = None
) -> SessionState:
    """Open a session at the automaton start; resumes any stored log trace."""
    report = validate_script(script, doc)
    if not report.ok:
        raise ScriptValidationError(report)
    dfa = compile_script(script, limits)
    assoc = text_associations(script)
    scenario_refs = set(code_cells(script))
    for texts in assoc.values():
        scenario_refs.update(texts)
    id_map = {doc.cells[ref.index].stable_id: ref for ref in scenario_refs}
    return SessionState(
        dfa=dfa,
        doc=doc,
        current=dfa.start,
        user_trace=(),
        log_trace=read_log_trace(doc),
        id_map=id_map,
        text_assoc=assoc,
    )


def execute_cell(state: SessionState, cell: CellRef) -> tuple[SessionState, ExecOutcome]:
    """Record an execution of the code cell currently at ``cell.index``.

    Every execution is logged.  Executions of non-scenario cells carry a
    white marker and never move the automaton.
    """
    if cell.kind != "code":
        raise UnknownCellError(f"{cell} is not a code cell reference")
    try:
        target = state.doc.cell_at(cell.index)
    except CellRangeError as exc:
        raise UnknownCellError(str(exc)) from exc
    if target.kind != "code":
        raise UnknownCellError(f"cell at position {cell.index} is not a code cell")

    scenario = state.scenario_ref(target)
    if scenario is None:
        new_state = replace(state, log_trace=state.log_trace.append(cell, white=True))
        return new_state, ExecOutcome(WHITE_EXEC, state.current, state.complete)

    classification, current, trace = replay_step(
        state.dfa, state.current, state.user_trace, scenario
    )
    new_state = replace(
        state,
        current=current,
        user_trace=trace,
        log_trace=state.log_trace.append(scenario),
    )
    return new_state, ExecOutcome(classification, current, new_state.complete)


def colors(state: SessionState) -> dict[CellRef, Color]:
    """Color of every cell, keyed by its current position reference.

    Scenario code cells: green when the automaton can take them now,
    orange when they sit in the user trace, red otherwise.  A scenario
    text cell takes the strongest color among its associated code cells.
    Everything else is white.
    """
    executed = {pair.cell for pair in state.user_trace}

    def code_color(scenario: CellRef) -> Color:
        if state.dfa.delta(state.current, scenario) is not None:
            return GREEN
        if scenario in executed:
            return ORANGE
        return RED

    text_color: dict[CellRef, Color] = {}
    for code, texts in state.text_assoc.items():
        color = code_color(code)
        for text in texts:
            best = text_color.get(text)
            if best is None or _COLOR_PRIORITY[color] < _COLOR_PRIORITY[best]:
                text_color[text] = color

    result: dict[CellRef, Color] = {}
    for cell in state.doc.cells:
        scenario = state.scenario_ref(cell)
        if scenario is None:
            result[cell.ref] = WHITE
        elif scenario.kind == "code":
            result[cell.ref] = code_color(scenario)
        else:
            result[cell.ref] = text_color.get(scenario, RED)
    return result


def next_cells(state: SessionState) -> list[CellRef]:
    """Green code cells in notebook order; the UI's jump-button targets."""
    cell_colors = colors(state)
    return [
        cell.ref
        for cell in state.doc.cells
        if cell.kind == "code" and cell_colors[cell.ref] == GREEN
    ]


def step_back(state: SessionState) -> SessionState:
    """Drop the last user-trace pair and return to the state before it."""
    if not state.user_trace:
        return state
    trace = state.user_trace[:-1]
    current = trace[-1].state if trace else state.dfa.start
    return replace(state, user_trace=trace, current=current)


def reset(state: SessionState) -> SessionState:
    """Clear the user trace and return to the start; the log is kept."""
    return replace(state, user_trace=(), current=state.dfa.start)


def _renumbered(cells: tuple[Cell, ...]) -> tuple[Cell, ...]:
    return tuple(replace(c, position=i) for i, c in enumerate(cells))


def insert_cell(state: SessionState, position: int, kind: Literal["code", "text"]) -> SessionState:
    """Insert a fresh non-scenario cell; scenario bindings shift with their cells."""
    doc = state.doc
    if not 0 <= position <= len(doc):
        raise CellRangeError(
            f"insert position {position} out of range for {len(doc)}-cell notebook"
        )
    new_cell = Cell(stable_id=uuid.uuid4().hex[:12], position=position, kind=kind, source="")
    cells = _renumbered(doc.cells[:position] + (new_cell,) + doc.cells[position:])
    return replace(state, doc=replace(doc, cells=cells))


def delete_cell(state: SessionState, position: int) -> SessionState:
    """Remove a non-scenario cell; scenario cells cannot be deleted."""
    cell = state.doc.cell_at(position)
    if cell.stable_id in state.id_map:
        scenario = state.id_map[cell.stable_id]
        raise ForbiddenCellError(f"{scenario} belongs to the scenario and cannot be deleted")
    cells = _renumbered(state.doc.cells[:position] + state.doc.cells[position + 1 :])
    return replace(state, doc=replace(state.doc, cells=cells))


def snapshot_doc(state: SessionState) -> NotebookDoc:
    """The session's notebook with the current log trace stored in metadata."""
    return write_log_trace(state.doc, state.log_trace)
