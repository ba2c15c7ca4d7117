"""Offline conformance: replay recorded traces and score them.

A log trace is first simplified (runs of the same cell collapse to one
execution), then replayed through the scenario automaton with the live
session semantics.  Fitness is the ratio of compliant executions;
completeness counts how many distinct scenario cells were ever run.
"""

from __future__ import annotations

import csv
import io
import statistics
from dataclasses import dataclass
from typing import Iterable, Sequence

from .automaton import CompileLimits, Dfa, compile as compile_script
from .errors import TraceFormatError, UndefinedMetricError
from .notebook import CellRef, LogTrace, NotebookDoc, read_log_trace
from .script import Node, code_cells, validate_script
from .session import ADVANCE, DEVIATION, GREEN, ORANGE, RED, Color, replay_step

TraceClass = Color  # green | orange | red


@dataclass(frozen=True)
class AnnotatedTrace:
    """A replayed trace with one class per counted execution."""

    entries: tuple[tuple[CellRef, TraceClass], ...]

    @property
    def g(self) -> int:
        return sum(1 for _, c in self.entries if c == GREEN)

    @property
    def o(self) -> int:
        return sum(1 for _, c in self.entries if c == ORANGE)

    @property
    def r(self) -> int:
        return sum(1 for _, c in self.entries if c == RED)


@dataclass(frozen=True)
class Metrics:
    fitness: float
    completeness: int


def simplify_trace(log: LogTrace) -> LogTrace:
    """Collapse each maximal run of the same cell into its first execution."""
    entries = []
    for entry in log:
        if entries and entries[-1].cell == entry.cell and entries[-1].white == entry.white:
            continue
        entries.append(entry)
    return LogTrace(tuple(entries))


def classify_replay(log: LogTrace, dfa: Dfa) -> AnnotatedTrace:
    """Replay a simplified log trace from a fresh state and classify it.

    Advances are green; re-executions and backtracking are orange;
    deviations (including cells outside the automaton alphabet) are red.
    White-marked entries are skipped entirely.
    """
    current = dfa.start
    trace = ()
    entries: list[tuple[CellRef, TraceClass]] = []
    for entry in log:
        if entry.white:
            continue
        classification, current, trace = replay_step(dfa, current, trace, entry.cell)
        if classification == ADVANCE:
            entries.append((entry.cell, GREEN))
        elif classification == DEVIATION:
            entries.append((entry.cell, RED))
        else:
            entries.append((entry.cell, ORANGE))
    return AnnotatedTrace(tuple(entries))


def fitness(annotated: AnnotatedTrace) -> float:
    """Compliant executions over all executions: (g + o) / (g + o + r)."""
    total = len(annotated.entries)
    if total == 0:
        raise UndefinedMetricError("fitness is undefined for an empty trace")
    return (annotated.g + annotated.o) / total


def completeness(log: LogTrace, scenario_cells: Iterable[CellRef]) -> int:
    """Distinct scenario code cells executed at least once."""
    scenario = set(scenario_cells)
    return len({e.cell for e in log if not e.white and e.cell in scenario})


@dataclass(frozen=True)
class CohortRow:
    id: str
    g: int | None = None
    o: int | None = None
    r: int | None = None
    fitness: float | None = None
    completeness: int | None = None
    error: str | None = None


@dataclass(frozen=True)
class CohortReport:
    rows: tuple[CohortRow, ...]


def cohort_report(
    notebooks: Sequence[tuple[str, NotebookDoc]],
    script: Node,
    limits: CompileLimits | None = None,
) -> CohortReport:
    """Per-notebook conformance rows, ordered by identifier.

    Notebooks whose structure does not validate against the script (or
    whose stored trace is malformed) become error rows rather than
    aborting the whole report.
    """
    dfa = compile_script(script, limits)
    scenario = code_cells(script)
    rows = []
    for name, doc in notebooks:
        report = validate_script(script, doc)
        if not report.ok:
            rows.append(CohortRow(id=name, error=report.errors()[0].message))
            continue
        try:
            log = read_log_trace(doc)
        except TraceFormatError as exc:
            rows.append(CohortRow(id=name, error=str(exc)))
            continue
        annotated = classify_replay(simplify_trace(log), dfa)
        fit = fitness(annotated) if annotated.entries else None
        rows.append(
            CohortRow(
                id=name,
                g=annotated.g,
                o=annotated.o,
                r=annotated.r,
                fitness=fit,
                completeness=completeness(log, scenario),
            )
        )
    rows.sort(key=lambda row: row.id)
    return CohortReport(tuple(rows))


CSV_HEADER = ("id", "g", "o", "r", "fitness", "completeness")


def _fmt(value, is_fitness: bool = False) -> str:
    if value is None:
        return "NA"
    if is_fitness:
        return f"{value:.6f}"
    if isinstance(value, float):
        return str(int(value)) if value.is_integer() else f"{value:.1f}"
    return str(value)


def render_csv(report: CohortReport, stamp: str | None = None) -> str:
    """The cohort table as CSV with summary rows (min/median/max) appended."""
    out = io.StringIO()
    if stamp is not None:
        out.write(f"# {stamp}\n")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in report.rows:
        writer.writerow(
            [
                row.id,
                _fmt(row.g),
                _fmt(row.o),
                _fmt(row.r),
                _fmt(row.fitness, is_fitness=True),
                _fmt(row.completeness),
            ]
        )

    valid = [r for r in report.rows if r.error is None]
    if valid:
        def stat(values, fn):
            values = [v for v in values if v is not None]
            return fn(values) if values else None

        for label, fn in (("min", min), ("median", statistics.median), ("max", max)):
            writer.writerow(
                [
                    label,
                    _fmt(stat([r.g for r in valid], fn)),
                    _fmt(stat([r.o for r in valid], fn)),
                    _fmt(stat([r.r for r in valid], fn)),
                    _fmt(stat([r.fitness for r in valid], fn), is_fitness=True),
                    _fmt(stat([r.completeness for r in valid], fn)),
                ]
            )
    return out.getvalue()
