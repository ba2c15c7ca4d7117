from __future__ import annotations

import random

import pytest

from moon import (
    CellRef,
    ForbiddenCellError,
    CellRangeError,
    LogTrace,
    ScriptValidationError,
    UnknownCellError,
    accepts,
    colors,
    delete_cell,
    execute_cell,
    insert_cell,
    next_cells,
    parse_notebook,
    parse_script,
    read_log_trace,
    reset,
    snapshot_doc,
    start_session,
    step_back,
    write_log_trace,
)
from moon.script import code_cells
from moon.session import ADVANCE, BACKTRACK, DEVIATION, REEXEC_STAY, WHITE_EXEC

from .conftest import nb_json
from .helpers import random_script, refs


def ref(label):
    return CellRef.parse(label)


def run(state, *labels):
    outcome = None
    for label in labels:
        state, outcome = execute_cell(state, ref(label))
    return state, outcome


@pytest.fixture
def part_session(guide_doc, part_script):
    return start_session(guide_doc, part_script)


@pytest.fixture
def twice_session():
    # Script executing C0 twice: code cells at positions 0, 2, 4.
    doc = parse_notebook(nb_json(["code", "text", "code", "text", "code"]))
    return start_session(doc, parse_script("(C0 C2 C0 C4)"))


class TestStartSession:
    def test_fresh_session_frontier(self, guide_doc, walkthrough_script):
        state = start_session(guide_doc, walkthrough_script)
        assert state.current == 0
        assert state.user_trace == ()
        assert colors(state)[ref("C1")] == "green"
        assert next_cells(state) == [ref("C1")]

    def test_invalid_script_rejected(self, guide_doc):
        with pytest.raises(ScriptValidationError):
            start_session(guide_doc, parse_script("C99"))

    def test_stored_log_trace_resumes(self, guide_doc, part_script):
        stored = LogTrace.of(refs("C7", "C12"))
        doc = write_log_trace(guide_doc, stored)
        state = start_session(doc, part_script)
        assert state.log_trace == stored
        assert state.current == 0  # the log is history, not replayed position

    def test_text_associations_unioned(self, guide_doc):
        script = parse_script("(C1~T0 C3 C1~T2)")
        state = start_session(guide_doc, script)
        assert state.text_assoc[ref("C1")] == {ref("T0"), ref("T2")}


class TestExecute:
    def test_advance(self, part_session):
        state, outcome = run(part_session, "C7")
        assert outcome.classification == ADVANCE
        assert state.current == 1
        assert [(str(p.cell), p.state) for p in state.user_trace] == [("C7", 1)]

    def test_backtrack_truncates_after_last_occurrence(self, part_session):
        state, _ = run(part_session, "C7", "C12", "C14")
        assert [(str(p.cell), p.state) for p in state.user_trace] == [
            ("C7", 1), ("C12", 3), ("C14", 4),
        ]
        state, outcome = run(state, "C12")
        assert outcome.classification == BACKTRACK
        assert state.current == 3
        assert [(str(p.cell), p.state) for p in state.user_trace] == [("C7", 1), ("C12", 3)]
        assert colors(state)[ref("C14")] == "green"

    def test_backtrack_targets_last_occurrence(self, twice_session):
        state, _ = run(twice_session, "C0", "C2", "C0", "C4")
        assert [(str(p.cell), p.state) for p in state.user_trace] == [
            ("C0", 1), ("C2", 2), ("C0", 3), ("C4", 4),
        ]
        state, outcome = run(state, "C0")
        assert outcome.classification == BACKTRACK
        assert state.current == 3
        assert colors(state)[ref("C4")] == "green"

    def test_deviation_is_inert(self, part_session):
        state, _ = run(part_session, "C7")
        before_colors = colors(state)
        before_trace = state.user_trace
        state, outcome = run(state, "C18")
        assert outcome.classification == DEVIATION
        assert state.current == 1
        assert state.user_trace == before_trace
        assert colors(state) == before_colors
        assert len(state.log_trace) == 2

    def test_reexec_stay(self, part_session):
        state, _ = run(part_session, "C7")
        state, outcome = run(state, "C7")
        assert outcome.classification == REEXEC_STAY
        assert state.current == 1
        assert len(state.user_trace) == 1
        assert len(state.log_trace) == 2

    def test_advance_beats_backtrack(self, guide_doc, walkthrough_script):
        # C3 is both previously executed and the next expected cell; the
        # scenario requires advancing through the second round.
        state = start_session(guide_doc, walkthrough_script)
        state, outcome = run(state, "C1", "C3", "C5", "C7", "C3")
        assert outcome.classification == ADVANCE
        assert len(state.user_trace) == 5

    def test_unknown_cell(self, part_session):
        with pytest.raises(UnknownCellError):
            execute_cell(part_session, ref("C99"))
        with pytest.raises(UnknownCellError):
            execute_cell(part_session, ref("C0"))  # position 0 is markdown
        with pytest.raises(UnknownCellError):
            execute_cell(part_session, ref("T1"))

    def test_white_cell_execution(self, part_session):
        state = insert_cell(part_session, 0, "code")
        state, outcome = execute_cell(state, ref("C0"))
        assert outcome.classification == WHITE_EXEC
        assert state.current == part_session.current
        assert state.user_trace == ()
        assert len(state.log_trace) == 1
        assert state.log_trace.entries[0].white

    def test_log_records_everything(self, part_session):
        state, _ = run(part_session, "C7", "C18", "C7", "C12", "C12")
        assert [str(e.cell) for e in state.log_trace] == ["C7", "C18", "C7", "C12", "C12"]
        assert [e.ts for e in state.log_trace] == [0, 1, 2, 3, 4]


class TestColors:
    def test_walkthrough_coloring(self, guide_doc, walkthrough_script):
        state = start_session(guide_doc, walkthrough_script)
        state, _ = run(state, "C1", "C3", "C5", "C7", "C3", "C5", "C7")
        cmap = {str(k): v for k, v in colors(state).items()}
        assert {k for k, v in cmap.items() if v == "orange" and k.startswith("C")} == {
            "C1", "C3", "C5", "C7",
        }
        assert {k for k, v in cmap.items() if v == "green" and k.startswith("C")} == {
            "C10", "C12", "C16",
        }
        assert {k for k, v in cmap.items() if v == "red" and k.startswith("C")} == {
            "C14", "C18",
        }
        assert cmap["T9"] == cmap["T11"] == cmap["T15"] == "green"
        assert next_cells(state) == [ref("C10"), ref("C12"), ref("C16")]

    def test_optional_skipped_turns_red(self, guide_doc, walkthrough_script):
        state = start_session(guide_doc, walkthrough_script)
        state, _ = run(state, "C1", "C3", "C5", "C7", "C3", "C5", "C7", "C12")
        assert colors(state)[ref("C10")] == "red"
        assert colors(state)[ref("C14")] == "green"
        assert colors(state)[ref("C16")] == "red"

    def test_non_scenario_cells_white(self, guide_doc, part_script):
        state = start_session(guide_doc, part_script)
        cmap = colors(state)
        assert cmap[ref("C1")] == "white"  # code cell outside this script
        assert cmap[ref("T0")] == "white"

    def test_text_cell_takes_strongest_color(self, guide_doc):
        script = parse_script("(C1~T0 C3~T0)")
        state = start_session(guide_doc, script)
        assert colors(state)[ref("T0")] == "green"  # C1 green beats C3 red
        state, _ = run(state, "C1", "C3")
        # C1 orange, C3 green? no: both executed; C3 has no outgoing, C1 none
        cmap = colors(state)
        assert cmap[ref("T0")] == "orange"

    def test_scenario_partition(self, guide_doc, walkthrough_script):
        state = start_session(guide_doc, walkthrough_script)
        rng = random.Random(7)
        code_labels = ["C1", "C3", "C5", "C7", "C10", "C12", "C14", "C16", "C18"]
        for _ in range(40):
            state, _ = run(state, rng.choice(code_labels))
            cmap = colors(state)
            for label in code_labels:
                assert cmap[ref(label)] in ("green", "orange", "red")
            greens = {r for r, c in cmap.items() if c == "green" and r.kind == "code"}
            assert greens == {
                r for r in map(ref, code_labels)
                if state.dfa.delta(state.current, r) is not None
            }


class TestStepBack:
    def test_pop_semantics(self, twice_session):
        state, _ = run(twice_session, "C0", "C2", "C0", "C4")
        state = step_back(state)
        assert state.current == 3
        state = step_back(state)
        assert state.current == 2
        state = step_back(state)
        assert state.current == 1
        state = step_back(state)
        assert state.current == 0
        assert state.user_trace == ()

    def test_empty_trace_noop(self, part_session):
        assert step_back(part_session) == part_session

    def test_single_pop_restores_frontier(self, part_session):
        state, _ = run(part_session, "C7")
        state = step_back(state)
        assert state.current == 0
        assert colors(state)[ref("C7")] == "green"

    def test_log_survives_back(self, part_session):
        state, _ = run(part_session, "C7", "C12")
        state = step_back(state)
        assert len(state.log_trace) == 2


class TestReset:
    def test_reset_clears_trace_keeps_log(self, part_session):
        state, _ = run(part_session, "C7", "C12", "C18")
        state = reset(state)
        assert state.current == 0
        assert state.user_trace == ()
        assert len(state.log_trace) == 3

    def test_idempotent_on_fresh_session(self, part_session):
        assert reset(part_session) == part_session


class TestInsertDelete:
    def test_insert_shifts_labels_not_roles(self, guide_doc, walkthrough_script):
        state = start_session(guide_doc, walkthrough_script)
        state, _ = run(state, "C1", "C3")
        state = insert_cell(state, 4, "code")
        cmap = colors(state)
        # former C5 now sits at position 6 and is the green frontier
        assert cmap[ref("C6")] == "green"
        assert cmap[ref("C4")] == "white"
        assert next_cells(state) == [ref("C6")]

    def test_insert_at_end_shifts_nothing(self, part_session):
        state = insert_cell(part_session, len(part_session.doc), "text")
        assert colors(state)[ref("C7")] == "green"
        assert len(state.doc) == 20

    def test_execute_shifted_cell_by_new_position(self, guide_doc, walkthrough_script):
        state = start_session(guide_doc, walkthrough_script)
        state = insert_cell(state, 0, "code")
        # scenario C1 is displayed as C2 now
        state, outcome = execute_cell(state, ref("C2"))
        assert outcome.classification == ADVANCE
        assert str(state.user_trace[0].cell) == "C1"  # scenario identity kept

    def test_insert_out_of_range(self, part_session):
        with pytest.raises(CellRangeError):
            insert_cell(part_session, len(part_session.doc) + 1, "code")

    def test_delete_white_cell(self, part_session):
        state = insert_cell(part_session, 3, "code")
        state = delete_cell(state, 3)
        assert len(state.doc) == len(part_session.doc)
        assert colors(state) == colors(part_session)

    def test_delete_scenario_cell_forbidden(self, guide_doc, walkthrough_script):
        state = start_session(guide_doc, walkthrough_script)
        with pytest.raises(ForbiddenCellError):
            delete_cell(state, 1)  # C1
        with pytest.raises(ForbiddenCellError):
            delete_cell(state, 0)  # T0 is associated, so part of the scenario

    def test_delete_out_of_range(self, part_session):
        with pytest.raises(CellRangeError):
            delete_cell(part_session, 99)

    def test_delete_shifts_later_bindings(self, guide_doc, part_script):
        state = start_session(guide_doc, part_script)
        state = delete_cell(state, 0)  # T0 is not in this script's scenario
        assert colors(state)[ref("C6")] == "green"  # former C7


class TestSnapshot:
    def test_snapshot_round_trips_log(self, part_session):
        state, _ = run(part_session, "C7", "C18")
        doc = snapshot_doc(state)
        assert read_log_trace(doc) == state.log_trace


class TestInvariants:
    def _random_states(self, seed, steps=30):
        rng = random.Random(seed)
        script = random_script(rng, max_depth=3, max_occurrences=8)
        scenario = code_cells(script)
        top = max(c.index for c in scenario) + 3
        kinds = ["code" if CellRef.code(i) in scenario else
                 ("code" if i == top - 1 else "text") for i in range(top)]
        doc = parse_notebook(nb_json(kinds))
        state = start_session(doc, script)
        code_positions = [c.position for c in doc.cells if c.kind == "code"]
        states = [state]
        for _ in range(steps):
            op = rng.random()
            if op < 0.7:
                state, _ = execute_cell(state, CellRef.code(rng.choice(code_positions)))
            elif op < 0.85:
                state = step_back(state)
            else:
                state = reset(state)
            states.append(state)
        return states

    def test_trace_state_coherence(self):
        for seed in range(25):
            for state in self._random_states(seed):
                prev = state.dfa.start
                for pair in state.user_trace:
                    assert state.dfa.delta(prev, pair.cell) == pair.state
                    prev = pair.state
                assert state.current == prev

    def test_log_monotone(self):
        for seed in range(10):
            states = self._random_states(seed)
            for a, b in zip(states, states[1:]):
                assert len(b.log_trace) >= len(a.log_trace)
                assert b.log_trace.entries[: len(a.log_trace)] == a.log_trace.entries

    def test_completion_matches_acceptance(self):
        for seed in range(25):
            for state in self._random_states(seed):
                symbols = tuple(p.cell for p in state.user_trace)
                assert state.complete == accepts(state.dfa, symbols)

    def test_backtrack_lands_on_visited_state(self):
        for seed in range(15):
            rng = random.Random(1000 + seed)
            script = random_script(rng, max_depth=3, max_occurrences=8)
            scenario = code_cells(script)
            top = max(c.index for c in scenario) + 1
            kinds = ["code" if CellRef.code(i) in scenario else "text"
                     for i in range(top)]
            state = start_session(parse_notebook(nb_json(kinds)), script)
            visited = {state.current}
            code_positions = [c.position for c in state.doc.cells if c.kind == "code"]
            for _ in range(40):
                state, outcome = execute_cell(
                    state, CellRef.code(rng.choice(code_positions))
                )
                if outcome.classification == BACKTRACK:
                    assert outcome.new_state in visited
                visited.add(state.current)
