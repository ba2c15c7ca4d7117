"""Scripted execution scenarios for notebooks.

Authors describe the intended cell execution order in a small pattern
language; the script compiles to a minimal DFA that drives a live
green/orange/red guidance session and scores recorded execution traces
for conformance (fitness, completeness).
"""

from .analytics import (
    AnnotatedTrace,
    CohortReport,
    CohortRow,
    Metrics,
    classify_replay,
    cohort_report,
    completeness,
    fitness,
    render_csv,
    simplify_trace,
)
from .automaton import (
    CompileLimits,
    Dfa,
    accepts,
    compile,
    decorate_reexec_loops,
    enumerate_language,
    expand_any,
    export_dot,
)
from .errors import (
    AnyOrderBlowupError,
    CellRangeError,
    ForbiddenCellError,
    MoonError,
    NotebookParseError,
    NotebookVersionError,
    ScriptSyntaxError,
    ScriptValidationError,
    StateLimitError,
    TraceFormatError,
    UndefinedMetricError,
    UnknownCellError,
)
from .notebook import (
    Cell,
    CellRef,
    LogEntry,
    LogTrace,
    NotebookDoc,
    cell_label,
    dumps_notebook,
    parse_notebook,
    read_log_trace,
    write_log_trace,
)
from .script import (
    Alt,
    Any,
    CellNode,
    Issue,
    Node,
    Opt,
    ScriptAst,
    Seq,
    ValidationReport,
    code_cells,
    parse_script,
    render,
    text_associations,
    validate_script,
)
from .session import (
    COLOR_EMOJI,
    ExecOutcome,
    SessionState,
    TracePair,
    colors,
    delete_cell,
    execute_cell,
    insert_cell,
    next_cells,
    replay_step,
    reset,
    snapshot_doc,
    start_session,
    step_back,
)

__version__ = "0.1.0"
