"""Session service: the live engine behind the browser UI.

Request/response endpoints plus a per-session server-sent event stream so
every open view of a session converges on the same state.  All state is
in memory; actions on one session are serialized, and every applied
action produces a new monotonically numbered view.

Endpoints (see docs/protocol.md for payload schemas):

    POST /sessions                  create a session
    GET  /sessions/{id}             current view
    POST /sessions/{id}/actions     execute / back / reset / insert / delete
    GET  /sessions/{id}/trace       log trace and user trace
    GET  /sessions/{id}/events      SSE stream of views (?replay_from=N)
    GET  /defaults                  notebook/script preloaded at startup
"""

from __future__ import annotations

import asyncio
import json
import secrets
from collections import deque
from dataclasses import dataclass, field

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, StreamingResponse

from . import session as live
from .automaton import CompileLimits
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
    UnknownCellError,
)
from .notebook import CellRef, NotebookDoc, dumps_notebook, parse_notebook
from .script import parse_script

HISTORY_WINDOW = 512


@dataclass
class _Entry:
    state: live.SessionState
    version: int = 0
    last_executed: str | None = None  # stable id of the last executed cell
    lock: asyncio.Lock = field(default_factory=asyncio.Lock)
    subscribers: list[asyncio.Queue] = field(default_factory=list)
    history: deque = field(default_factory=lambda: deque(maxlen=HISTORY_WINDOW))


def _error(status: int, code: str, message: str, **extra) -> JSONResponse:
    return JSONResponse(
        status_code=status, content={"error": {"code": code, "message": message, **extra}}
    )


def _engine_error(exc: MoonError) -> JSONResponse:
    if isinstance(exc, ScriptSyntaxError):
        return _error(400, "invalid_script", exc.reason, span=list(exc.span))
    if isinstance(exc, ScriptValidationError):
        issues = [
            {"severity": i.severity, "message": i.message, "ref": str(i.ref) if i.ref else None}
            for i in exc.report.issues
        ]
        return _error(400, "validation_failed", str(exc), issues=issues)
    if isinstance(exc, (NotebookParseError, NotebookVersionError, TraceFormatError)):
        return _error(400, "invalid_notebook", str(exc))
    if isinstance(exc, (AnyOrderBlowupError, StateLimitError)):
        return _error(400, "compile_limit", str(exc))
    if isinstance(exc, ForbiddenCellError):
        return _error(403, "forbidden", str(exc))
    if isinstance(exc, (UnknownCellError, CellRangeError)):
        return _error(400, "unknown_cell", str(exc))
    return _error(400, "engine_error", str(exc))


def create_app(
    default_doc: NotebookDoc | None = None,
    default_script: str | None = None,
    limits: CompileLimits | None = None,
) -> FastAPI:
    app = FastAPI(title="moon session service")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    sessions: dict[str, _Entry] = {}

    def view_of(session_id: str, entry: _Entry) -> dict:
        state = entry.state
        cell_colors = live.colors(state)
        cells = []
        for cell in state.doc.cells:
            color = cell_colors[cell.ref]
            cells.append(
                {
                    "label": str(cell.ref),
                    "kind": cell.kind,
                    "source": cell.source,
                    "color": color,
                    "emoji": live.COLOR_EMOJI[color],
                    "is_last_executed": cell.stable_id == entry.last_executed,
                }
            )
        return {
            "session_id": session_id,
            "version": entry.version,
            "complete": state.complete,
            "cells": cells,
            "next_cells": [str(r) for r in live.next_cells(state)],
        }

    def publish(session_id: str, entry: _Entry) -> dict:
        """Bump the version, record the view, and push it to subscribers."""
        entry.version += 1
        view = view_of(session_id, entry)
        entry.history.append((entry.version, view))
        for queue in entry.subscribers:
            queue.put_nowait(view)
        return view

    @app.get("/defaults")
    async def defaults():
        doc = json.loads(dumps_notebook(default_doc)) if default_doc is not None else None
        return {"notebook": doc, "script": default_script}

    @app.post("/sessions")
    async def create_session(request: Request):
        try:
            body = await request.json()
        except json.JSONDecodeError:
            return _error(400, "bad_request", "request body must be JSON")
        if not isinstance(body, dict):
            return _error(400, "bad_request", "request body must be an object")

        raw_doc = body.get("notebook")
        script_text = body.get("script", default_script)
        try:
            if raw_doc is None:
                if default_doc is None:
                    return _error(400, "bad_request", "no notebook given and no default loaded")
                doc = default_doc
            elif isinstance(raw_doc, dict):
                doc = parse_notebook(json.dumps(raw_doc))
            elif isinstance(raw_doc, str):
                doc = parse_notebook(raw_doc)
            else:
                return _error(400, "bad_request", "notebook must be an object or string")
            if not isinstance(script_text, str):
                return _error(400, "bad_request", "script must be a string")
            state = live.start_session(doc, parse_script(script_text), limits)
        except MoonError as exc:
            return _engine_error(exc)

        session_id = secrets.token_urlsafe(32)
        entry = _Entry(state=state)
        sessions[session_id] = entry
        async with entry.lock:
            view = publish(session_id, entry)
        return {"session_id": session_id, "view": view}

    @app.get("/sessions/{session_id}")
    async def get_view(session_id: str):
        entry = sessions.get(session_id)
        if entry is None:
            return _error(404, "not_found", "no such session")
        return {"view": view_of(session_id, entry)}

    @app.post("/sessions/{session_id}/actions")
    async def post_action(session_id: str, request: Request):
        entry = sessions.get(session_id)
        if entry is None:
            return _error(404, "not_found", "no such session")
        try:
            body = await request.json()
        except json.JSONDecodeError:
            return _error(400, "bad_request", "request body must be JSON")
        if not isinstance(body, dict) or "action" not in body:
            return _error(400, "bad_request", "missing action field")
        action = body["action"]

        async with entry.lock:
            outcome = None
            try:
                if action == "execute":
                    label = body.get("cell")
                    if not isinstance(label, str):
                        return _error(400, "bad_request", "execute needs a cell label")
                    try:
                        ref = CellRef.parse(label)
                    except ValueError as exc:
                        return _error(400, "bad_request", str(exc))
                    state, result = live.execute_cell(entry.state, ref)
                    entry.state = state
                    entry.last_executed = state.doc.cells[ref.index].stable_id
                    outcome = {
                        "classification": result.classification,
                        "state": state.dfa.label(result.new_state),
                        "complete": result.complete,
                    }
                elif action == "back":
                    entry.state = live.step_back(entry.state)
                elif action == "reset":
                    entry.state = live.reset(entry.state)
                elif action == "insert":
                    position, kind = body.get("position"), body.get("kind")
                    if not isinstance(position, int) or kind not in ("code", "text"):
                        return _error(400, "bad_request", "insert needs position and kind")
                    entry.state = live.insert_cell(entry.state, position, kind)
                elif action == "delete":
                    position = body.get("position")
                    if not isinstance(position, int):
                        return _error(400, "bad_request", "delete needs a position")
                    entry.state = live.delete_cell(entry.state, position)
                else:
                    return _error(400, "bad_request", f"unknown action {action!r}")
            except MoonError as exc:
                return _engine_error(exc)
            view = publish(session_id, entry)
        return {"view": view, "outcome": outcome}

    @app.get("/sessions/{session_id}/trace")
    async def get_trace(session_id: str):
        entry = sessions.get(session_id)
        if entry is None:
            return _error(404, "not_found", "no such session")
        state = entry.state
        return {
            "log": [
                {"cell": str(e.cell), "ts": e.ts, "white": e.white} for e in state.log_trace
            ],
            "user": [
                {"cell": str(p.cell), "state": state.dfa.label(p.state)}
                for p in state.user_trace
            ],
        }

    @app.get("/sessions/{session_id}/events")
    async def events(session_id: str, replay_from: int = 0, limit: int | None = None):
        entry = sessions.get(session_id)
        if entry is None:
            return _error(404, "not_found", "no such session")

        queue: asyncio.Queue = asyncio.Queue()
        async with entry.lock:
            backlog = [view for version, view in entry.history if version > replay_from]
            entry.subscribers.append(queue)

        def render(view: dict) -> str:
            payload = json.dumps(view, ensure_ascii=False)
            return f"id: {view['version']}\nevent: view\ndata: {payload}\n\n"

        async def stream():
            sent = 0
            try:
                for view in backlog:
                    yield render(view)
                    sent += 1
                    if limit is not None and sent >= limit:
                        return
                while limit is None or sent < limit:
                    yield render(await queue.get())
                    sent += 1
            finally:
                entry.subscribers.remove(queue)

        return StreamingResponse(
            stream(),
            media_type="text/event-stream",
            headers={"Cache-Control": "no-cache", "X-Accel-Buffering": "no"},
        )

    return app
