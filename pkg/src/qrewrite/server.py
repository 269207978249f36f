"""JSON session service for interactive derivations.

Every algebraic operation lives in the engine; this layer only manages
sessions and serializes results.  Moves are applied by index into the
most recently served moves list together with that list's version token,
so a stale client gets a 409 instead of silently rewriting at a shifted
position.  Requests within one session are serialized by a per-session
lock; the engine's registries are immutable and shared.

Error payloads mirror the engine's exception types:

    {"error": "SortError", "message": "...", "span": [s, e] | null}
"""

from __future__ import annotations

import os
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, PlainTextResponse
from pydantic import BaseModel

from .errors import (
    NoMatch, ParseError, QRewriteError, SortError, StepLimitExceeded,
)
from .rules import default_registry
from .session import SessionState
from .strategy import NormalizeConfig
from .syntax import (
    parse_term, render_canonical, render_derivation, render_dirac_annotated,
)
from .terms import format_position, sort_of


class CreateSessionBody(BaseModel):
    term: str


class ApplyBody(BaseModel):
    index: int
    version: Optional[int] = None


@dataclass
class SessionRecord:
    session_id: str
    state: SessionState
    created_at: float
    last_touched: float
    lock: threading.Lock = field(default_factory=threading.Lock)


def _error_payload(exc: QRewriteError) -> dict:
    span = getattr(exc, "span", None)
    payload = {
        "error": type(exc).__name__,
        "message": str(exc),
        "span": list(span) if span else None,
    }
    if isinstance(exc, NoMatch):
        payload["rule"] = exc.rule_id
        payload["position"] = format_position(exc.position)
    return payload


def _http_error(status: int, exc: QRewriteError) -> JSONResponse:
    return JSONResponse(status_code=status, content=_error_payload(exc))


def _state_payload(state: SessionState, session_id: str) -> dict:
    dirac, spans = render_dirac_annotated(state.current)
    return {
        "sessionId": session_id,
        "sort": str(sort_of(state.current)),
        "dirac": dirac,
        "spans": spans,
        "canonical": render_canonical(state.current),
        "stepCount": len(state.steps),
        "movesVersion": state.moves_version,
    }


def create_app(idle_timeout: float = 3600.0,
               ui_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="qrewrite sessions", version="1")
    registry = default_registry()
    sessions: dict[str, SessionRecord] = {}
    table_lock = threading.Lock()

    def purge(now: float) -> None:
        with table_lock:
            dead = [sid for sid, rec in sessions.items()
                    if now - rec.last_touched > idle_timeout]
            for sid in dead:
                del sessions[sid]

    def get_record(session_id: str) -> SessionRecord | None:
        now = time.monotonic()
        purge(now)
        with table_lock:
            rec = sessions.get(session_id)
            if rec is not None:
                rec.last_touched = now
            return rec

    @app.exception_handler(QRewriteError)
    async def engine_error(_req: Request, exc: QRewriteError):
        status = 400
        if isinstance(exc, NoMatch):
            status = 422
        elif isinstance(exc, StepLimitExceeded):
            status = 409
        return _http_error(status, exc)

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSessionBody):
        try:
            term = parse_term(body.term)
        except (ParseError, SortError) as e:
            return _http_error(400, e)
        sid = uuid.uuid4().hex
        now = time.monotonic()
        rec = SessionRecord(sid, SessionState(term, registry), now, now)
        with table_lock:
            sessions[sid] = rec
        return _state_payload(rec.state, sid)

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        rec = get_record(session_id)
        if rec is None:
            return JSONResponse(status_code=404,
                                content={"error": "UnknownSession"})
        with rec.lock:
            return _state_payload(rec.state, session_id)

    @app.get("/sessions/{session_id}/moves")
    def get_moves(session_id: str):
        rec = get_record(session_id)
        if rec is None:
            return JSONResponse(status_code=404,
                                content={"error": "UnknownSession"})
        with rec.lock:
            from .rules import apply_rule
            moves = []
            for i, step in enumerate(rec.state.moves()):
                preview = apply_rule(rec.state.current, step, registry)
                moves.append({
                    "index": i,
                    "ruleId": step.rule_id,
                    "direction": step.direction,
                    "position": format_position(step.position),
                    "preview": render_dirac_annotated(preview)[0],
                })
            return {"version": rec.state.moves_version, "moves": moves}

    @app.post("/sessions/{session_id}/apply")
    def apply_move(session_id: str, body: ApplyBody):
        rec = get_record(session_id)
        if rec is None:
            return JSONResponse(status_code=404,
                                content={"error": "UnknownSession"})
        with rec.lock:
            state = rec.state
            if body.version is not None and body.version != state.moves_version:
                return JSONResponse(status_code=409, content={
                    "error": "StaleMoves",
                    "message": "the moves list has changed; fetch it again",
                    "version": state.moves_version,
                })
            if not 0 <= body.index < len(state.moves()):
                return JSONResponse(status_code=409, content={
                    "error": "StaleMoves",
                    "message": f"move index {body.index} out of range",
                    "version": state.moves_version,
                })
            try:
                state.apply_index(body.index)
            except NoMatch as e:
                return _http_error(422, e)
            return _state_payload(state, session_id)

    @app.post("/sessions/{session_id}/undo")
    def undo(session_id: str):
        rec = get_record(session_id)
        if rec is None:
            return JSONResponse(status_code=404,
                                content={"error": "UnknownSession"})
        with rec.lock:
            if not rec.state.undo():
                return JSONResponse(status_code=409, content={
                    "error": "NothingToUndo",
                    "message": "the session is at its initial term",
                })
            return _state_payload(rec.state, session_id)

    @app.post("/sessions/{session_id}/normalize")
    def normalize_session(session_id: str):
        rec = get_record(session_id)
        if rec is None:
            return JSONResponse(status_code=404,
                                content={"error": "UnknownSession"})
        with rec.lock:
            try:
                applied = rec.state.run_normalize()
            except StepLimitExceeded as e:
                return _http_error(409, e)
            payload = _state_payload(rec.state, session_id)
            payload["appliedSteps"] = applied
            return payload

    @app.get("/sessions/{session_id}/derivation",
             response_class=PlainTextResponse)
    def derivation(session_id: str):
        rec = get_record(session_id)
        if rec is None:
            return PlainTextResponse(status_code=404,
                                     content="unknown session")
        with rec.lock:
            return render_derivation(rec.state.derivation_document())

    ui = ui_dir or os.environ.get("QREWRITE_UI_DIR") or _default_ui_dir()
    if ui and Path(ui).is_dir():
        from fastapi.staticfiles import StaticFiles
        app.mount("/ui", StaticFiles(directory=ui, html=True), name="ui")

    return app


def _default_ui_dir() -> str | None:
    here = Path(__file__).resolve()
    for base in here.parents:
        candidate = base / "frontend" / "dist"
        if candidate.is_dir():
            return str(candidate)
    return None
