"""Session-oriented HTTP facade over the engine.

Each session owns a net (hierarchies are flattened at load), a live
marking, and a bounded undo stack. Sessions live in memory and expire
after an idle period. Errors travel as {"error": code, "detail": text,
"path": optional} with conventional status codes: 400 bad input, 404
unknown session, 409 rejected action, 422 unsupported analysis.
"""

from __future__ import annotations

import threading
import time
import uuid
from dataclasses import dataclass, field
from typing import Callable, Optional

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .errors import (
    CpnError,
    LimitZero,
    NotEnabled,
    NothingToUndo,
    SchemaError,
    TimedNetUnsupported,
    ValidationFailed,
)
from .expr import FunctionDef
from .interchange import export_json, import_json, render_dot
from .net import (
    Binding,
    FiringRecord,
    Marking,
    Net,
    Token,
    enabled_transitions,
    find_bindings,
    fire_transition,
    advance_global_clock,
)
from .statespace import DEFAULT_MAX_EDGES, DEFAULT_MAX_STATES, summarize
from .values import value_from_json, value_to_json, values_equal

UNDO_DEPTH = 100
IDLE_SECONDS = 3600.0


@dataclass
class _Session:
    id: str
    net: Net
    functions: dict[str, FunctionDef]
    marking: Marking
    initial: Marking
    created: float
    last_access: float
    undo: list[Marking] = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)

    def push_undo(self, depth: int) -> None:
        self.undo.append(self.marking.copy())
        if len(self.undo) > depth:
            del self.undo[0]


def _token_json(tok: Token) -> dict:
    return {"value": value_to_json(tok.value), "timestamp": tok.timestamp}


def _marking_json(marking: Marking) -> dict:
    return {
        place: [_token_json(t) for t in marking.tokens(place)]
        for place in marking.place_names()
    }


def _env_json(env: dict) -> dict:
    return {var: value_to_json(value) for var, value in env.items()}


def _record_json(record: FiringRecord) -> dict:
    return {
        "transition": record.transition,
        "binding": _env_json(record.env),
        "consumed": [
            {"place": place, **_token_json(tok)} for place, tok in record.consumed
        ],
        "produced": [
            {"place": place, **_token_json(tok)} for place, tok in record.produced
        ],
        "clock": record.clock,
    }


_STATUS_BY_TYPE: tuple[tuple[type, int], ...] = (
    (NotEnabled, 409),
    (NothingToUndo, 409),
    (TimedNetUnsupported, 422),
    (LimitZero, 400),
    (SchemaError, 400),
    (ValidationFailed, 400),
)


def _error_response(exc: CpnError) -> JSONResponse:
    status = 400
    for cls, code in _STATUS_BY_TYPE:
        if isinstance(exc, cls):
            status = code
            break
    payload = {"error": exc.code, "detail": str(exc)}
    path = getattr(exc, "path", "")
    if path:
        payload["path"] = path
    return JSONResponse(payload, status_code=status)


def create_app(
    undo_depth: int = UNDO_DEPTH,
    idle_seconds: float = IDLE_SECONDS,
    time_fn: Callable[[], float] = time.monotonic,
) -> FastAPI:
    app = FastAPI(title="cpnet service")
    sessions: dict[str, _Session] = {}
    registry_lock = threading.Lock()

    def purge(now: float) -> None:
        stale = [
            sid for sid, s in sessions.items() if now - s.last_access > idle_seconds
        ]
        for sid in stale:
            del sessions[sid]

    def get_session(session_id: str) -> Optional[_Session]:
        now = time_fn()
        with registry_lock:
            purge(now)
            session = sessions.get(session_id)
            if session is not None:
                session.last_access = now
            return session

    def not_found() -> JSONResponse:
        return JSONResponse(
            {"error": "UnknownSession", "detail": "no such session"}, status_code=404
        )

    @app.exception_handler(CpnError)
    async def handle_cpn_error(request: Request, exc: CpnError) -> JSONResponse:
        return _error_response(exc)

    @app.post("/sessions", status_code=201)
    async def create_session(request: Request):
        try:
            document = await request.json()
        except ValueError:
            return _error_response(SchemaError("request body is not valid JSON"))
        try:
            loaded, marking, functions = import_json(document)
        except CpnError as e:
            return _error_response(e)
        net = loaded if isinstance(loaded, Net) else marking.net
        now = time_fn()
        session = _Session(
            id=uuid.uuid4().hex,
            net=net,
            functions=functions,
            marking=marking,
            initial=marking.copy(),
            created=now,
            last_access=now,
        )
        with registry_lock:
            purge(now)
            sessions[session.id] = session
        return {"sessionId": session.id}

    @app.get("/sessions/{session_id}/state")
    async def get_state(session_id: str):
        session = get_session(session_id)
        if session is None:
            return not_found()
        with session.lock:
            return {
                "marking": _marking_json(session.marking),
                "globalClock": session.marking.global_clock,
                "dot": render_dot(session.net, session.marking),
            }

    @app.get("/sessions/{session_id}/enabled")
    async def get_enabled(session_id: str):
        session = get_session(session_id)
        if session is None:
            return not_found()
        with session.lock:
            return [
                {
                    "transition": t.name,
                    "bindings": [_env_json(b.env) for b in bindings],
                }
                for t, bindings in enabled_transitions(session.net, session.marking)
            ]

    @app.post("/sessions/{session_id}/fire")
    async def fire(session_id: str, request: Request):
        session = get_session(session_id)
        if session is None:
            return not_found()
        try:
            body = await request.json()
        except ValueError:
            return _error_response(SchemaError("request body is not valid JSON"))
        if not isinstance(body, dict) or not isinstance(body.get("transition"), str):
            return _error_response(SchemaError("missing string 'transition'", "transition"))
        name = body["transition"]
        transition = session.net.transition_index.get(name)
        if transition is None:
            return _error_response(SchemaError(f"unknown transition {name!r}", "transition"))
        requested = body.get("binding")
        if requested is not None:
            if not isinstance(requested, dict):
                return _error_response(SchemaError("binding must be an object", "binding"))
            unknown = set(requested) - set(transition.variables)
            if unknown:
                return _error_response(
                    SchemaError(
                        f"not variables of {name!r}: {sorted(unknown)}", "binding"
                    )
                )
            try:
                wanted = {v: value_from_json(raw) for v, raw in requested.items()}
            except ValueError as e:
                return _error_response(SchemaError(str(e), "binding"))
        with session.lock:
            binding: Optional[Binding] = None
            if requested is not None:
                for candidate in find_bindings(session.net, transition, session.marking):
                    if all(values_equal(candidate.env[v], w) for v, w in wanted.items()):
                        binding = candidate
                        break
                if binding is None:
                    return _error_response(
                        NotEnabled(f"{name!r} has no enabled binding matching the request")
                    )
            session.push_undo(undo_depth)
            try:
                record = fire_transition(session.net, transition, session.marking, binding)
            except CpnError as e:
                session.marking = session.undo.pop()
                return _error_response(e)
            return {
                "firingRecord": _record_json(record),
                "marking": _marking_json(session.marking),
            }

    @app.post("/sessions/{session_id}/advance")
    async def advance(session_id: str):
        session = get_session(session_id)
        if session is None:
            return not_found()
        with session.lock:
            session.push_undo(undo_depth)
            clock = advance_global_clock(session.net, session.marking)
            return {"globalClock": clock}

    @app.post("/sessions/{session_id}/undo")
    async def undo(session_id: str):
        session = get_session(session_id)
        if session is None:
            return not_found()
        with session.lock:
            if not session.undo:
                return _error_response(NothingToUndo("undo stack is empty"))
            session.marking = session.undo.pop()
            return {"marking": _marking_json(session.marking)}

    @app.post("/sessions/{session_id}/reset")
    async def reset(session_id: str):
        session = get_session(session_id)
        if session is None:
            return not_found()
        with session.lock:
            session.push_undo(undo_depth)
            session.marking = session.initial.copy()
            return {"marking": _marking_json(session.marking)}

    @app.get("/sessions/{session_id}/analysis")
    async def analysis(
        session_id: str,
        maxStates: int = DEFAULT_MAX_STATES,
        maxEdges: int = DEFAULT_MAX_EDGES,
        stripTime: bool = False,
    ):
        session = get_session(session_id)
        if session is None:
            return not_found()
        with session.lock:
            report = summarize(
                session.net,
                session.marking,
                max_states=maxStates,
                max_edges=maxEdges,
                strip_time_mode=stripTime,
            )
            return report.to_json()

    @app.get("/sessions/{session_id}/export")
    async def export(session_id: str):
        session = get_session(session_id)
        if session is None:
            return not_found()
        with session.lock:
            return export_json(session.net, session.marking, session.functions)

    return app


app = create_app()
