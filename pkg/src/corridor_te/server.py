"""FastAPI wiring for the game service.

The primary channel is a WebSocket carrying JSON messages with a ``kind``
field (``create`` / ``act`` / ``report`` in, ``created`` / ``turn`` /
``report`` / ``error`` out); the server also pushes ``turn`` messages when
a deadline expires. Plain HTTP endpoints mirror the same payloads for
session creation (the spec'd fallback) and for scripted clients that poll
``tick`` instead of holding a socket.
"""

from __future__ import annotations

import asyncio
import contextlib
import time

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .service import SessionError, SessionStore

TICK_INTERVAL_S = 0.1


def now_ms() -> int:
    return int(time.time() * 1000)


def build_app(store: SessionStore, static_dir: str | None = None) -> FastAPI:
    @contextlib.asynccontextmanager
    async def lifespan(app: FastAPI):
        task = asyncio.create_task(ticker())
        yield
        task.cancel()
        with contextlib.suppress(asyncio.CancelledError):
            await task

    app = FastAPI(title="corridor-te game service", lifespan=lifespan)
    app.state.store = store
    app.state.sockets = {}  # session_id -> WebSocket for server pushes

    def error_response(exc: SessionError, status: int = 400) -> JSONResponse:
        code_status = {"not-found": 404, "conflict": 409, "timeout-already-applied": 409}
        return JSONResponse(
            status_code=code_status.get(exc.code, status),
            content={"kind": "error", "code": exc.code, "message": exc.message},
        )

    @app.get("/slots")
    def slots() -> dict:
        return {"slots": store.slot_names()}

    @app.post("/sessions")
    def create_session(body: dict) -> JSONResponse:
        try:
            payload = store.create(
                opponent_slot=body.get("opponent_slot", ""),
                now_ms=now_ms(),
                rounds=body.get("rounds"),
                seed=body.get("seed"),
                turn_timeout_ms=body.get("turn_timeout_ms"),
            )
        except SessionError as exc:
            return error_response(exc)
        return JSONResponse({"kind": "created", **payload})

    @app.post("/sessions/{session_id}/act")
    def act(session_id: str, body: dict) -> JSONResponse:
        try:
            payload = store.act(session_id, body.get("action", ""), now_ms(), body.get("turn"))
        except SessionError as exc:
            return error_response(exc)
        return JSONResponse({"kind": "turn", **payload})

    @app.post("/sessions/{session_id}/tick")
    def tick(session_id: str) -> JSONResponse:
        try:
            payload = store.tick(session_id, now_ms())
        except SessionError as exc:
            return error_response(exc)
        if payload is None:
            return JSONResponse({"kind": "pending"})
        return JSONResponse({"kind": "turn", **payload})

    @app.get("/sessions/{session_id}/report")
    def report(session_id: str) -> JSONResponse:
        try:
            payload = store.report(session_id)
        except SessionError as exc:
            return error_response(exc)
        return JSONResponse({"kind": "report", **payload})

    @app.get("/sessions/{session_id}")
    def state(session_id: str) -> JSONResponse:
        try:
            payload = store.state(session_id)
        except SessionError as exc:
            return error_response(exc)
        return JSONResponse({"kind": "state", **payload})

    @app.websocket("/ws")
    async def websocket_channel(ws: WebSocket) -> None:
        await ws.accept()
        attached: set[str] = set()
        try:
            while True:
                msg = await ws.receive_json()
                kind = msg.get("kind")
                try:
                    if kind == "create":
                        payload = store.create(
                            opponent_slot=msg.get("opponent_slot", ""),
                            now_ms=now_ms(),
                            rounds=msg.get("rounds"),
                            seed=msg.get("seed"),
                            turn_timeout_ms=msg.get("turn_timeout_ms"),
                        )
                        sid = payload["session_id"]
                        attached.add(sid)
                        app.state.sockets[sid] = ws
                        await ws.send_json({"kind": "created", **payload})
                    elif kind == "act":
                        sid = msg.get("session_id", "")
                        attached.add(sid)
                        app.state.sockets[sid] = ws
                        payload = store.act(sid, msg.get("action", ""), now_ms(), msg.get("turn"))
                        await ws.send_json({"kind": "turn", **payload})
                    elif kind == "report":
                        payload = store.report(msg.get("session_id", ""))
                        await ws.send_json({"kind": "report", **payload})
                    else:
                        await ws.send_json(
                            {"kind": "error", "code": "bad-request", "message": f"unknown kind {kind!r}"}
                        )
                except SessionError as exc:
                    await ws.send_json({"kind": "error", "code": exc.code, "message": exc.message})
        except WebSocketDisconnect:
            pass
        finally:
            for sid in attached:
                if app.state.sockets.get(sid) is ws:
                    app.state.sockets.pop(sid, None)

    async def ticker() -> None:
        while True:
            await asyncio.sleep(TICK_INTERVAL_S)
            for sid, payload in store.tick_all(now_ms()):
                ws = app.state.sockets.get(sid)
                if ws is not None:
                    with contextlib.suppress(Exception):
                        await ws.send_json({"kind": "turn", **payload})

    if static_dir is not None:
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="static")

    return app
