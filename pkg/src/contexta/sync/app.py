"""The multi-tenant sync HTTP service.

All endpoints live under ``/api/v1`` and require a bearer token except
registration, login, and the health probe. Tenant scoping comes from the
token subject: no read endpoint can even name another tenant, and uploads
for a different user id are refused outright.
"""

from __future__ import annotations

import threading
import time
from collections import deque
from pathlib import Path
from typing import Callable

from fastapi import Depends, FastAPI, Header, HTTPException, Query, Request
from fastapi.responses import JSONResponse, StreamingResponse
from pydantic import BaseModel

from .. import canonical
from ..dialogue.feedback import EMOJI_PALETTE
from .auth import (
    CredentialStore,
    DuplicateUser,
    ExpiredToken,
    InvalidCredentials,
    issue_token,
    load_or_create_key,
    verify_token,
)
from .storage import (
    MalformedBatch,
    RECORD_TYPES,
    StaleBatch,
    StorageRouter,
    SyncBatch,
)
from .streamhub import StreamHub

__all__ = ["create_app"]


class RegisterBody(BaseModel):
    userId: str
    secret: str


class LoginBody(BaseModel):
    userId: str
    secret: str


class FeedbackBody(BaseModel):
    messageId: str
    emoji: str


class ReplayControlBody(BaseModel):
    command: str
    value: float | None = None


class _ReplayChannel:
    def __init__(self) -> None:
        self.lock = threading.Lock()
        self.pending: deque[dict] = deque()
        self.active = False

    def push(self, command: dict) -> None:
        with self.lock:
            self.pending.append(command)

    def drain(self) -> list[dict]:
        with self.lock:
            out = list(self.pending)
            self.pending.clear()
            return out


def create_app(
    data_root: str | Path,
    jwt_key_file: str | Path | None = None,
    jwt_key: bytes | None = None,
    clock: Callable[[], float] = time.monotonic,
    now: Callable[[], float] = time.time,
    stream_retention_s: float = 600.0,
) -> FastAPI:
    """Build the service around a data root and signing key."""
    root = Path(data_root)
    root.mkdir(parents=True, exist_ok=True)
    if jwt_key is None:
        key_path = Path(jwt_key_file) if jwt_key_file else root / "jwt.key"
        jwt_key = load_or_create_key(key_path)

    app = FastAPI(title="contexta sync service", docs_url=None, redoc_url=None)
    creds = CredentialStore(root / "main.db")
    router = StorageRouter(root)
    hub = StreamHub(clock=clock, retention_s=stream_retention_s)
    replay_channels: dict[str, _ReplayChannel] = {}
    replay_lock = threading.Lock()

    app.state.storage = router
    app.state.hub = hub
    app.state.credentials = creds

    def channel_for(user_id: str) -> _ReplayChannel:
        with replay_lock:
            ch = replay_channels.get(user_id)
            if ch is None:
                ch = _ReplayChannel()
                replay_channels[user_id] = ch
            return ch

    def current_user(authorization: str | None = Header(default=None)) -> str:
        if not authorization or not authorization.startswith("Bearer "):
            raise HTTPException(status_code=401, detail="missing bearer token")
        token = authorization.removeprefix("Bearer ").strip()
        try:
            return verify_token(token, jwt_key, now_s=now())
        except ExpiredToken:
            raise HTTPException(status_code=401, detail="token expired") from None
        except InvalidCredentials as exc:
            raise HTTPException(status_code=401, detail=str(exc)) from None

    @app.get("/healthz")
    def healthz() -> dict:
        return {"status": "ok"}

    @app.post("/api/v1/auth/register", status_code=201)
    def register(body: RegisterBody) -> dict:
        try:
            creds.register(body.userId, body.secret)
        except DuplicateUser:
            raise HTTPException(status_code=409, detail="user id already registered") from None
        except InvalidCredentials as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from None
        router.store_for(body.userId)  # create the isolated namespace eagerly
        return {"userId": body.userId}

    @app.post("/api/v1/auth/login")
    def login(body: LoginBody) -> dict:
        if not creds.verify(body.userId, body.secret):
            raise HTTPException(status_code=401, detail="invalid credentials")
        return {"token": issue_token(body.userId, jwt_key, now_s=now())}

    @app.post("/api/v1/sync/upload")
    def upload(payload: dict, user_id: str = Depends(current_user)) -> dict:
        try:
            batch = SyncBatch.from_wire(payload)
        except MalformedBatch as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from None
        if batch.user_id != user_id:
            raise HTTPException(status_code=403, detail="token does not own this tenant")
        store = router.store_for(user_id)
        try:
            ack = store.upload(batch)
        except StaleBatch as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from None
        if not ack.duplicate:
            for record in batch.records:
                if record.record_type == "message":
                    mid = record.data.get("messageId")
                    if isinstance(mid, str):
                        store.index_message(mid, record.t)
                if record.record_type in ("trigger", "message"):
                    hub.publish(user_id, record.record_type, record.to_wire())
        return ack.to_wire()

    @app.get("/api/v1/records/{record_type}")
    def records(
        record_type: str,
        since: int = Query(default=0),
        limit: int = Query(default=500),
        cursor: str | None = Query(default=None),
        user_id: str = Depends(current_user),
    ) -> dict:
        if record_type not in RECORD_TYPES:
            raise HTTPException(status_code=404, detail=f"unknown record type {record_type!r}")
        store = router.store_for(user_id)
        if record_type == "feedback":
            items = store.current_feedback()
            return {"records": items, "nextCursor": None}
        try:
            items, next_cursor = store.query(record_type, since=since, limit=limit, cursor=cursor)
        except MalformedBatch as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from None
        return {"records": items, "nextCursor": next_cursor}

    @app.post("/api/v1/feedback")
    def feedback(body: FeedbackBody, user_id: str = Depends(current_user)) -> dict:
        if body.emoji not in EMOJI_PALETTE:
            raise HTTPException(status_code=422, detail="emoji not in the reaction palette")
        store = router.store_for(user_id)
        if not store.message_exists(body.messageId):
            raise HTTPException(status_code=404, detail="unknown messageId")
        t = int(now() * 1000)
        record = store.put_feedback(body.messageId, user_id, body.emoji, t)
        return record

    @app.get("/api/v1/stream")
    def stream(
        request: Request,
        lastEventId: int = Query(default=0),
        last_event_id_header: str | None = Header(default=None, alias="Last-Event-ID"),
        user_id: str = Depends(current_user),
    ) -> StreamingResponse:
        start_after = lastEventId
        if last_event_id_header:
            try:
                start_after = max(start_after, int(last_event_id_header))
            except ValueError:
                pass

        def event_stream():
            cursor = start_after
            while True:
                fresh = hub.poll(user_id, cursor, wait_s=0.5)
                if not fresh:
                    # keepalive comment so idle clients can detect liveness
                    yield ": keepalive\n\n"
                    continue
                for event in fresh:
                    cursor = max(cursor, event.event_id)
                    payload = canonical.dumps(event.data)
                    yield f"id: {event.event_id}\nevent: {event.kind}\ndata: {payload}\n\n"

        return StreamingResponse(
            event_stream(),
            media_type="text/event-stream",
            headers={"Cache-Control": "no-cache", "X-Accel-Buffering": "no"},
        )

    @app.post("/api/v1/replay/control", status_code=202)
    def replay_control(body: ReplayControlBody, user_id: str = Depends(current_user)) -> dict:
        if body.command not in ("pause", "resume", "seek", "speed", "stop"):
            raise HTTPException(status_code=422, detail=f"unknown command {body.command!r}")
        ch = channel_for(user_id)
        if not ch.active:
            raise HTTPException(status_code=409, detail="no active replay")
        ch.push({"command": body.command, "value": body.value})
        return {"queued": body.command}

    @app.get("/api/v1/replay/control/pending")
    def replay_pending(user_id: str = Depends(current_user)) -> dict:
        return {"commands": channel_for(user_id).drain()}

    @app.post("/api/v1/replay/register")
    def replay_register(user_id: str = Depends(current_user)) -> dict:
        channel_for(user_id).active = True
        return {"active": True}

    @app.post("/api/v1/replay/unregister")
    def replay_unregister(user_id: str = Depends(current_user)) -> dict:
        ch = channel_for(user_id)
        ch.active = False
        ch.drain()
        return {"active": False}

    @app.get("/api/v1/replay/status")
    def replay_status(user_id: str = Depends(current_user)) -> dict:
        return {"active": channel_for(user_id).active}

    @app.exception_handler(Exception)
    async def unhandled(request: Request, exc: Exception):  # pragma: no cover - safety net
        return JSONResponse(status_code=500, content={"detail": f"{type(exc).__name__}: {exc}"})

    return app
