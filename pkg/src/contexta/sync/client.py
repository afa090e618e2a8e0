"""HTTP client for the sync service: auth, batched upload, stream, control."""

from __future__ import annotations

import threading
import time
import uuid
from typing import Callable, Iterator

import httpx

from .. import canonical
from .storage import SyncRecord

__all__ = ["SyncClient", "SyncClientError", "UploadBuffer"]


class SyncClientError(RuntimeError):
    def __init__(self, message: str, status_code: int | None = None):
        super().__init__(message)
        self.status_code = status_code


class SyncClient:
    def __init__(self, base_url: str, token: str | None = None, timeout_s: float = 10.0):
        self.base_url = base_url.rstrip("/")
        self.token = token
        self._http = httpx.Client(base_url=self.base_url, timeout=timeout_s)

    # -- auth ---------------------------------------------------------------

    def register(self, user_id: str, secret: str) -> None:
        resp = self._http.post("/api/v1/auth/register", json={"userId": user_id, "secret": secret})
        if resp.status_code not in (201, 409):
            raise SyncClientError(f"register failed: {resp.text}", resp.status_code)

    def login(self, user_id: str, secret: str) -> str:
        resp = self._http.post("/api/v1/auth/login", json={"userId": user_id, "secret": secret})
        if resp.status_code != 200:
            raise SyncClientError(f"login failed: {resp.text}", resp.status_code)
        self.token = resp.json()["token"]
        return self.token

    def _headers(self) -> dict[str, str]:
        if not self.token:
            raise SyncClientError("no token; login first")
        return {"Authorization": f"Bearer {self.token}"}

    # -- data ---------------------------------------------------------------

    def upload(self, user_id: str, records: list[SyncRecord], batch_id: str | None = None) -> dict:
        records = sorted(records, key=lambda r: r.t)
        body = {
            "userId": user_id,
            "batchId": batch_id or uuid.uuid4().hex,
            "clientWatermark": records[-1].t if records else 0,
            "records": [r.to_wire() for r in records],
        }
        resp = self._http.post("/api/v1/sync/upload", json=body, headers=self._headers())
        if resp.status_code != 200:
            raise SyncClientError(f"upload failed ({resp.status_code}): {resp.text}", resp.status_code)
        return resp.json()

    def query(self, record_type: str, since: int = 0, limit: int = 500) -> Iterator[dict]:
        cursor: str | None = None
        while True:
            params: dict = {"since": since, "limit": limit}
            if cursor:
                params["cursor"] = cursor
            resp = self._http.get(
                f"/api/v1/records/{record_type}", params=params, headers=self._headers()
            )
            if resp.status_code != 200:
                raise SyncClientError(f"query failed: {resp.text}", resp.status_code)
            page = resp.json()
            yield from page["records"]
            cursor = page.get("nextCursor")
            if not cursor:
                return

    def post_feedback(self, message_id: str, emoji: str) -> dict:
        resp = self._http.post(
            "/api/v1/feedback",
            json={"messageId": message_id, "emoji": emoji},
            headers=self._headers(),
        )
        if resp.status_code != 200:
            raise SyncClientError(f"feedback failed: {resp.text}", resp.status_code)
        return resp.json()

    # -- replay control -------------------------------------------------------

    def replay_register(self) -> None:
        self._http.post("/api/v1/replay/register", headers=self._headers())

    def replay_unregister(self) -> None:
        self._http.post("/api/v1/replay/unregister", headers=self._headers())

    def poll_replay_commands(self) -> list[dict]:
        resp = self._http.get("/api/v1/replay/control/pending", headers=self._headers())
        if resp.status_code != 200:
            return []
        return resp.json().get("commands", [])

    def close(self) -> None:
        self._http.close()


class UploadBuffer:
    """Accumulates records during a live replay and flushes periodically.

    Flush happens every ``interval_s`` of wall time and always at the end of
    the run; each flush is one idempotent batch.
    """

    def __init__(
        self,
        client: SyncClient,
        user_id: str,
        interval_s: float = 60.0,
        clock: Callable[[], float] = time.monotonic,
    ):
        self.client = client
        self.user_id = user_id
        self.interval_s = interval_s
        self.clock = clock
        self._records: list[SyncRecord] = []
        self._last_flush = clock()
        self._lock = threading.Lock()
        self.batches_sent = 0

    def add(self, record: SyncRecord) -> None:
        with self._lock:
            self._records.append(record)
        if self.clock() - self._last_flush >= self.interval_s:
            self.flush()

    def flush(self) -> dict | None:
        with self._lock:
            records, self._records = self._records, []
            self._last_flush = self.clock()
        if not records:
            return None
        ack = self.client.upload(self.user_id, records)
        self.batches_sent += 1
        return ack
