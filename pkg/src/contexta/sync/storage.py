"""Per-tenant persistence with watermark-based incremental upload.

Every tenant gets a physically separate SQLite file under
``<data_root>/tenants/<userId>/store.db``. Uploads are transactional:
replayed batch ids ack idempotently, stale batches are rejected, and the
watermark (newest acknowledged record timestamp) only moves forward.
"""

from __future__ import annotations

import sqlite3
import threading
from dataclasses import dataclass, field
from pathlib import Path

from .. import canonical

__all__ = [
    "RECORD_TYPES",
    "SyncRecord",
    "SyncBatch",
    "UploadAck",
    "StaleBatch",
    "MalformedBatch",
    "TenantStore",
    "StorageRouter",
]

RECORD_TYPES = ("sensor", "trigger", "message", "feedback")


class StaleBatch(ValueError):
    """Nothing in the batch is newer than the watermark and the id is unknown."""


class MalformedBatch(ValueError):
    pass


@dataclass(slots=True)
class SyncRecord:
    record_type: str
    t: int
    data: dict

    def to_wire(self) -> dict:
        return {"type": self.record_type, "t": self.t, "data": self.data}

    @classmethod
    def from_wire(cls, obj: dict) -> "SyncRecord":
        try:
            record_type = obj["type"]
            t = obj["t"]
            data = obj["data"]
        except (KeyError, TypeError) as exc:
            raise MalformedBatch(f"record missing field: {exc}") from None
        if record_type not in RECORD_TYPES:
            raise MalformedBatch(f"unknown record type {record_type!r}")
        if not isinstance(t, int) or isinstance(t, bool) or t <= 0:
            raise MalformedBatch("record timestamp must be a positive integer")
        if not isinstance(data, dict):
            raise MalformedBatch("record data must be an object")
        return cls(record_type, t, data)


@dataclass
class SyncBatch:
    user_id: str
    batch_id: str
    records: list[SyncRecord]
    client_watermark: int = 0

    @classmethod
    def from_wire(cls, obj: dict) -> "SyncBatch":
        if not isinstance(obj, dict):
            raise MalformedBatch("batch must be an object")
        user_id = obj.get("userId")
        batch_id = obj.get("batchId")
        if not isinstance(user_id, str) or not user_id:
            raise MalformedBatch("batch missing userId")
        if not isinstance(batch_id, str) or not batch_id:
            raise MalformedBatch("batch missing batchId")
        raw_records = obj.get("records")
        if not isinstance(raw_records, list):
            raise MalformedBatch("batch missing records list")
        records = [SyncRecord.from_wire(r) for r in raw_records]
        for a, b in zip(records, records[1:]):
            if a.t > b.t:
                raise MalformedBatch("batch records must be sorted by timestamp")
        return cls(
            user_id=user_id,
            batch_id=batch_id,
            records=records,
            client_watermark=int(obj.get("clientWatermark", 0)),
        )


@dataclass(slots=True)
class UploadAck:
    server_watermark: int
    accepted: int
    duplicate: bool = False

    def to_wire(self) -> dict:
        return {
            "serverWatermark": self.server_watermark,
            "accepted": self.accepted,
            "duplicate": self.duplicate,
        }


class TenantStore:
    """One tenant's isolated record store; single writer, snapshot reads."""

    def __init__(self, root: Path, user_id: str):
        self.user_id = user_id
        self.directory = root / "tenants" / user_id
        self.directory.mkdir(parents=True, exist_ok=True)
        self._db_path = str(self.directory / "store.db")
        self._write_lock = threading.Lock()
        with self._connect() as conn:
            conn.execute(
                "CREATE TABLE IF NOT EXISTS records ("
                " id INTEGER PRIMARY KEY AUTOINCREMENT,"
                " record_type TEXT NOT NULL,"
                " t INTEGER NOT NULL,"
                " data TEXT NOT NULL)"
            )
            conn.execute(
                "CREATE INDEX IF NOT EXISTS idx_records_type_t ON records (record_type, t, id)"
            )
            conn.execute(
                "CREATE TABLE IF NOT EXISTS batches ("
                " batch_id TEXT PRIMARY KEY,"
                " accepted INTEGER NOT NULL,"
                " server_watermark INTEGER NOT NULL)"
            )
            conn.execute(
                "CREATE TABLE IF NOT EXISTS watermark ("
                " k INTEGER PRIMARY KEY CHECK (k = 0),"
                " t INTEGER NOT NULL,"
                " last_batch_id TEXT)"
            )
            conn.execute(
                "INSERT OR IGNORE INTO watermark (k, t, last_batch_id) VALUES (0, 0, NULL)"
            )
            conn.execute(
                "CREATE TABLE IF NOT EXISTS messages ("
                " message_id TEXT PRIMARY KEY,"
                " t INTEGER NOT NULL)"
            )
            conn.execute(
                "CREATE TABLE IF NOT EXISTS feedback ("
                " message_id TEXT NOT NULL,"
                " user_id TEXT NOT NULL,"
                " emoji TEXT NOT NULL,"
                " t INTEGER NOT NULL,"
                " PRIMARY KEY (message_id, user_id))"
            )

    def _connect(self) -> sqlite3.Connection:
        conn = sqlite3.connect(self._db_path, check_same_thread=False)
        conn.execute("PRAGMA journal_mode=WAL")
        conn.execute("PRAGMA synchronous=NORMAL")
        return conn

    def watermark(self) -> int:
        with self._connect() as conn:
            row = conn.execute("SELECT t FROM watermark WHERE k = 0").fetchone()
        return row[0] if row else 0

    def upload(self, batch: SyncBatch) -> UploadAck:
        """Persist a batch atomically; re-sent batch ids ack without effect."""
        with self._write_lock:
            conn = self._connect()
            try:
                conn.execute("BEGIN IMMEDIATE")
                seen = conn.execute(
                    "SELECT accepted, server_watermark FROM batches WHERE batch_id = ?",
                    (batch.batch_id,),
                ).fetchone()
                if seen is not None:
                    current = conn.execute("SELECT t FROM watermark WHERE k = 0").fetchone()[0]
                    conn.execute("COMMIT")
                    return UploadAck(server_watermark=current, accepted=seen[0], duplicate=True)
                watermark = conn.execute("SELECT t FROM watermark WHERE k = 0").fetchone()[0]
                fresh = [r for r in batch.records if r.t > watermark]
                if not fresh:
                    conn.execute("ROLLBACK")
                    raise StaleBatch(
                        f"batch {batch.batch_id!r}: no records newer than watermark {watermark}"
                    )
                conn.executemany(
                    "INSERT INTO records (record_type, t, data) VALUES (?,?,?)",
                    [(r.record_type, r.t, canonical.dumps(r.data)) for r in fresh],
                )
                new_watermark = max(watermark, max(r.t for r in fresh))
                conn.execute(
                    "UPDATE watermark SET t = ?, last_batch_id = ? WHERE k = 0",
                    (new_watermark, batch.batch_id),
                )
                conn.execute(
                    "INSERT INTO batches (batch_id, accepted, server_watermark) VALUES (?,?,?)",
                    (batch.batch_id, len(fresh), new_watermark),
                )
                conn.execute("COMMIT")
                return UploadAck(server_watermark=new_watermark, accepted=len(fresh))
            except BaseException:
                try:
                    conn.execute("ROLLBACK")
                except sqlite3.OperationalError:
                    pass
                raise
            finally:
                conn.close()

    def query(
        self,
        record_type: str,
        since: int = 0,
        limit: int = 500,
        cursor: str | None = None,
    ) -> tuple[list[dict], str | None]:
        """Records strictly newer than *since*, timestamp order, paginated.

        The cursor is ``"t:rowid"`` of the last returned row, so ties on
        timestamp never skip or duplicate records.
        """
        if record_type not in RECORD_TYPES:
            raise MalformedBatch(f"unknown record type {record_type!r}")
        limit = max(1, min(int(limit), 5000))
        # plain `since` is strict (t > since); the id tie-break only applies
        # when resuming from a cursor, so timestamp ties are never skipped
        after_t, after_id = since, 1 << 62
        if cursor:
            try:
                t_str, id_str = cursor.split(":")
                after_t, after_id = int(t_str), int(id_str)
            except ValueError:
                raise MalformedBatch(f"bad cursor {cursor!r}") from None
        with self._connect() as conn:
            rows = conn.execute(
                "SELECT id, t, data FROM records"
                " WHERE record_type = ? AND (t > ? OR (t = ? AND id > ?))"
                " ORDER BY t, id LIMIT ?",
                (record_type, after_t, after_t, after_id, limit),
            ).fetchall()
        records = [
            {"type": record_type, "t": t, "data": canonical.loads(data)} for _, t, data in rows
        ]
        next_cursor = f"{rows[-1][1]}:{rows[-1][0]}" if len(rows) == limit else None
        return records, next_cursor

    def count(self, record_type: str | None = None) -> int:
        with self._connect() as conn:
            if record_type is None:
                return conn.execute("SELECT COUNT(*) FROM records").fetchone()[0]
            return conn.execute(
                "SELECT COUNT(*) FROM records WHERE record_type = ?", (record_type,)
            ).fetchone()[0]

    def snapshot(self) -> list[tuple[str, int, str]]:
        """Full ordered content dump, for store-equality assertions."""
        with self._connect() as conn:
            return conn.execute(
                "SELECT record_type, t, data FROM records ORDER BY id"
            ).fetchall()

    # -- message index and feedback (latest-wins per message and user) -----

    def index_message(self, message_id: str, t: int) -> None:
        with self._write_lock, self._connect() as conn:
            conn.execute(
                "INSERT OR IGNORE INTO messages (message_id, t) VALUES (?,?)",
                (message_id, t),
            )

    def message_exists(self, message_id: str) -> bool:
        with self._connect() as conn:
            row = conn.execute(
                "SELECT 1 FROM messages WHERE message_id = ?", (message_id,)
            ).fetchone()
        return row is not None

    def put_feedback(self, message_id: str, user_id: str, emoji: str, t: int) -> dict:
        """Upsert the live reaction and journal the submission."""
        data = {"messageId": message_id, "emoji": emoji, "userId": user_id, "t": t}
        with self._write_lock, self._connect() as conn:
            conn.execute(
                "INSERT INTO feedback (message_id, user_id, emoji, t) VALUES (?,?,?,?)"
                " ON CONFLICT (message_id, user_id) DO UPDATE SET emoji=excluded.emoji, t=excluded.t",
                (message_id, user_id, emoji, t),
            )
            conn.execute(
                "INSERT INTO records (record_type, t, data) VALUES (?,?,?)",
                ("feedback", t, canonical.dumps(data)),
            )
        return data

    def current_feedback(self) -> list[dict]:
        with self._connect() as conn:
            rows = conn.execute(
                "SELECT message_id, user_id, emoji, t FROM feedback ORDER BY t, message_id"
            ).fetchall()
        return [
            {
                "type": "feedback",
                "t": t,
                "data": {"messageId": mid, "emoji": emoji, "userId": uid, "t": t},
            }
            for mid, uid, emoji, t in rows
        ]


class StorageRouter:
    """Lazily opens one isolated store per tenant under the data root."""

    def __init__(self, data_root: str | Path):
        self.data_root = Path(data_root)
        self._stores: dict[str, TenantStore] = {}
        self._lock = threading.Lock()

    def store_for(self, user_id: str) -> TenantStore:
        with self._lock:
            store = self._stores.get(user_id)
            if store is None:
                store = TenantStore(self.data_root, user_id)
                self._stores[user_id] = store
            return store
