"""Service contracts: auth, tenant isolation, idempotent upload, stream resume."""

from __future__ import annotations

import threading
import time

import pytest
from fastapi.testclient import TestClient

from contexta.sync import create_app, verify_token
from contexta.sync.storage import StaleBatch, SyncBatch, SyncRecord, TenantStore

KEY = b"0123456789abcdef0123456789abcdef"


@pytest.fixture()
def service(tmp_path):
    app = create_app(tmp_path / "data", jwt_key=KEY)
    client = TestClient(app, raise_server_exceptions=True)
    return client, tmp_path / "data"


def register_and_login(client: TestClient, user_id: str, secret: str = "hunter2") -> str:
    assert client.post("/api/v1/auth/register", json={"userId": user_id, "secret": secret}).status_code == 201
    resp = client.post("/api/v1/auth/login", json={"userId": user_id, "secret": secret})
    assert resp.status_code == 200
    return resp.json()["token"]


def auth(token: str) -> dict:
    return {"Authorization": f"Bearer {token}"}


def batch_body(user_id: str, batch_id: str, records: list[tuple[str, int, dict]]) -> dict:
    return {
        "userId": user_id,
        "batchId": batch_id,
        "clientWatermark": max((t for _, t, _ in records), default=0),
        "records": [{"type": rt, "t": t, "data": data} for rt, t, data in records],
    }


def trigger_records(n: int, start_t: int = 1_000_000) -> list[tuple[str, int, dict]]:
    return [
        ("trigger", start_t + i * 1000, {"scenarioId": "walking", "firedAt": start_t + i * 1000})
        for i in range(n)
    ]


class TestAuth:
    def test_register_then_login_token_carries_subject(self, service):
        client, _ = service
        token = register_and_login(client, "alice")
        assert verify_token(token, KEY) == "alice"

    def test_wrong_secret_is_401(self, service):
        client, _ = service
        register_and_login(client, "alice")
        resp = client.post("/api/v1/auth/login", json={"userId": "alice", "secret": "nope"})
        assert resp.status_code == 401

    def test_duplicate_registration_is_409(self, service):
        client, _ = service
        register_and_login(client, "alice")
        resp = client.post("/api/v1/auth/register", json={"userId": "alice", "secret": "x"})
        assert resp.status_code == 409

    def test_missing_and_garbage_tokens_are_401(self, service):
        client, _ = service
        assert client.get("/api/v1/records/trigger").status_code == 401
        assert client.get("/api/v1/records/trigger", headers=auth("junk.token.here")).status_code == 401

    def test_expired_token_is_401(self, service):
        client, _ = service
        register_and_login(client, "alice")
        from contexta.sync import issue_token

        stale = issue_token("alice", KEY, now_s=time.time() - 25 * 3600)
        resp = client.get("/api/v1/records/trigger", headers=auth(stale))
        assert resp.status_code == 401

    def test_healthz_needs_no_auth(self, service):
        client, _ = service
        resp = client.get("/healthz")
        assert resp.status_code == 200
        assert resp.json() == {"status": "ok"}


class TestUpload:
    def test_fresh_batch_advances_watermark_and_counts(self, service):
        client, _ = service
        token = register_and_login(client, "alice")
        records = trigger_records(100)
        resp = client.post("/api/v1/sync/upload", headers=auth(token),
                           json=batch_body("alice", "b-1", records))
        assert resp.status_code == 200
        ack = resp.json()
        assert ack["serverWatermark"] == records[-1][1]
        assert ack["accepted"] == 100
        page = client.get("/api/v1/records/trigger", params={"limit": 1000},
                          headers=auth(token)).json()
        assert len(page["records"]) == 100

    def test_replayed_batch_is_idempotent(self, service, tmp_path):
        client, data_root = service
        token = register_and_login(client, "alice")
        body = batch_body("alice", "b-1", trigger_records(50))
        first = client.post("/api/v1/sync/upload", headers=auth(token), json=body).json()
        store = TenantStore(data_root, "alice")
        before = store.snapshot()
        second = client.post("/api/v1/sync/upload", headers=auth(token), json=body).json()
        assert second["serverWatermark"] == first["serverWatermark"]
        assert second["duplicate"] is True
        assert store.snapshot() == before

    def test_empty_batch_rejected_as_stale(self, service):
        client, _ = service
        token = register_and_login(client, "alice")
        resp = client.post("/api/v1/sync/upload", headers=auth(token),
                           json=batch_body("alice", "b-empty", []))
        assert resp.status_code == 409

    def test_fully_stale_batch_rejected(self, service):
        client, _ = service
        token = register_and_login(client, "alice")
        client.post("/api/v1/sync/upload", headers=auth(token),
                    json=batch_body("alice", "b-1", trigger_records(10)))
        resp = client.post("/api/v1/sync/upload", headers=auth(token),
                           json=batch_body("alice", "b-2", trigger_records(5)))
        assert resp.status_code == 409

    def test_unsorted_batch_rejected(self, service):
        client, _ = service
        token = register_and_login(client, "alice")
        records = [("trigger", 2000, {}), ("trigger", 1000, {})]
        resp = client.post("/api/v1/sync/upload", headers=auth(token),
                           json=batch_body("alice", "b-x", records))
        assert resp.status_code == 422

    def test_unknown_record_type_rejected(self, service):
        client, _ = service
        token = register_and_login(client, "alice")
        resp = client.post("/api/v1/sync/upload", headers=auth(token),
                           json=batch_body("alice", "b-y", [("selfie", 1000, {})]))
        assert resp.status_code == 422

    def test_partially_fresh_batch_keeps_only_new_records(self, service):
        client, _ = service
        token = register_and_login(client, "alice")
        client.post("/api/v1/sync/upload", headers=auth(token),
                    json=batch_body("alice", "b-1", trigger_records(10)))  # t ..1009000
        mixed = trigger_records(20)  # t 1000000..1019000, half stale
        resp = client.post("/api/v1/sync/upload", headers=auth(token),
                           json=batch_body("alice", "b-2", mixed))
        assert resp.status_code == 200
        assert resp.json()["accepted"] == 10


class TestIsolation:
    def test_upload_for_other_user_is_403(self, service):
        client, _ = service
        token_a = register_and_login(client, "alice")
        register_and_login(client, "bob")
        resp = client.post("/api/v1/sync/upload", headers=auth(token_a),
                           json=batch_body("bob", "b-1", trigger_records(3)))
        assert resp.status_code == 403

    def test_queries_are_token_scoped(self, service):
        client, _ = service
        token_a = register_and_login(client, "alice")
        token_b = register_and_login(client, "bob")
        client.post("/api/v1/sync/upload", headers=auth(token_b),
                    json=batch_body("bob", "b-1", trigger_records(7)))
        page = client.get("/api/v1/records/trigger", headers=auth(token_a)).json()
        assert page["records"] == []

    def test_feedback_cannot_reach_other_tenants_messages(self, service):
        client, _ = service
        token_a = register_and_login(client, "alice")
        token_b = register_and_login(client, "bob")
        message = [("message", 2_000_000, {"messageId": "msg-bob-1", "segments": ["hi"]})]
        client.post("/api/v1/sync/upload", headers=auth(token_b),
                    json=batch_body("bob", "b-1", message))
        resp = client.post("/api/v1/feedback", headers=auth(token_a),
                           json={"messageId": "msg-bob-1", "emoji": "👍"})
        assert resp.status_code == 404  # invisible across the tenant boundary

    def test_tenants_live_in_separate_store_files(self, service):
        client, data_root = service
        token_a = register_and_login(client, "alice")
        token_b = register_and_login(client, "bob")
        client.post("/api/v1/sync/upload", headers=auth(token_a),
                    json=batch_body("alice", "b-1", trigger_records(2)))
        client.post("/api/v1/sync/upload", headers=auth(token_b),
                    json=batch_body("bob", "b-1", trigger_records(2)))
        assert (data_root / "tenants" / "alice" / "store.db").exists()
        assert (data_root / "tenants" / "bob" / "store.db").exists()
        assert (data_root / "main.db").exists()
        a_files = set(p.name for p in (data_root / "tenants" / "alice").iterdir())
        assert "store.db" in a_files


class TestQueryPagination:
    def test_since_watermark_is_empty(self, service):
        client, _ = service
        token = register_and_login(client, "alice")
        records = trigger_records(20)
        ack = client.post("/api/v1/sync/upload", headers=auth(token),
                          json=batch_body("alice", "b-1", records)).json()
        page = client.get("/api/v1/records/trigger",
                          params={"since": ack["serverWatermark"]},
                          headers=auth(token)).json()
        assert page["records"] == []

    def test_paging_unions_to_exact_store_contents(self, service):
        client, _ = service
        token = register_and_login(client, "alice")
        # duplicate timestamps on purpose: the cursor must not skip ties
        records = [("trigger", 1_000_000 + (i // 3) * 1000, {"n": i}) for i in range(60)]
        client.post("/api/v1/sync/upload", headers=auth(token),
                    json=batch_body("alice", "b-1", records))
        seen = []
        cursor = None
        while True:
            params = {"limit": 7}
            if cursor:
                params["cursor"] = cursor
            page = client.get("/api/v1/records/trigger", params=params,
                              headers=auth(token)).json()
            seen.extend(page["records"])
            cursor = page["nextCursor"]
            if not cursor:
                break
        assert [r["data"]["n"] for r in seen] == list(range(60))

    def test_unknown_record_type_404(self, service):
        client, _ = service
        token = register_and_login(client, "alice")
        assert client.get("/api/v1/records/selfies", headers=auth(token)).status_code == 404


class TestFeedbackEndpoint:
    def _seed_message(self, client, token, user_id, message_id="msg-1"):
        message = [("message", 3_000_000, {"messageId": message_id, "segments": ["hello"]})]
        resp = client.post("/api/v1/sync/upload", headers=auth(token),
                           json=batch_body(user_id, "b-m", message))
        assert resp.status_code == 200

    def test_round_trip_and_latest_wins(self, service):
        client, _ = service
        token = register_and_login(client, "alice")
        self._seed_message(client, token, "alice")
        assert client.post("/api/v1/feedback", headers=auth(token),
                           json={"messageId": "msg-1", "emoji": "❤️"}).status_code == 200
        page = client.get("/api/v1/records/feedback", headers=auth(token)).json()
        assert len(page["records"]) == 1
        assert page["records"][0]["data"]["emoji"] == "❤️"
        client.post("/api/v1/feedback", headers=auth(token),
                    json={"messageId": "msg-1", "emoji": "👍"})
        page = client.get("/api/v1/records/feedback", headers=auth(token)).json()
        assert len(page["records"]) == 1
        assert page["records"][0]["data"]["emoji"] == "👍"

    def test_unknown_message_404(self, service):
        client, _ = service
        token = register_and_login(client, "alice")
        resp = client.post("/api/v1/feedback", headers=auth(token),
                           json={"messageId": "ghost", "emoji": "👍"})
        assert resp.status_code == 404

    def test_emoji_outside_palette_422(self, service):
        client, _ = service
        token = register_and_login(client, "alice")
        self._seed_message(client, token, "alice")
        resp = client.post("/api/v1/feedback", headers=auth(token),
                           json={"messageId": "msg-1", "emoji": "🤖"})
        assert resp.status_code == 422


def read_sse_events(base_url, token, n, last_event_id=None, timeout_s=5.0):
    """Read up to n events from a live stream, stopping after timeout_s."""
    import httpx

    headers = auth(token)
    if last_event_id is not None:
        headers["Last-Event-ID"] = str(last_event_id)
    got = []
    deadline = time.monotonic() + timeout_s
    try:
        with httpx.Client(base_url=base_url, timeout=2.0) as http:
            with http.stream("GET", "/api/v1/stream", headers=headers) as resp:
                assert resp.status_code == 200
                current: dict = {}
                for line in resp.iter_lines():
                    if time.monotonic() > deadline:
                        break
                    if line.startswith("id: "):
                        current["id"] = int(line[4:])
                    elif line.startswith("event: "):
                        current["event"] = line[7:]
                    elif line.startswith("data: "):
                        current["data"] = line[6:]
                    elif line == "" and current:
                        got.append(current)
                        current = {}
                        if len(got) >= n:
                            break
    except httpx.TimeoutException:
        pass
    return got


@pytest.fixture()
def live_service(tmp_path):
    from server_util import LiveServer

    app = create_app(tmp_path / "data", jwt_key=KEY)
    client = TestClient(app)
    with LiveServer(app) as server:
        yield client, server.base_url


class TestLiveStream:
    def test_five_triggers_arrive_in_order(self, live_service):
        client, base_url = live_service
        token = register_and_login(client, "alice")
        client.post("/api/v1/sync/upload", headers=auth(token),
                    json=batch_body("alice", "b-1", trigger_records(5)))
        events = read_sse_events(base_url, token, 5)
        assert [e["id"] for e in events] == [1, 2, 3, 4, 5]
        assert all(e["event"] == "trigger" for e in events)

    def test_reconnect_with_last_event_id_replays_missed(self, live_service):
        client, base_url = live_service
        token = register_and_login(client, "alice")
        client.post("/api/v1/sync/upload", headers=auth(token),
                    json=batch_body("alice", "b-1", trigger_records(3)))
        first = read_sse_events(base_url, token, 3)
        assert [e["id"] for e in first] == [1, 2, 3]
        # two more arrive while disconnected
        client.post("/api/v1/sync/upload", headers=auth(token),
                    json=batch_body("alice", "b-2", trigger_records(2, start_t=2_000_000)))
        resumed = read_sse_events(base_url, token, 2, last_event_id=3)
        assert [e["id"] for e in resumed] == [4, 5]

    def test_live_push_reaches_open_stream(self, live_service):
        client, base_url = live_service
        token = register_and_login(client, "alice")
        collected: list = []
        done = threading.Event()

        def reader():
            collected.extend(read_sse_events(base_url, token, 2, timeout_s=6.0))
            done.set()

        thread = threading.Thread(target=reader, daemon=True)
        thread.start()
        time.sleep(0.4)  # stream is open and idle before the upload happens
        client.post("/api/v1/sync/upload", headers=auth(token),
                    json=batch_body("alice", "b-1", trigger_records(2)))
        assert done.wait(8)
        assert [e["id"] for e in collected] == [1, 2]

    def test_other_tenants_events_never_delivered(self, live_service):
        client, base_url = live_service
        token_a = register_and_login(client, "alice")
        token_b = register_and_login(client, "bob")
        client.post("/api/v1/sync/upload", headers=auth(token_b),
                    json=batch_body("bob", "b-1", trigger_records(3)))
        client.post("/api/v1/sync/upload", headers=auth(token_a),
                    json=batch_body("alice", "b-1", trigger_records(1, start_t=9_000_000)))
        events = read_sse_events(base_url, token_a, 2, timeout_s=2.0)
        assert len(events) == 1  # only alice's own trigger
        assert events[0]["event"] == "trigger"


class TestConcurrentWatermark:
    def test_sequential_uploads_advance_monotonically(self, tmp_path):
        store = TenantStore(tmp_path, "alice")
        previous = 0
        for k in range(8):
            records = [SyncRecord("sensor", 1_000_000 + k * 100 + i, {"n": i}) for i in range(10)]
            ack = store.upload(SyncBatch("alice", f"seq-{k}", records))
            assert ack.server_watermark > previous
            previous = ack.server_watermark
        assert store.watermark() == 1_000_000 + 709

    def test_eight_concurrent_uploads_never_regress_or_corrupt(self, tmp_path):
        # concurrent writers race a single per-tenant watermark: batches that
        # lose the race go stale, but the watermark never moves backwards and
        # accepted records land exactly once
        store = TenantStore(tmp_path, "alice")
        counter = {"next": 0}
        counter_lock = threading.Lock()
        acks = []
        stale = []
        observed = []

        def worker(worker_id: int):
            for _ in range(5):
                with counter_lock:
                    base = counter["next"]
                    counter["next"] += 10
                records = [
                    SyncRecord("sensor", 1_000_000 + base + i, {"n": base + i})
                    for i in range(10)
                ]
                batch = SyncBatch("alice", f"w{worker_id}-{base}", records)
                try:
                    ack = store.upload(batch)
                    acks.append((max(r.t for r in records), ack.server_watermark, ack.accepted))
                    observed.append(ack.server_watermark)
                    later = store.watermark()
                    assert later >= ack.server_watermark  # never regresses
                except StaleBatch:
                    stale.append(batch.batch_id)

        threads = [threading.Thread(target=worker, args=(i,)) for i in range(8)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert acks, "at least the winning batches must land"
        for own_max, ack_watermark, _ in acks:
            assert ack_watermark >= own_max
        assert store.watermark() == max(w for _, w, _ in acks)
        assert store.count("sensor") == sum(accepted for _, _, accepted in acks)
        assert len(acks) + len(stale) == 40

    def test_http_level_concurrent_uploads(self, service):
        client, _ = service
        token = register_and_login(client, "alice")
        counter = {"next": 0}
        lock = threading.Lock()
        results = []

        def worker(worker_id: int):
            for _ in range(3):
                with lock:
                    base = counter["next"]
                    counter["next"] += 5
                records = [("sensor", 5_000_000 + base + i, {"n": base + i}) for i in range(5)]
                resp = client.post("/api/v1/sync/upload", headers=auth(token),
                                   json=batch_body("alice", f"hb-{worker_id}-{base}", records))
                results.append(resp)

        threads = [threading.Thread(target=worker, args=(i,)) for i in range(8)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        accepted_total = 0
        for resp in results:
            assert resp.status_code in (200, 409)
            if resp.status_code == 200:
                accepted_total += resp.json()["accepted"]
        page = client.get("/api/v1/records/sensor", params={"limit": 5000},
                          headers=auth(token)).json()
        assert len(page["records"]) == accepted_total
        assert accepted_total > 0


class TestReplayControlChannel:
    def test_commands_queue_and_drain_in_order(self, service):
        client, _ = service
        token = register_and_login(client, "alice")
        assert client.post("/api/v1/replay/control", headers=auth(token),
                           json={"command": "pause"}).status_code == 409  # no active replay
        client.post("/api/v1/replay/register", headers=auth(token))
        assert client.get("/api/v1/replay/status", headers=auth(token)).json()["active"] is True
        for command, value in (("pause", None), ("speed", 4.0), ("resume", None)):
            body = {"command": command, "value": value}
            assert client.post("/api/v1/replay/control", headers=auth(token),
                               json=body).status_code == 202
        pending = client.get("/api/v1/replay/control/pending", headers=auth(token)).json()
        assert [c["command"] for c in pending["commands"]] == ["pause", "speed", "resume"]
        assert client.get("/api/v1/replay/control/pending",
                          headers=auth(token)).json()["commands"] == []
        client.post("/api/v1/replay/unregister", headers=auth(token))
        assert client.get("/api/v1/replay/status", headers=auth(token)).json()["active"] is False

    def test_unknown_command_rejected(self, service):
        client, _ = service
        token = register_and_login(client, "alice")
        client.post("/api/v1/replay/register", headers=auth(token))
        resp = client.post("/api/v1/replay/control", headers=auth(token),
                           json={"command": "rewind-tape"})
        assert resp.status_code == 422
