"""Per-tenant live event fan-out with a bounded replay window.

Each tenant has a monotonically numbered ring of recent events (10 minutes
by default, against an injectable clock). A subscriber names the last event
id it saw and receives everything after it, then blocks for fresh events;
reconnecting inside the retention window therefore loses nothing.
"""

from __future__ import annotations

import threading
import time
from collections import deque
from dataclasses import dataclass
from typing import Callable, Iterator

__all__ = ["StreamEvent", "StreamHub"]

RETENTION_S = 600.0


@dataclass(slots=True)
class StreamEvent:
    event_id: int
    kind: str  # "trigger" | "message" | "feedback"
    data: dict


class _TenantRing:
    def __init__(self, clock: Callable[[], float], retention_s: float):
        self.clock = clock
        self.retention_s = retention_s
        self.next_id = 1
        self.ring: deque[tuple[float, StreamEvent]] = deque()
        self.cond = threading.Condition()

    def publish(self, kind: str, data: dict) -> StreamEvent:
        with self.cond:
            event = StreamEvent(self.next_id, kind, data)
            self.next_id += 1
            now = self.clock()
            self.ring.append((now, event))
            cutoff = now - self.retention_s
            while self.ring and self.ring[0][0] < cutoff:
                self.ring.popleft()
            self.cond.notify_all()
            return event

    def events_after(self, last_id: int) -> list[StreamEvent]:
        with self.cond:
            return [e for _, e in self.ring if e.event_id > last_id]

    def wait_newer(self, last_id: int, timeout: float) -> list[StreamEvent]:
        with self.cond:
            fresh = [e for _, e in self.ring if e.event_id > last_id]
            if fresh:
                return fresh
            self.cond.wait(timeout)
            return [e for _, e in self.ring if e.event_id > last_id]


class StreamHub:
    def __init__(self, clock: Callable[[], float] = time.monotonic, retention_s: float = RETENTION_S):
        self._clock = clock
        self._retention_s = retention_s
        self._tenants: dict[str, _TenantRing] = {}
        self._lock = threading.Lock()

    def _ring(self, user_id: str) -> _TenantRing:
        with self._lock:
            ring = self._tenants.get(user_id)
            if ring is None:
                ring = _TenantRing(self._clock, self._retention_s)
                self._tenants[user_id] = ring
            return ring

    def publish(self, user_id: str, kind: str, data: dict) -> StreamEvent:
        return self._ring(user_id).publish(kind, data)

    def poll(self, user_id: str, after_id: int, wait_s: float = 0.5) -> list[StreamEvent]:
        """Events newer than *after_id*, blocking up to *wait_s* when none."""
        return self._ring(user_id).wait_newer(after_id, wait_s)

    def subscribe(
        self,
        user_id: str,
        last_event_id: int = 0,
        poll_timeout_s: float = 0.5,
        stop: threading.Event | None = None,
    ) -> Iterator[StreamEvent]:
        """Yield events after *last_event_id*, then live ones, until stopped."""
        ring = self._ring(user_id)
        cursor = last_event_id
        while stop is None or not stop.is_set():
            events = ring.wait_newer(cursor, poll_timeout_s)
            for event in events:
                cursor = max(cursor, event.event_id)
                yield event
