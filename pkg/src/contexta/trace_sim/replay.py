"""Replays a trace into a sink on a scaled or as-fast-as-possible clock.

The producer runs one timeline; pause/resume/seek/speed commands arrive on a
thread-safe control handle and take effect between events. Sinks are plain
callables (or objects with ``on_event``/``on_end``).
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator

from ..sensor_model import SensorEvent, Trace

__all__ = ["ReplayControl", "ReplayReport", "SinkFailure", "replay", "AS_FAST_AS_POSSIBLE"]

AS_FAST_AS_POSSIBLE = "max"


class SinkFailure(RuntimeError):
    """Raised when the sink rejects an event; the end marker is still flushed."""


@dataclass
class ReplayReport:
    delivered: int = 0
    skipped: int = 0
    wall_seconds: float = 0.0
    paused_seconds: float = 0.0
    completed: bool = True
    error: str | None = None
    first_t: int | None = None
    last_t: int | None = None


@dataclass
class _Command:
    kind: str  # pause | resume | seek | speed | stop
    value: float | None = None


class ReplayControl:
    """Thread-safe command channel into a running replay."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._wake = threading.Condition(self._lock)
        self._queue: list[_Command] = []

    def pause(self) -> None:
        self._push(_Command("pause"))

    def resume(self) -> None:
        self._push(_Command("resume"))

    def seek(self, to_timestamp: int) -> None:
        self._push(_Command("seek", float(to_timestamp)))

    def set_speed(self, speed: float) -> None:
        if speed <= 0:
            raise ValueError("speed must be positive")
        self._push(_Command("speed", speed))

    def stop(self) -> None:
        self._push(_Command("stop"))

    def send(self, kind: str, value: float | None = None) -> None:
        """Generic entry point for wire-driven commands."""
        if kind == "pause":
            self.pause()
        elif kind == "resume":
            self.resume()
        elif kind == "seek":
            self.seek(int(value if value is not None else 0))
        elif kind == "speed":
            self.set_speed(float(value if value is not None else 1.0))
        elif kind == "stop":
            self.stop()
        else:
            raise ValueError(f"unknown replay command {kind!r}")

    def _push(self, cmd: _Command) -> None:
        with self._wake:
            self._queue.append(cmd)
            self._wake.notify_all()

    def _drain(self) -> list[_Command]:
        with self._lock:
            cmds = self._queue
            self._queue = []
            return cmds

    def _wait_for_command(self, timeout: float) -> None:
        with self._wake:
            if not self._queue:
                self._wake.wait(timeout)


def _resolve_sink(sink) -> tuple[Callable[[SensorEvent], None], Callable]:
    if callable(sink) and not hasattr(sink, "on_event"):
        return sink, getattr(sink, "on_end", lambda report: None)
    return sink.on_event, getattr(sink, "on_end", lambda report: None)


def replay(
    source: Trace | Iterable[SensorEvent],
    speed: float | str,
    sink,
    control: ReplayControl | None = None,
    clock: Callable[[], float] = time.monotonic,
    sleep: Callable[[float], None] = time.sleep,
) -> ReplayReport:
    """Deliver events to the sink in timestamp order.

    ``speed`` is a positive multiplier (wall delay between events is the
    event-time delta divided by it) or ``"max"`` for no pacing. Backward
    seek needs a materialized :class:`Trace`; iterator sources support
    forward seek only.
    """
    if speed != AS_FAST_AS_POSSIBLE and (not isinstance(speed, (int, float)) or speed <= 0):
        raise ValueError("speed must be a positive number or 'max'")
    on_event, on_end = _resolve_sink(sink)
    report = ReplayReport()

    events: list[SensorEvent] | None
    iterator: Iterator[SensorEvent]
    if isinstance(source, Trace):
        events = source.events
        iterator = iter(events)
    else:
        events = None
        iterator = iter(source)

    paced = speed != AS_FAST_AS_POSSIBLE
    rate = float(speed) if paced else 0.0
    paused = False
    seek_target: float | None = None
    stopped = False
    idx = 0
    prev_t: int | None = None
    start_wall = clock()

    def apply_commands() -> None:
        nonlocal paused, seek_target, rate, paced, stopped
        if control is None:
            return
        for cmd in control._drain():
            if cmd.kind == "pause":
                paused = True
            elif cmd.kind == "resume":
                paused = False
            elif cmd.kind == "seek":
                seek_target = cmd.value
            elif cmd.kind == "speed":
                rate = float(cmd.value)
                paced = True
            elif cmd.kind == "stop":
                stopped = True

    def next_event() -> SensorEvent | None:
        nonlocal idx
        if events is not None:
            if idx >= len(events):
                return None
            ev = events[idx]
            idx += 1
            return ev
        return next(iterator, None)

    try:
        while True:
            apply_commands()
            if stopped:
                report.completed = False
                break
            if paused:
                pause_start = clock()
                while paused and not stopped:
                    if control is not None:
                        control._wait_for_command(0.05)
                    apply_commands()
                report.paused_seconds += clock() - pause_start
                continue
            if seek_target is not None and events is not None and seek_target < (prev_t or 0):
                # backward seek: rewind the cursor; skipped events not re-counted
                idx = 0
                while idx < len(events) and events[idx].t < seek_target:
                    idx += 1
                prev_t = None
                seek_target = None
            event = next_event()
            if event is None:
                break
            if seek_target is not None:
                if event.t < seek_target:
                    report.skipped += 1
                    continue
                seek_target = None
                prev_t = None  # do not sleep across the seek gap
            if paced and prev_t is not None and event.t > prev_t:
                delay = (event.t - prev_t) / 1000.0 / rate
                # sleep in slices so pause/stop stay responsive
                while delay > 0:
                    slice_s = min(delay, 0.05)
                    sleep(slice_s)
                    delay -= slice_s
                    apply_commands()
                    if paused or stopped or seek_target is not None:
                        break
                if stopped:
                    report.completed = False
                    break
                if paused or seek_target is not None:
                    # event is still due; deliver it after the interruption
                    pass
            try:
                on_event(event)
            except Exception as exc:
                report.completed = False
                report.error = f"{type(exc).__name__}: {exc}"
                report.wall_seconds = clock() - start_wall
                try:
                    on_end(report)
                finally:
                    raise SinkFailure(report.error) from exc
            report.delivered += 1
            if report.first_t is None:
                report.first_t = event.t
            report.last_t = event.t
            prev_t = event.t
    except SinkFailure:
        raise
    report.wall_seconds = clock() - start_wall
    on_end(report)
    return report
