"""Speech-synthesis handoff: segment-ordered job queue over a backend interface.

No audio is rendered here; the bundled backend just records what it was
asked to say, in order. A dead backend never blocks message delivery.
"""

from __future__ import annotations

import queue
import threading
from dataclasses import dataclass, field
from typing import Protocol

__all__ = [
    "BackendUnavailable",
    "SpeechBackend",
    "FailingBackend",
    "RecordingBackend",
    "SpeechJob",
    "SpeechSynthesizer",
]


class BackendUnavailable(RuntimeError):
    """The speech backend rejected a job; the message still ships as text."""


class SpeechBackend(Protocol):
    def synthesize(self, text: str, message_id: str, index: int) -> None:  # pragma: no cover
        ...


class RecordingBackend:
    """Test/offline backend: logs requested segments in submission order."""

    def __init__(self) -> None:
        self.log: list[tuple[str, int, str]] = []
        self._lock = threading.Lock()

    def synthesize(self, text: str, message_id: str, index: int) -> None:
        with self._lock:
            self.log.append((message_id, index, text))

    def texts(self) -> list[str]:
        with self._lock:
            return [t for _, _, t in self.log]


class FailingBackend:
    """Fault-injection backend: always down."""

    def synthesize(self, text: str, message_id: str, index: int) -> None:
        raise BackendUnavailable("speech backend down")


@dataclass
class SpeechJob:
    message_id: str
    segments: list[str]
    submitted: int = 0
    failed: bool = False
    done = None  # threading.Event, set on completion

    def __post_init__(self):
        self.done = threading.Event()


class SpeechSynthesizer:
    """Queues one synthesis job per segment on a dedicated worker.

    Jobs are submitted at most once per segment, in segment order. Backend
    failures mark the job failed (non-fatal) and the remaining segments of
    that job are skipped.
    """

    def __init__(self, backend: SpeechBackend):
        self.backend = backend
        self._queue: "queue.Queue[SpeechJob | None]" = queue.Queue()
        self._worker = threading.Thread(target=self._run, name="speech-worker", daemon=True)
        self._worker.start()

    def synthesize_speech(self, message_id: str, segments: list[str]) -> SpeechJob:
        if not segments:
            raise ValueError("segments must be non-empty")
        job = SpeechJob(message_id=message_id, segments=list(segments))
        self._queue.put(job)
        return job

    def _run(self) -> None:
        while True:
            job = self._queue.get()
            if job is None:
                return
            for idx, text in enumerate(job.segments):
                try:
                    self.backend.synthesize(text, job.message_id, idx)
                    job.submitted += 1
                except Exception:
                    job.failed = True
                    break
            job.done.set()

    def close(self) -> None:
        self._queue.put(None)
        self._worker.join(timeout=5)
