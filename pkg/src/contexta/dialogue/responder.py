"""Pluggable response generation behind a timeout guard.

The bundled stub is a pure function of the rendered prompt: it keys its
canned reply off the ``scenario:`` line in the prompt's context block, so
the whole pipeline stays deterministic without a hosted model.
"""

from __future__ import annotations

import concurrent.futures
import re
from typing import Protocol

from ..context_engine import ScenarioId

__all__ = [
    "ResponderClient",
    "ResponderTimeout",
    "ResponderUnavailable",
    "StubResponder",
    "respond",
    "DEFAULT_TIMEOUT_S",
]

DEFAULT_TIMEOUT_S = 15.0

_SCENARIO_LINE = re.compile(r"^scenario:\s*([a-z_]+)\s*$", re.MULTILINE)
_METRIC_LINE = re.compile(r"^- ([A-Za-z0-9_]+): (.+)$", re.MULTILINE)


class ResponderTimeout(RuntimeError):
    """The client did not answer within the allowed time; retryable."""


class ResponderUnavailable(RuntimeError):
    """The client could not be reached; retryable."""


class ResponderClient(Protocol):
    name: str
    supports_streaming: bool

    def respond(self, prompt: str) -> str:  # pragma: no cover - protocol
        ...


_STUB_REPLIES: dict[ScenarioId, str] = {
    ScenarioId.EXCESSIVE_APP_USAGE: (
        "It seems like you've been scrolling for quite a while—maybe your mind is "
        "trying to unwind? Just checking in—how are you feeling right now? If you're "
        "tired but restless, I can suggest something relaxing."
    ),
    ScenarioId.WALKING: (
        "Nice walk you've got going! The rhythm of a stroll is a lovely way to clear "
        "your head. Enjoy the air out there."
    ),
    ScenarioId.RUNNING: (
        "You're on a run, keep that steady pace! Remember to sip some water when you "
        "wrap up. You've got this."
    ),
    ScenarioId.INTENSE_EXERCISE: (
        "That's a serious workout you're putting in. How are you feeling? A short "
        "cooldown afterwards will help your body thank you tomorrow."
    ),
    ScenarioId.PROLONGED_SITTING: (
        "You've been settled in one spot for quite a while now. A quick stretch or a "
        "glass of water could feel great right about now."
    ),
    ScenarioId.NAP: (
        "Welcome back from your rest. I hope it left you a little lighter. Ready to "
        "ease back into the afternoon?"
    ),
    ScenarioId.WAKE_UP: (
        "Good morning! Hope you slept well. Here's to a calm start—anything you'd "
        "like to line up for today?"
    ),
    ScenarioId.INSOMNIA: (
        "Still awake? I'm here. If your thoughts are circling, we could try a slow "
        "breathing exercise together, or I can tell you something pleasantly boring."
    ),
    ScenarioId.MEAL_PATTERN: (
        "Enjoy your meal! Taking time to sit down and eat properly is a small daily "
        "win. What's on the table today?"
    ),
    ScenarioId.NIGHTTIME_SUMMARY: (
        "Here's a gentle look back at your day before lights out. All in all, a day "
        "worth closing with a deep breath. Sleep well when you're ready."
    ),
    ScenarioId.WORKPLACE_ARRIVAL: (
        "Looks like you've made it in. Have a smooth start to the workday—I'll be "
        "here if you need a hand later."
    ),
    ScenarioId.OFF_WORK: (
        "And that's a wrap on the workday! How did it go? Either way, the evening is "
        "yours now."
    ),
    ScenarioId.TRAVEL_RECOMMENDATION: (
        "You seem to be somewhere new today! If you're in the mood to explore, I can "
        "keep you company or dig up a tip about the area."
    ),
    ScenarioId.MUSIC_PLAYBACK: (
        "Good soundtrack going there. Music makes the moment—enjoy the listen."
    ),
    ScenarioId.STORY_REMINDER: (
        "Story time! Settle in: once upon a quiet evening, a small lantern decided to "
        "learn what the stars were humming about..."
    ),
    ScenarioId.LATE_NIGHT_BINGE: (
        "That's been quite the viewing marathon tonight. No judgment—just checking "
        "in. Would a natural stopping point help you drift off easier?"
    ),
}


class StubResponder:
    """Deterministic offline responder: same prompt, same reply."""

    name = "stub"
    supports_streaming = False

    def respond(self, prompt: str) -> str:
        match = _SCENARIO_LINE.search(prompt)
        scenario: ScenarioId | None = None
        if match:
            try:
                scenario = ScenarioId(match.group(1))
            except ValueError:
                scenario = None
        if scenario is None:
            return "I'm here and listening. Tell me more whenever you like."
        reply = _STUB_REPLIES[scenario]
        metrics = _METRIC_LINE.findall(prompt)
        if scenario is ScenarioId.NIGHTTIME_SUMMARY and metrics:
            details = ", ".join(f"{k} {v}" for k, v in metrics[:4])
            reply = f"{reply} Today's numbers, lightly held: {details}."
        return reply


def respond(prompt: str, client: ResponderClient, timeout_s: float = DEFAULT_TIMEOUT_S) -> str:
    """Call the client with a hard timeout.

    Raises :class:`ResponderTimeout` when the deadline passes and
    :class:`ResponderUnavailable` for connectivity-class failures; both are
    surfaced to the console as retryable system messages.
    """
    if not prompt:
        raise ValueError("prompt must be non-empty")
    executor = concurrent.futures.ThreadPoolExecutor(max_workers=1)
    try:
        future = executor.submit(client.respond, prompt)
        try:
            return future.result(timeout=timeout_s)
        except concurrent.futures.TimeoutError:
            raise ResponderTimeout(f"responder {client.name!r} exceeded {timeout_s:g}s") from None
        except (ConnectionError, OSError) as exc:
            raise ResponderUnavailable(f"responder {client.name!r} unavailable: {exc}") from exc
    finally:
        executor.shutdown(wait=False)
