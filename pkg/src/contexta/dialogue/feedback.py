"""Emoji feedback capture: long-press reactions stored for later analysis.

One live reaction per (message, user): re-reacting overwrites the emoji
(latest wins); the append-only journal keeps every submission for stats.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

__all__ = ["EMOJI_PALETTE", "FeedbackRecord", "FeedbackStore", "UnknownMessage", "UnknownEmoji"]

EMOJI_PALETTE = ("\U0001F44D", "❤️", "\U0001F602", "\U0001F62E", "\U0001F622", "\U0001F44E")


class UnknownMessage(KeyError):
    pass


class UnknownEmoji(ValueError):
    pass


@dataclass(slots=True)
class FeedbackRecord:
    message_id: str
    emoji: str
    user_id: str
    timestamp: int

    def to_wire(self) -> dict:
        return {
            "messageId": self.message_id,
            "emoji": self.emoji,
            "userId": self.user_id,
            "t": self.timestamp,
        }


class FeedbackStore:
    """Keyed upsert over an append-only journal; safe under concurrent calls."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._known_messages: set[str] = set()
        self._current: dict[tuple[str, str], FeedbackRecord] = {}
        self._journal: list[FeedbackRecord] = []

    def register_message(self, message_id: str) -> None:
        with self._lock:
            self._known_messages.add(message_id)

    def knows_message(self, message_id: str) -> bool:
        with self._lock:
            return message_id in self._known_messages

    def record(self, message_id: str, emoji: str, user_id: str, timestamp: int) -> FeedbackRecord:
        if emoji not in EMOJI_PALETTE:
            raise UnknownEmoji(f"emoji {emoji!r} not in the reaction palette")
        with self._lock:
            if message_id not in self._known_messages:
                raise UnknownMessage(message_id)
            rec = FeedbackRecord(message_id, emoji, user_id, timestamp)
            self._current[(message_id, user_id)] = rec
            self._journal.append(rec)
            return rec

    def for_message(self, message_id: str) -> list[FeedbackRecord]:
        with self._lock:
            return [rec for (mid, _), rec in self._current.items() if mid == message_id]

    def current(self, message_id: str, user_id: str) -> FeedbackRecord | None:
        with self._lock:
            return self._current.get((message_id, user_id))

    def journal(self) -> list[FeedbackRecord]:
        with self._lock:
            return list(self._journal)
