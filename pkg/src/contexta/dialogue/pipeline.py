"""Trigger-to-message orchestration: prompt, responder, then enrichment.

For one trigger the console observes prompt -> response -> segments in that
order, all under one message id. Ids are derived from (user, scenario,
fire time) so a replayed trace produces byte-identical message records.
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass

from ..context_engine import ScenarioTrigger
from ..prompt_builder import InteractionEntry, InteractionHistory, TemplateSet, build, render
from .feedback import FeedbackStore
from .responder import DEFAULT_TIMEOUT_S, ResponderClient, respond
from .segmentation import DEFAULT_MAX_SEGMENT_LENGTH, segment
from .sentiment import Lexicon, sentiment_keyword
from .speech import SpeechSynthesizer
from .stickers import StickerClient, StickerRef

__all__ = ["DialogueMessage", "DialoguePipeline"]

logger = logging.getLogger(__name__)


@dataclass(slots=True)
class DialogueMessage:
    message_id: str
    scenario_id: str | None
    segments: list[str]
    sticker: StickerRef | None
    sentiment_label: str
    sentiment_score: float
    timestamp: int

    @property
    def text(self) -> str:
        return "".join(self.segments)

    def to_wire(self) -> dict:
        return {
            "messageId": self.message_id,
            "scenarioId": self.scenario_id,
            "segments": self.segments,
            "sticker": self.sticker.url if self.sticker else None,
            "sentiment": {"label": self.sentiment_label, "score": self.sentiment_score},
            "t": self.timestamp,
        }

    @classmethod
    def from_wire(cls, obj: dict) -> "DialogueMessage":
        sticker = None
        if obj.get("sticker"):
            sticker = StickerRef(keyword="", url=obj["sticker"])
        return cls(
            message_id=obj["messageId"],
            scenario_id=obj.get("scenarioId"),
            segments=list(obj["segments"]),
            sticker=sticker,
            sentiment_label=obj["sentiment"]["label"],
            sentiment_score=obj["sentiment"]["score"],
            timestamp=obj["t"],
        )


def _message_id(user_id: str, trigger: ScenarioTrigger) -> str:
    digest = hashlib.sha1(
        f"{user_id}:{trigger.scenario_id.value}:{trigger.fired_at}".encode()
    ).hexdigest()
    return f"msg-{digest[:12]}"


class DialoguePipeline:
    """Wires prompt building, the responder, and the dialogue enrichments."""

    def __init__(
        self,
        templates: TemplateSet,
        responder: ResponderClient,
        sticker_client: StickerClient | None = None,
        synthesizer: SpeechSynthesizer | None = None,
        feedback_store: FeedbackStore | None = None,
        lexicon: Lexicon | None = None,
        max_segment_length: int = DEFAULT_MAX_SEGMENT_LENGTH,
        responder_timeout_s: float = DEFAULT_TIMEOUT_S,
    ):
        self.templates = templates
        self.responder = responder
        self.sticker_client = sticker_client
        self.synthesizer = synthesizer
        self.feedback = feedback_store if feedback_store is not None else FeedbackStore()
        self.lexicon = lexicon
        self.max_segment_length = max_segment_length
        self.responder_timeout_s = responder_timeout_s
        self.history: dict[str, InteractionHistory] = {}

    def history_for(self, user_id: str) -> InteractionHistory:
        if user_id not in self.history:
            self.history[user_id] = InteractionHistory()
        return self.history[user_id]

    def handle_trigger(self, user_id: str, trigger: ScenarioTrigger) -> DialogueMessage:
        """Run one trigger through prompt -> response -> enrichment."""
        history = self.history_for(user_id)
        spec = build(trigger, history, self.templates)
        prompt = render(spec)
        reply = respond(prompt, self.responder, timeout_s=self.responder_timeout_s)
        segments = segment(reply, self.max_segment_length)
        senti = sentiment_keyword(reply, self.lexicon)
        sticker: StickerRef | None = None
        if senti.keyword and self.sticker_client is not None:
            sticker = self.sticker_client.fetch(senti.keyword)
        message = DialogueMessage(
            message_id=_message_id(user_id, trigger),
            scenario_id=trigger.scenario_id.value,
            segments=segments,
            sticker=sticker,
            sentiment_label=senti.label,
            sentiment_score=senti.score,
            timestamp=trigger.fired_at,
        )
        self.feedback.register_message(message.message_id)
        history.add(
            InteractionEntry(
                message_id=message.message_id,
                direction="assistant",
                text=reply,
                timestamp=trigger.fired_at,
            )
        )
        if self.synthesizer is not None:
            try:
                self.synthesizer.synthesize_speech(message.message_id, segments)
            except Exception as exc:
                logger.warning("speech handoff failed for %s: %s", message.message_id, exc)
        return message
