"""Dialogue pipeline: responder, segmentation, stickers, feedback, speech."""

from .feedback import EMOJI_PALETTE, FeedbackRecord, FeedbackStore, UnknownEmoji, UnknownMessage
from .pipeline import DialogueMessage, DialoguePipeline
from .responder import (
    DEFAULT_TIMEOUT_S,
    ResponderClient,
    ResponderTimeout,
    ResponderUnavailable,
    StubResponder,
    respond,
)
from .segmentation import DEFAULT_MAX_SEGMENT_LENGTH, MIN_SEGMENT_LENGTH, segment
from .sentiment import Lexicon, SentimentResult, load_default_lexicon, sentiment_keyword
from .speech import (
    BackendUnavailable,
    FailingBackend,
    RecordingBackend,
    SpeechBackend,
    SpeechJob,
    SpeechSynthesizer,
)
from .stickers import HttpStickerClient, OfflineStickerClient, StickerClient, StickerRef

__all__ = [
    "BackendUnavailable",
    "DEFAULT_MAX_SEGMENT_LENGTH",
    "DEFAULT_TIMEOUT_S",
    "DialogueMessage",
    "DialoguePipeline",
    "EMOJI_PALETTE",
    "FailingBackend",
    "FeedbackRecord",
    "FeedbackStore",
    "HttpStickerClient",
    "Lexicon",
    "load_default_lexicon",
    "MIN_SEGMENT_LENGTH",
    "OfflineStickerClient",
    "RecordingBackend",
    "respond",
    "ResponderClient",
    "ResponderTimeout",
    "ResponderUnavailable",
    "segment",
    "sentiment_keyword",
    "SentimentResult",
    "SpeechBackend",
    "SpeechJob",
    "SpeechSynthesizer",
    "StickerClient",
    "StickerRef",
    "StubResponder",
    "UnknownEmoji",
    "UnknownMessage",
]
