"""Lossless sentence segmentation for sequential chat bubbles.

Splits keep every character: the terminator and any following whitespace
stay attached to the left phrase, so plain concatenation of the segments
reconstructs the original text exactly, for any input. Display layers trim
for rendering; the wire format keeps the exact segments.
"""

from __future__ import annotations

__all__ = ["segment", "MIN_SEGMENT_LENGTH", "DEFAULT_MAX_SEGMENT_LENGTH"]

MIN_SEGMENT_LENGTH = 20
DEFAULT_MAX_SEGMENT_LENGTH = 120

_SENTENCE_ENDERS = set(".!?;。！？；…")
_CLAUSE_ENDERS = set(",，、：:")


def _split_at(text: str, enders: set[str]) -> list[str]:
    """Cut after each ender (plus trailing whitespace); keeps all characters."""
    parts: list[str] = []
    start = 0
    i = 0
    n = len(text)
    while i < n:
        if text[i] in enders:
            j = i + 1
            while j < n and text[j].isspace():
                j += 1
            parts.append(text[start:j])
            start = j
            i = j
        else:
            i += 1
    if start < n:
        parts.append(text[start:])
    return parts


def _split_by_length(chunk: str, max_len: int) -> list[str]:
    """Last-resort split at whitespace (or hard at max_len for unbroken runs)."""
    out: list[str] = []
    rest = chunk
    while len(rest) > max_len:
        cut = 0
        i = min(max_len, len(rest) - 1)
        while i > 0:  # cut just after the last whitespace within the limit
            if rest[i - 1].isspace():
                cut = i
                break
            i -= 1
        if cut <= 0:
            cut = max_len
        out.append(rest[:cut])
        rest = rest[cut:]
    if rest:
        out.append(rest)
    return out


def segment(text: str, max_segment_length: int = DEFAULT_MAX_SEGMENT_LENGTH) -> list[str]:
    """Split text into ordered phrases, each at most ``max_segment_length``.

    Precondition: ``max_segment_length >= 20``. Sentence terminators split
    first; sentences still too long split at clause commas, then at
    whitespace. ``"".join(segment(t)) == t`` always holds.
    """
    if max_segment_length < MIN_SEGMENT_LENGTH:
        raise ValueError(f"max_segment_length must be >= {MIN_SEGMENT_LENGTH}")
    if not text:
        return []
    segments: list[str] = []
    for sentence in _split_at(text, _SENTENCE_ENDERS):
        if len(sentence) <= max_segment_length:
            segments.append(sentence)
            continue
        for clause in _split_at(sentence, _CLAUSE_ENDERS):
            if len(clause) <= max_segment_length:
                segments.append(clause)
            else:
                segments.extend(_split_by_length(clause, max_segment_length))
    return segments
