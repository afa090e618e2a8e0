"""Lexicon-based sentiment scoring and sticker keyword extraction.

Score is (pos - neg) / (pos + neg + 1) over the summed weights of matched
lexicon terms, so it always lands in (-1, 1) and is zero when nothing
matches. The keyword is the matched term with the largest absolute weight
(earliest occurrence wins ties); sticker lookup happens elsewhere.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

__all__ = ["SentimentResult", "Lexicon", "sentiment_keyword", "load_default_lexicon"]

_WORD_RE = re.compile(r"[a-zA-Z']+")
_POSITIVE_CUTOFF = 0.15
_NEGATIVE_CUTOFF = -0.15


@dataclass(slots=True)
class SentimentResult:
    score: float
    label: str  # positive | neutral | negative
    keyword: str | None


class Lexicon:
    def __init__(self, weights: dict[str, int]):
        self.weights = weights
        # CJK terms have no word boundaries; match them as substrings
        self._cjk_terms = [t for t in weights if not t.isascii()]

    @classmethod
    def parse(cls, text: str) -> "Lexicon":
        weights: dict[str, int] = {}
        for line_no, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(f"lexicon line {line_no}: expected 'term<TAB>weight'")
            weights[parts[0].lower()] = int(parts[1])
        return cls(weights)

    @classmethod
    def load(cls, path: str | Path) -> "Lexicon":
        return cls.parse(Path(path).read_text(encoding="utf-8"))

    def matches(self, text: str) -> list[tuple[int, str, int]]:
        """All (position, term, weight) matches, in document order."""
        lowered = text.lower()
        found: list[tuple[int, str, int]] = []
        for match in _WORD_RE.finditer(lowered):
            weight = self.weights.get(match.group(0))
            if weight is not None:
                found.append((match.start(), match.group(0), weight))
        for term in self._cjk_terms:
            start = 0
            while True:
                pos = lowered.find(term, start)
                if pos < 0:
                    break
                found.append((pos, term, self.weights[term]))
                start = pos + len(term)
        found.sort(key=lambda item: item[0])
        return found


@lru_cache(maxsize=1)
def load_default_lexicon() -> Lexicon:
    data = (resources.files("contexta.dialogue") / "data" / "lexicon.tsv").read_text(
        encoding="utf-8"
    )
    return Lexicon.parse(data)


def sentiment_keyword(text: str, lexicon: Lexicon | None = None) -> SentimentResult:
    """Score *text* and pick the sticker keyword, if any term matched."""
    lex = lexicon or load_default_lexicon()
    matches = lex.matches(text)
    pos = sum(w for _, _, w in matches if w > 0)
    neg = sum(-w for _, _, w in matches if w < 0)
    score = (pos - neg) / (pos + neg + 1)
    keyword: str | None = None
    best = 0
    for _, term, weight in matches:
        if abs(weight) > best:
            best = abs(weight)
            keyword = term
    if score > _POSITIVE_CUTOFF:
        label = "positive"
    elif score < _NEGATIVE_CUTOFF:
        label = "negative"
    else:
        label = "neutral"
    return SentimentResult(score=round(score, 6), label=label, keyword=keyword)
