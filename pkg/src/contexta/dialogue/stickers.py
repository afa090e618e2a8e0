"""Sticker lookup: an external image service with an offline fixture mode.

Failures always degrade to "no sticker"; a message never blocks on art.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol

import httpx

from .. import canonical

__all__ = ["StickerRef", "StickerClient", "OfflineStickerClient", "HttpStickerClient"]

logger = logging.getLogger(__name__)


@dataclass(slots=True)
class StickerRef:
    keyword: str
    url: str


class StickerClient(Protocol):
    def fetch(self, keyword: str) -> StickerRef | None:  # pragma: no cover - protocol
        ...


class OfflineStickerClient:
    """Serves stickers from a fixture directory keyed by keyword."""

    def __init__(self, fixture_dir: str | Path):
        self.fixture_dir = Path(fixture_dir)

    def fetch(self, keyword: str) -> StickerRef | None:
        path = self.fixture_dir / f"{keyword}.json"
        if not path.exists():
            return None
        try:
            obj = canonical.loads(path.read_text(encoding="utf-8"))
            return StickerRef(keyword=obj["keyword"], url=obj["url"])
        except (ValueError, KeyError) as exc:
            logger.warning("bad sticker fixture %s: %s", path, exc)
            return None


class HttpStickerClient:
    def __init__(self, base_url: str, timeout_s: float = 3.0):
        self.base_url = base_url.rstrip("/")
        self.timeout_s = timeout_s

    def fetch(self, keyword: str) -> StickerRef | None:
        try:
            resp = httpx.get(
                f"{self.base_url}/stickers",
                params={"keyword": keyword},
                timeout=self.timeout_s,
            )
            resp.raise_for_status()
            obj = resp.json()
            return StickerRef(keyword=keyword, url=obj["url"])
        except Exception as exc:  # any failure degrades to no sticker
            logger.warning("sticker service failed for %r: %s", keyword, exc)
            return None
