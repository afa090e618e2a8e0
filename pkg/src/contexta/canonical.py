"""Canonical JSON encoding shared by trace files, wire records, and golden files.

Key order is the insertion order of the dict being encoded; producers build
dicts in the documented field order so output bytes are stable across runs
and platforms. Floats round-trip via ``repr`` (shortest form), UTF-8 is
emitted unescaped.
"""

from __future__ import annotations

import json
from typing import Any

__all__ = ["dumps", "loads"]


def dumps(obj: Any) -> str:
    """Encode *obj* as compact, key-order-preserving JSON."""
    return json.dumps(obj, separators=(",", ":"), ensure_ascii=False, allow_nan=False)


def loads(text: str) -> Any:
    """Decode JSON text (inverse of :func:`dumps`)."""
    return json.loads(text)
