"""
Hashing and canonical serialization shared by every layer.

FNV-1a (64-bit) identifies chunk text and bucket n-grams; canonical JSON
gives byte-stable bodies for the wire and the index file.
"""

import json
from typing import Any

FNV64_OFFSET = 0xCBF29CE484222325
FNV64_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


def fnv1a_64(data: bytes) -> int:
    """64-bit FNV-1a over raw bytes."""
    h = FNV64_OFFSET
    for byte in data:
        h ^= byte
        h = (h * FNV64_PRIME) & _MASK64
    return h


def text_digest(text: str) -> str:
    """FNV-1a of the UTF-8 text rendered as 16 lowercase hex chars."""
    return f"{fnv1a_64(text.encode('utf-8')):016x}"


def canonical_json(payload: Any) -> bytes:
    """Sorted keys, no insignificant whitespace, UTF-8."""
    return json.dumps(
        payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False
    ).encode("utf-8")


def utf8_len(text: str) -> int:
    return len(text.encode("utf-8"))
