"""Stable seed derivation (independent of Python's salted ``hash``)."""

from __future__ import annotations

import hashlib

MASK64 = (1 << 64) - 1


def derive_seed(seed: int, *labels: object) -> int:
    """Mix ``seed`` with labels into a fresh 64-bit seed."""
    h = hashlib.blake2b(digest_size=8)
    h.update((seed & MASK64).to_bytes(8, "big"))
    for label in labels:
        h.update(b"\x1f" + repr(label).encode())
    return int.from_bytes(h.digest(), "big")
