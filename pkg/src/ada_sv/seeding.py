"""Deterministic derivation of per-component random seeds.

Every stochastic step in the pipeline (speaker signatures, utterance
excitation, noise instances, batch draws, trial sampling, ...) derives
its own seed from a root seed plus a structured key, so results are
reproducible and order-independent: regenerating utterance 17 never
depends on having generated utterances 0..16 first.
"""

from __future__ import annotations

import hashlib

import numpy as np

_SEP = b"\x1f"


def derive_seed(*parts: int | str) -> int:
    """Hash a key of ints/strings into a stable 63-bit seed.

    Uses blake2b, so the mapping is identical across platforms, Python
    versions, and process restarts (unlike ``hash()``).
    """
    h = hashlib.blake2b(digest_size=8)
    for part in parts:
        if isinstance(part, bool) or not isinstance(part, (int, str)):
            raise TypeError(f"seed key parts must be int or str, got {type(part).__name__}")
        h.update(str(part).encode("utf-8"))
        h.update(_SEP)
    return int.from_bytes(h.digest(), "little") & 0x7FFF_FFFF_FFFF_FFFF


def rng_from(*parts: int | str) -> np.random.Generator:
    """Fresh numpy generator seeded from a derived key."""
    return np.random.default_rng(derive_seed(*parts))
