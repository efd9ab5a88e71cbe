"""Counter-based random streams.

Every randomized operation in the toolkit draws from a stream derived from
(seed, scope...) rather than from a shared global generator.  Two runs with
the same seed therefore produce identical output no matter how work is
chunked across workers, and changing one record's processing never shifts
the draws of another.
"""

from __future__ import annotations

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1


def derive_rng(seed: int, *scope: object) -> np.random.Generator:
    """Return a PCG64 generator keyed by ``seed`` and a scope path.

    Scope parts are stringified and hashed, so any hashable-ish labels work:
    ``derive_rng(7, "mix", review_id, "noise", 2)``.
    """
    label = "\x1f".join(str(part) for part in scope)
    digest = hashlib.blake2b(label.encode("utf-8"), digest_size=16).digest()
    words = [int.from_bytes(digest[i : i + 4], "little") for i in range(0, 16, 4)]
    seq = np.random.SeedSequence([seed & _MASK64, *words])
    return np.random.Generator(np.random.PCG64(seq))


def choice(rng: np.random.Generator, items: list):
    """Uniform draw from a non-empty list (index-based, order-sensitive)."""
    if not items:
        raise ValueError("cannot draw from an empty pool")
    return items[int(rng.integers(0, len(items)))]


def shuffled(rng: np.random.Generator, items: list) -> list:
    """Return a new list with the items in a seeded random order."""
    order = rng.permutation(len(items))
    return [items[int(i)] for i in order]
