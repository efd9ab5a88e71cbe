"""Edit-distance kernels for the spell-check metrics.

Optimal string alignment (Damerau-Levenshtein without substring moves)
against many candidate words at once.  This is the only numeric inner loop
hot enough to matter: a spell pass verifies thousands of candidate pairs.

Two interchangeable backends:

* ``numba`` - per-word DP loop compiled with ``@njit`` (default when numba
  is importable),
* ``numpy`` - the same DP vectorized across the candidate axis.

Select explicitly with ``GENAUG_KERNELS=numba`` or ``GENAUG_KERNELS=numpy``;
anything else (or unset) means "numba if available".  ``benchmarks/
bench_kernels.py`` compares the two.
"""

from __future__ import annotations

import os

import numpy as np


def encode_word(word: str) -> np.ndarray:
    return np.frombuffer(word.encode("utf-32-le"), dtype=np.int32).copy()


def encode_words(words: list[str]) -> tuple[np.ndarray, np.ndarray]:
    """Pack words into a padded int32 matrix plus a length vector."""
    lengths = np.array([len(w) for w in words], dtype=np.int32)
    width = max(1, int(lengths.max()) if len(words) else 1)
    matrix = np.full((len(words), width), -1, dtype=np.int32)
    for row, word in enumerate(words):
        if word:
            matrix[row, : len(word)] = encode_word(word)
    return matrix, lengths


def _osa_many_numpy(
    query: np.ndarray, words: np.ndarray, lengths: np.ndarray, cap: int
) -> np.ndarray:
    """Distances from one query to every candidate row, capped at cap+1."""
    m, width = words.shape
    n = len(query)
    if m == 0:
        return np.zeros(0, dtype=np.int32)
    prev2 = np.zeros((m, width + 1), dtype=np.int32)
    prev = np.tile(np.arange(width + 1, dtype=np.int32), (m, 1))
    cur = np.zeros((m, width + 1), dtype=np.int32)
    for i in range(1, n + 1):
        cur[:, 0] = i
        qc = query[i - 1]
        for j in range(1, width + 1):
            sub = prev[:, j - 1] + (words[:, j - 1] != qc)
            step = np.minimum(np.minimum(prev[:, j] + 1, cur[:, j - 1] + 1), sub)
            if i > 1 and j > 1:
                trans_ok = (words[:, j - 1] == query[i - 2]) & (words[:, j - 2] == qc)
                step = np.where(trans_ok, np.minimum(step, prev2[:, j - 2] + 1), step)
            cur[:, j] = step
        prev2, prev, cur = prev, cur, prev2
    dist = prev[np.arange(m), lengths]
    return np.minimum(dist, cap + 1).astype(np.int32)


def _make_numba_impl():
    from numba import njit

    @njit(cache=True)
    def _osa_one(query, word, length, cap):  # pragma: no cover - compiled
        n = query.shape[0]
        if length == 0:
            return min(n, cap + 1)
        if n == 0:
            return min(length, cap + 1)
        if abs(n - length) > cap:
            return cap + 1
        prev2 = np.empty(length + 1, dtype=np.int32)
        prev = np.empty(length + 1, dtype=np.int32)
        cur = np.empty(length + 1, dtype=np.int32)
        for j in range(length + 1):
            prev[j] = j
        for i in range(1, n + 1):
            cur[0] = i
            row_min = cur[0]
            qc = query[i - 1]
            for j in range(1, length + 1):
                best = prev[j] + 1
                if cur[j - 1] + 1 < best:
                    best = cur[j - 1] + 1
                sub = prev[j - 1] + (0 if word[j - 1] == qc else 1)
                if sub < best:
                    best = sub
                if i > 1 and j > 1 and word[j - 1] == query[i - 2] and word[j - 2] == qc:
                    if prev2[j - 2] + 1 < best:
                        best = prev2[j - 2] + 1
                cur[j] = best
                if best < row_min:
                    row_min = best
            if row_min > cap:
                return cap + 1
            for j in range(length + 1):
                prev2[j] = prev[j]
                prev[j] = cur[j]
        return min(prev[length], cap + 1)

    @njit(cache=True)
    def _osa_many(query, words, lengths, cap):  # pragma: no cover - compiled
        m = words.shape[0]
        out = np.empty(m, dtype=np.int32)
        for k in range(m):
            out[k] = _osa_one(query, words[k], lengths[k], cap)
        return out

    return _osa_many


def _resolve_backend() -> tuple[str, object]:
    requested = os.environ.get("GENAUG_KERNELS", "auto").strip().lower()
    if requested not in ("auto", "numba", "numpy"):
        raise ValueError(
            f"GENAUG_KERNELS must be 'numba' or 'numpy', got {requested!r}"
        )
    if requested == "numpy":
        return "numpy", _osa_many_numpy
    try:
        return "numba", _make_numba_impl()
    except ImportError:
        if requested == "numba":
            raise
        return "numpy", _osa_many_numpy


_BACKEND_NAME, _OSA_MANY = _resolve_backend()


def backend_name() -> str:
    return _BACKEND_NAME


def osa_distances(query: str, words: list[str], cap: int) -> np.ndarray:
    """OSA distance from ``query`` to each word; values above cap become cap+1."""
    if not words:
        return np.zeros(0, dtype=np.int32)
    matrix, lengths = encode_words(words)
    return _OSA_MANY(encode_word(query), matrix, lengths, cap)


def osa_distances_encoded(
    query: str, matrix: np.ndarray, lengths: np.ndarray, cap: int
) -> np.ndarray:
    """Like :func:`osa_distances` against a pre-encoded word matrix."""
    return _OSA_MANY(encode_word(query), matrix, lengths, cap)
