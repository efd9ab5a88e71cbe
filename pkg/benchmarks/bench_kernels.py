"""Benchmark the edit-distance kernel backends (numba JIT vs vectorized numpy).

Workload mirrors the spell metrics: one query verified against a whole
dictionary of candidate words.  Run from the repo root:

    python benchmarks/bench_kernels.py
"""

from __future__ import annotations

import time

import numpy as np

from genaug.kernels import _make_numba_impl, _osa_many_numpy, encode_word, encode_words

DICT_SIZE = 2000
N_QUERIES = 300
MAX_EDIT = 5


def make_words(rng: np.random.Generator, count: int) -> list[str]:
    alphabet = "abcdefghijklmnopqrstuvwxyz"
    return [
        "".join(alphabet[int(c)] for c in rng.integers(0, 26, size=rng.integers(3, 12)))
        for _ in range(count)
    ]


def run(impl, queries, matrix, lengths) -> tuple[float, int]:
    started = time.perf_counter()
    checksum = 0
    for query in queries:
        checksum += int(impl(query, matrix, lengths, MAX_EDIT).sum())
    return time.perf_counter() - started, checksum


def main() -> None:
    rng = np.random.default_rng(0)
    words = make_words(rng, DICT_SIZE)
    queries = [encode_word(w) for w in make_words(rng, N_QUERIES)]
    matrix, lengths = encode_words(words)

    backends = {"numpy": _osa_many_numpy}
    try:
        backends["numba"] = _make_numba_impl()
    except ImportError:
        print("numba not installed; benchmarking numpy only")

    if "numba" in backends:  # trigger JIT compilation outside the timing
        backends["numba"](queries[0], matrix, lengths, MAX_EDIT)

    results = {}
    for name, impl in sorted(backends.items()):
        elapsed, checksum = run(impl, queries, matrix, lengths)
        results[name] = (elapsed, checksum)
        pairs_per_second = DICT_SIZE * N_QUERIES / elapsed
        print(f"{name:6s}  {elapsed:8.3f}s  {pairs_per_second:12.0f} pairs/s  checksum={checksum}")

    if len(results) == 2:
        checksums = {c for _, c in results.values()}
        assert len(checksums) == 1, "backends disagree"
        speedup = results["numpy"][0] / results["numba"][0]
        print(f"numba speedup over numpy: {speedup:.1f}x")


if __name__ == "__main__":
    main()
