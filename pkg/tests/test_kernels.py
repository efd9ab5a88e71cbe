from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from genaug import kernels
from genaug.kernels import _make_numba_impl, _osa_many_numpy, encode_word, encode_words

from oracles import osa_reference

_BACKENDS = {"numpy": _osa_many_numpy}
try:
    _BACKENDS["numba"] = _make_numba_impl()
except ImportError:  # pragma: no cover
    pass


def _distances(impl, query: str, words: list[str], cap: int) -> list[int]:
    matrix, lengths = encode_words(words)
    return [int(v) for v in impl(encode_word(query), matrix, lengths, cap)]


@pytest.mark.parametrize("backend", sorted(_BACKENDS))
def test_known_distances(backend):
    impl = _BACKENDS[backend]
    words = ["hello", "world", "wrold", "helo", "", "ab", "ba"]
    got = _distances(impl, "hello", words, 5)
    expected = [min(osa_reference("hello", w), 6) for w in words]
    assert got == expected


@pytest.mark.parametrize("backend", sorted(_BACKENDS))
def test_transposition_counts_once(backend):
    impl = _BACKENDS[backend]
    assert _distances(impl, "ab", ["ba"], 5) == [1]
    assert _distances(impl, "abcd", ["acbd"], 5) == [1]


@pytest.mark.parametrize("backend", sorted(_BACKENDS))
def test_cap_is_respected(backend):
    impl = _BACKENDS[backend]
    assert _distances(impl, "aaaaaaaaaa", ["zzzzzzzzzz"], 3) == [4]


@settings(max_examples=300, deadline=None)
@given(
    st.text(alphabet="abcde", max_size=9),
    st.lists(st.text(alphabet="abcde", max_size=9), min_size=1, max_size=5),
    st.integers(min_value=0, max_value=6),
)
def test_backends_match_reference(query, words, cap):
    expected = [min(osa_reference(query, w), cap + 1) for w in words]
    for impl in _BACKENDS.values():
        assert _distances(impl, query, words, cap) == expected


def test_module_dispatch_matches_numpy():
    rng = np.random.default_rng(7)
    words = ["".join(chr(97 + d) for d in rng.integers(0, 26, size=rng.integers(2, 9))) for _ in range(50)]
    via_module = [int(v) for v in kernels.osa_distances("hello", words, 5)]
    via_numpy = _distances(_osa_many_numpy, "hello", words, 5)
    assert via_module == via_numpy
