from __future__ import annotations

import math

import numpy as np
import pytest
import scipy.special
import scipy.stats
from hypothesis import given, settings, strategies as st

from genaug.corpus import GenerationBatch, Review, UnigramTable
from genaug.metrics import (
    EmbeddingSimilarity,
    ExactMatchSimilarity,
    FileSentiment,
    LexiconSentiment,
    MetricError,
    betainc_reg,
    bleu4,
    bpro,
    build_spell_index,
    paired_ttest,
    perplexity,
    rare_words,
    rare_words_item,
    self_bleu,
    sentiment_consistency,
    slor,
    spell_lookup,
    spell_stats,
    stars_to_score,
    type_token_ratio,
    unique_trigram_ratio,
)

from fixtures import random_words
from oracles import bleu_reference, overlap_f1, spell_bruteforce, ttest_reference

# ---------------------------------------------------------------------------
# BLEU


def test_bleu_identity():
    assert bleu4("the cat sat down".split(), ["the cat sat down".split()]) == 1.0
    assert bleu4(["one"], [["one"]]) == 1.0


def test_bleu_disjoint_near_zero():
    score = bleu4("a b c d".split(), ["x y z w".split()])
    assert score < 2e-3  # (1e-9)^(1/4) scale


def test_bleu_hand_case():
    got = bleu4("the cat sat".split(), ["the cat sat down".split()])
    expected = math.exp(1 - 4 / 3) * math.exp(0.25 * math.log(1e-9))
    assert got == pytest.approx(expected, abs=1e-12)


def test_bleu_multi_reference_clipping():
    hyp = "the the cat".split()
    refs = [["the", "cat"], ["the", "the"]]
    got = bleu4(hyp, refs)
    assert got == pytest.approx(bleu_reference(hyp, refs), abs=1e-12)


def test_bleu_requires_reference():
    with pytest.raises(MetricError):
        bleu4(["a"], [[]])
    assert bleu4([], [["a"]]) == 0.0


@settings(max_examples=150, deadline=None)
@given(st.lists(st.sampled_from("abcd"), min_size=1, max_size=12))
def test_bleu_identity_property(tokens):
    assert bleu4(tokens, [tokens]) == 1.0


@settings(max_examples=150, deadline=None)
@given(
    st.lists(st.sampled_from("abc"), min_size=1, max_size=8),
    st.lists(st.lists(st.sampled_from("abc"), min_size=1, max_size=8), min_size=1, max_size=3),
)
def test_bleu_matches_reference(hyp, refs):
    assert bleu4(hyp, refs) == pytest.approx(bleu_reference(hyp, refs), abs=1e-12)


def test_self_bleu_identical_batch():
    batch = GenerationBatch.from_raw("p", ["same text here"] * 10)
    assert self_bleu(batch) == pytest.approx(1.0)


def test_self_bleu_disjoint_pair():
    batch = GenerationBatch.from_raw("p", ["a b c", "x y z"])
    assert self_bleu(batch) < 2e-3


def test_self_bleu_matches_pairwise_bruteforce():
    texts = ["the cat sat on mat", "the dog sat on rug", "a cat ran to mat"]
    batch = GenerationBatch.from_raw("p", texts)
    token_lists = [t.split() for t in texts]
    expected = np.mean(
        [
            bleu_reference(tokens, token_lists[:i] + token_lists[i + 1 :])
            for i, tokens in enumerate(token_lists)
        ]
    )
    assert self_bleu(batch) == pytest.approx(float(expected), abs=1e-12)


def test_self_bleu_permutation_invariant():
    texts = ["the cat sat", "a dog ran fast", "the cat ran", "sat the cat"]
    forward = self_bleu(GenerationBatch.from_raw("p", texts))
    backward = self_bleu(GenerationBatch.from_raw("p", texts[::-1]))
    assert forward == pytest.approx(backward, abs=1e-12)


def test_self_bleu_skips_small_batches():
    batch = GenerationBatch.from_raw("p", ["only one", "!!!!!"])
    assert self_bleu(batch) is None


# ---------------------------------------------------------------------------
# lexical diversity


def test_unique_trigram_ratio_enumerated():
    assert unique_trigram_ratio(["the cat sat on the mat".split()]) == 1.0
    doubled = ["the cat sat on the mat".split()] * 2
    assert unique_trigram_ratio(doubled) == 0.5
    assert unique_trigram_ratio(["a b".split()]) is None


def test_unique_trigram_ratio_cross_text_repeats():
    population = [["a", "b", "c", "d"], ["b", "c", "d"]]
    # trigrams: abc, bcd | bcd -> 2 distinct of 3
    assert unique_trigram_ratio(population) == pytest.approx(2 / 3)


def test_type_token_ratio():
    assert type_token_ratio(["a", "a", "a"]) == pytest.approx(1 / 3)
    assert type_token_ratio(["a", "b", "c"]) == 1.0
    assert type_token_ratio(["a", "b", "a", "b"]) == 0.5
    with pytest.raises(MetricError):
        type_token_ratio([])


def _table(counts: dict[str, int]) -> UnigramTable:
    total = sum(counts.values())
    return UnigramTable(counts=dict(counts), z=total, word_counts=dict(counts), n_train=total)


def test_rare_words_cases():
    table = _table({"w": 10})
    assert rare_words_item(["w"], table) == (pytest.approx(0.0), 0.0)
    table = _table({"w": 1, "x": 9})
    value, oov = rare_words_item(["w"], table)
    assert value == pytest.approx(2.302585092994046, abs=1e-12)
    assert oov == 0.0
    value, oov = rare_words_item(["qq", "zz"], table)
    assert value == 0.0
    assert oov == 1.0


def test_rare_words_scale_invariance():
    small = _table({"a": 2, "b": 6})
    big = _table({"a": 20, "b": 60})
    tokens = ["a", "b", "b", "a"]
    assert rare_words_item(tokens, small)[0] == pytest.approx(
        rare_words_item(tokens, big)[0], abs=1e-12
    )


def test_rare_words_population_mean():
    table = _table({"a": 1, "b": 3})
    value, oov = rare_words([["a"], ["b"]], table)
    assert value == pytest.approx((-math.log(1 / 4) - math.log(3 / 4)) / 2, abs=1e-12)
    assert oov == 0.0


# ---------------------------------------------------------------------------
# fluency


def test_perplexity_uniform_and_constant():
    assert perplexity([math.log(1 / 100)] * 7) == pytest.approx(100.0, abs=1e-9)
    assert perplexity([math.log(0.5)] * 3) == pytest.approx(2.0, abs=1e-12)
    with pytest.raises(MetricError):
        perplexity([])


def test_slor_cancellation_is_zero():
    table = _table({"a": 2, "b": 1})
    tokens = ["a", "b", "a"]
    logprobs = [table.log_prob(t) for t in tokens]
    assert slor(tokens, logprobs, table) == pytest.approx(0.0, abs=1e-12)


def test_slor_log_shift():
    table = _table({"a": 2, "b": 1})
    tokens = ["a", "b"]
    base = [table.log_prob(t) for t in tokens]
    shifted = [lp + math.log(2) for lp in base]
    assert slor(tokens, shifted, table) == pytest.approx(math.log(2), abs=1e-12)


def test_slor_hand_case():
    table = _table({"a": 2, "b": 1})
    tokens = ["a", "b", "a"]
    logprobs = [-1.0, -2.0, -0.5]
    expected = (
        (-3.5) - (math.log(2 / 4) + math.log(1 / 4) + math.log(2 / 4))
    ) / 3
    assert slor(tokens, logprobs, table) == pytest.approx(expected, abs=1e-12)


def test_slor_rescaled_table_shift_is_exact():
    # scaling all counts by k shifts each ln p(t) by ln(k(z+1)/(kz+1)),
    # which vanishes as z grows: corpus size only enters through the +1
    tokens = ["a", "b", "a", "b", "b"]
    logprobs = [-1.0, -2.0, -0.5, -1.5, -0.25]
    base = _table({"a": 2, "b": 3})
    k = 7
    scaled = _table({"a": 2 * k, "b": 3 * k})
    per_token_shift = math.log(k * (base.z + 1) / (k * base.z + 1))
    got = slor(tokens, logprobs, scaled) - slor(tokens, logprobs, base)
    assert got == pytest.approx(-per_token_shift, abs=1e-12)


def test_slor_length_mismatch_errors():
    with pytest.raises(MetricError):
        slor(["a"], [-0.5, -0.5], _table({"a": 1}))


# ---------------------------------------------------------------------------
# spell checking


def test_delete_variant_index_contents():
    index = build_spell_index(["ab"], max_edit=1)
    assert set(index.deletes) == {"ab", "a", "b"}


def test_spell_hand_case():
    index = build_spell_index(["hello", "world"])
    assert spell_stats(index, "helo wrold".split()) == (2, 2)
    assert spell_stats(index, "hello world".split()) == (0, 0)


def test_spell_unmatched_cap():
    index = build_spell_index(["hello", "world"], max_edit=5)
    assert spell_stats(index, ["zzzzzzzzzzzzzz"]) == (1, 6)


def test_spell_duplicates_deduplicated():
    index = build_spell_index(["ab", "ab", "AB"])
    assert index.words == {"ab"}


def test_spell_skips_non_alphabetic_tokens():
    index = build_spell_index(["hello"])
    assert spell_stats(index, ["hello,", "123", "..."]) == (0, 0)


def test_empty_query_resolves_through_deletes():
    index = build_spell_index(["ab", "abcdef"], max_edit=5)
    assert spell_lookup(index, "") == 2


def test_spell_index_matches_bruteforce_small():
    rng = np.random.default_rng(11)
    dictionary = random_words(rng, 60, min_len=3, max_len=8)
    index = build_spell_index(dictionary, max_edit=3)
    queries = random_words(rng, 40, min_len=2, max_len=9)
    queries += [w[1:] for w in dictionary[:10]] + [w + "x" for w in dictionary[10:20]]
    for query in queries:
        assert spell_lookup(index, query) == spell_bruteforce(dictionary, query, 3), query


# ---------------------------------------------------------------------------
# prompt-continuation alignment


def test_bpro_identity_and_disjoint():
    exact = ExactMatchSimilarity()
    assert bpro(["a", "b"], ["a", "b"], exact) == 1.0
    assert bpro(["a", "b"], ["x", "y"], exact) == 0.0


def test_bpro_hand_case():
    assert bpro(["a", "b"], ["a", "c"], ExactMatchSimilarity()) == pytest.approx(0.5)


@settings(max_examples=200, deadline=None)
@given(
    st.lists(st.sampled_from("abcde"), min_size=1, max_size=8),
    st.lists(st.sampled_from("abcde"), min_size=1, max_size=8),
)
def test_bpro_exact_match_equals_overlap_f1(prompt, continuation):
    got = bpro(prompt, continuation, ExactMatchSimilarity())
    assert got == pytest.approx(overlap_f1(prompt, continuation), abs=1e-12)


def test_embedding_similarity_cosine():
    provider = EmbeddingSimilarity({"a": [1.0, 0.0], "b": [0.0, 2.0], "c": [1.0, 1.0]})
    assert provider.sim("a", "a") == pytest.approx(1.0)
    assert provider.sim("a", "b") == pytest.approx(0.0)
    assert provider.sim("a", "c") == pytest.approx(math.sqrt(0.5))
    assert provider.sim("zz", "zz") == 1.0  # fallback for unknown tokens


# ---------------------------------------------------------------------------
# sentiment


class _FixedScorer:
    def __init__(self, table):
        self._table = table

    def score(self, text, *, item_id=None):
        return self._table[item_id]


def _batch(prompt_id, texts):
    return GenerationBatch.from_raw(prompt_id, texts)


def test_sentiment_constant_scores():
    truths = [Review("p", 4, "great food here always")]
    batches = [_batch("p", ["fine stuff", "other words"])]
    scorer = _FixedScorer({"p:0": 0.6, "p:1": 0.6, "p": 0.5})
    sent_std, sent_diff, _ = sentiment_consistency(batches, truths, scorer)
    assert sent_std == pytest.approx(0.0)
    assert sent_diff == pytest.approx(0.1, abs=1e-12)


def test_sentiment_population_std():
    truths = [Review("p", 4, "great food here always")]
    batches = [_batch("p", ["fine stuff", "other words"])]
    scorer = _FixedScorer({"p:0": 0.0, "p:1": 1.0, "p": 0.5})
    sent_std, _, _ = sentiment_consistency(batches, truths, scorer)
    assert sent_std == pytest.approx(0.5)


def test_sentiment_small_batches_excluded_from_std():
    truths = [Review("p", 4, "great food here always"), Review("q", 2, "bad spot in town")]
    batches = [_batch("p", ["one usable", "!!!!!"]), _batch("q", ["x y", "z w"])]
    scorer = _FixedScorer({"p:0": 0.9, "q:0": 0.2, "q:1": 0.4, "p": 1.0, "q": 0.0})
    sent_std, sent_diff, detail = sentiment_consistency(batches, truths, scorer)
    assert sent_std == pytest.approx(0.1)  # only batch q
    assert sent_diff == pytest.approx((0.1 + 0.3) / 2)
    assert "sent_std" not in detail[0]


def test_lexicon_sentiment_bounds():
    scorer = LexiconSentiment()
    assert scorer.score("great great terrible") == pytest.approx(0.5 + 0.5 / 3)
    assert scorer.score("nothing scored here") == 0.5
    assert 0.0 <= scorer.score("terrible awful bad") <= 1.0


def test_file_sentiment_validation(tmp_path):
    path = tmp_path / "sent.jsonl"
    path.write_text('{"id": "a", "score": 0.25}\n')
    scorer = FileSentiment.from_file(path)
    assert scorer.score("ignored", item_id="a") == 0.25
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"id": "a", "score": 1.5}\n')
    with pytest.raises(MetricError):
        FileSentiment.from_file(bad)


def test_stars_to_score_table():
    assert stars_to_score(1) == 0.0
    assert stars_to_score(2) == 0.25
    assert stars_to_score(3) == 0.5
    assert stars_to_score(4) == 0.75
    assert stars_to_score(5) == 1.0
    with pytest.raises(MetricError):
        stars_to_score(6)
    with pytest.raises(MetricError):
        stars_to_score(0)


# ---------------------------------------------------------------------------
# significance


def test_ttest_equal_series():
    t, p = paired_ttest([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
    assert t == 0.0
    assert p == 1.0


def test_ttest_constant_shift_zero_variance():
    t, p = paired_ttest([1.0, 2.0, 3.0], [0.5, 1.5, 2.5])
    assert math.isinf(t) and t > 0
    assert p == 0.0


def test_ttest_length_mismatch():
    with pytest.raises(MetricError):
        paired_ttest([1.0], [1.0, 2.0])


_TT_A = [12.1, 11.4, 13.2, 10.9, 12.8, 11.7, 12.3, 13.0, 11.2, 12.6]
_TT_B = [11.8, 11.5, 12.6, 10.1, 12.9, 11.0, 11.9, 12.4, 11.5, 12.0]


def test_ttest_ten_point_fixture_frozen():
    t, p = paired_ttest(_TT_A, _TT_B)
    # frozen from the 50-digit mpmath oracle
    assert abs(t - 2.863044886533361) < 1e-6
    assert abs(p - 0.018687385142416) < 1e-3


def test_ttest_matches_high_precision_reference():
    t, p = paired_ttest(_TT_A, _TT_B)
    t_ref, p_ref = ttest_reference(_TT_A, _TT_B)
    assert abs(t - t_ref) < 1e-9
    assert abs(p - p_ref) < 1e-9


@settings(max_examples=50, deadline=None)
@given(
    st.lists(
        st.tuples(
            st.floats(min_value=-50, max_value=50),
            st.floats(min_value=-50, max_value=50),
        ),
        min_size=2,
        max_size=30,
    )
)
def test_ttest_matches_scipy(pairs):
    a = [x for x, _ in pairs]
    b = [y for _, y in pairs]
    diffs = [x - y for x, y in pairs]
    mean = sum(diffs) / len(diffs)
    if all(d == mean for d in diffs):
        return
    t, p = paired_ttest(a, b)
    expected = scipy.stats.ttest_rel(a, b)
    assert t == pytest.approx(expected.statistic, rel=1e-9, abs=1e-9)
    assert p == pytest.approx(expected.pvalue, rel=1e-7, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(
    st.floats(min_value=0.5, max_value=40),
    st.floats(min_value=0.5, max_value=40),
    st.floats(min_value=0, max_value=1),
)
def test_betainc_matches_scipy(a, b, x):
    assert betainc_reg(a, b, x) == pytest.approx(
        float(scipy.special.betainc(a, b, x)), rel=1e-10, abs=1e-12
    )
