"""Evaluation metrics for generated continuations.

Diversity (self-BLEU, unique trigrams, type-token ratio, rare words),
fluency (perplexity, length-normalized log-odds, spell statistics via a
symmetric-delete index), semantic content preservation (greedy token-match
F1 between continuation and prompt), sentiment consistency, and the paired
two-tailed t-test used for significance reporting.

Blank continuations never enter per-item metrics; callers count them.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Protocol

import numpy as np

from . import kernels
from .corpus import GenerationBatch, Review, UnigramTable, split_review
from .jsonl import read_records
from .wordnet import token_core

_PRECISION_FLOOR = 1e-9


class MetricError(ValueError):
    pass


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu4(hypothesis: list[str], references: list[list[str]]) -> float:
    """BLEU-4 with clipped multi-reference counts and a brevity penalty.

    Zero precisions are floored at 1e-9 before the log; a hypothesis that
    exactly equals a reference scores 1.0 regardless of length, so the
    floor never touches the identity case.
    """
    if not hypothesis:
        return 0.0
    refs = [list(r) for r in references if r]
    if not refs:
        raise MetricError("need at least one non-empty reference")
    hyp = list(hypothesis)
    if any(hyp == ref for ref in refs):
        return 1.0
    log_sum = 0.0
    for n in range(1, 5):
        hyp_counts = _ngrams(hyp, n)
        total = max(len(hyp) - n + 1, 0)
        if total == 0:
            precision = 0.0
        else:
            ref_counts = [_ngrams(ref, n) for ref in refs]
            clipped = sum(
                min(count, max(rc.get(gram, 0) for rc in ref_counts))
                for gram, count in hyp_counts.items()
            )
            precision = clipped / total
        log_sum += 0.25 * math.log(max(precision, _PRECISION_FLOOR))
    hyp_len = len(hyp)
    ref_len = min((len(r) for r in refs), key=lambda L: (abs(L - hyp_len), L))
    brevity = 1.0 if hyp_len > ref_len else math.exp(1.0 - ref_len / hyp_len)
    return brevity * math.exp(log_sum)


def self_bleu(batch: GenerationBatch) -> float | None:
    """Mean BLEU-4 of each usable continuation against all the others.

    Returns None when fewer than two continuations are usable.
    """
    usable = [tokens for _, tokens in batch.usable() if tokens]
    if len(usable) < 2:
        return None
    scores = []
    for i, hyp in enumerate(usable):
        refs = usable[:i] + usable[i + 1 :]
        scores.append(bleu4(hyp, refs))
    return sum(scores) / len(scores)


def unique_trigram_ratio(population: list[list[str]]) -> float | None:
    total = 0
    distinct: set[tuple[str, ...]] = set()
    for tokens in population:
        for i in range(len(tokens) - 2):
            distinct.add(tuple(tokens[i : i + 3]))
            total += 1
    if total == 0:
        return None
    return len(distinct) / total


def type_token_ratio(tokens: list[str]) -> float:
    if not tokens:
        raise MetricError("cannot compute a type-token ratio of an empty text")
    return len(set(tokens)) / len(tokens)


def rare_words_item(tokens: list[str], table: UnigramTable) -> tuple[float, float]:
    """Negative-log corpus-frequency sum and the out-of-vocabulary rate."""
    if not tokens:
        return 0.0, 0.0
    value = 0.0
    oov = 0
    for token in tokens:
        count = table.word_counts.get(token, 0)
        if count == 0:
            oov += 1
        else:
            value -= math.log(count / table.n_train)
    return value, oov / len(tokens)


def rare_words(population: list[list[str]], table: UnigramTable) -> tuple[float, float]:
    """Mean rare-word sum over a population, plus the mean OOV rate."""
    if not population:
        raise MetricError("empty population")
    pairs = [rare_words_item(tokens, table) for tokens in population]
    return (
        sum(v for v, _ in pairs) / len(pairs),
        sum(r for _, r in pairs) / len(pairs),
    )


def perplexity(per_token_logprobs: list[float]) -> float:
    if not per_token_logprobs:
        raise MetricError("cannot compute perplexity of an empty sequence")
    return math.exp(-sum(per_token_logprobs) / len(per_token_logprobs))


def slor(tokens: list[str], per_token_logprobs: list[float], table: UnigramTable) -> float:
    """(ln p_M(S) - sum of unigram log-probs) / |S|."""
    if len(tokens) != len(per_token_logprobs):
        raise MetricError(
            f"{len(tokens)} tokens but {len(per_token_logprobs)} log-probabilities"
        )
    if not tokens:
        raise MetricError("cannot compute the score of an empty sequence")
    unigram_sum = sum(table.log_prob(t) for t in tokens)
    return (sum(per_token_logprobs) - unigram_sum) / len(tokens)


# ---------------------------------------------------------------------------
# spell checking


@dataclass
class SpellIndex:
    """Symmetric-delete index over a dictionary.

    Keys are deletion variants (up to ``max_edit`` deletes) of the first
    ``prefix_len`` characters of each word; lookups verify candidates with
    the full optimal-string-alignment distance.
    """

    words: set[str]
    max_edit: int = 5
    prefix_len: int = 10
    deletes: dict[str, list[str]] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        by_word = sorted(self.words)
        self._matrix, self._lengths = kernels.encode_words(by_word)
        self._row_of = {w: i for i, w in enumerate(by_word)}
        self._ordered = by_word


def _delete_variants(prefix: str, max_edit: int) -> set[str]:
    variants = {prefix}
    frontier = {prefix}
    for _ in range(min(max_edit, len(prefix))):
        next_frontier = set()
        for variant in frontier:
            for i in range(len(variant)):
                shorter = variant[:i] + variant[i + 1 :]
                if shorter not in variants:
                    variants.add(shorter)
                    next_frontier.add(shorter)
        frontier = next_frontier
    return variants


def build_spell_index(
    dictionary: list[str], max_edit: int = 5, prefix_len: int = 10
) -> SpellIndex:
    if not dictionary:
        raise MetricError("empty dictionary")
    words = {w.lower() for w in dictionary if w.strip()}
    index = SpellIndex(words=words, max_edit=max_edit, prefix_len=prefix_len)
    for word in sorted(words):
        for variant in _delete_variants(word[:prefix_len], max_edit):
            index.deletes.setdefault(variant, []).append(word)
    return index


def spell_lookup(index: SpellIndex, query: str) -> int | None:
    """Distance to the closest dictionary word within max_edit, else None."""
    query = query.lower()
    if query in index.words:
        return 0
    candidates: set[str] = set()
    for variant in _delete_variants(query[: index.prefix_len], index.max_edit):
        candidates.update(index.deletes.get(variant, ()))
    candidates = {w for w in candidates if abs(len(w) - len(query)) <= index.max_edit}
    if not candidates:
        return None
    rows = sorted(index._row_of[w] for w in candidates)
    matrix = index._matrix[rows]
    lengths = index._lengths[rows]
    distances = kernels.osa_distances_encoded(query, matrix, lengths, index.max_edit)
    best = int(distances.min())
    return best if best <= index.max_edit else None


def spell_stats(index: SpellIndex, continuation: list[str]) -> tuple[int, int]:
    """(misspelled word count, character-level mistake count) for one text.

    Tokens are reduced to their alphabetic core; tokens without letters are
    skipped.  A missing word with no dictionary neighbor within max_edit
    contributes max_edit+1 character mistakes.
    """
    misspelled = 0
    char_mistakes = 0
    for token in continuation:
        core = token_core(token)
        if not core or not any(c.isalpha() for c in core):
            continue
        if core in index.words:
            continue
        misspelled += 1
        distance = spell_lookup(index, core)
        char_mistakes += distance if distance is not None else index.max_edit + 1
    return misspelled, char_mistakes


def load_dictionary(path) -> list[str]:
    with open(path, encoding="utf-8") as handle:
        return [line.strip() for line in handle if line.strip()]


# ---------------------------------------------------------------------------
# semantic content preservation


class SimilarityProvider(Protocol):
    def sim(self, token_a: str, token_b: str) -> float: ...


class ExactMatchSimilarity:
    def sim(self, token_a: str, token_b: str) -> float:
        return 1.0 if token_a == token_b else 0.0


class EmbeddingSimilarity:
    """Cosine similarity over a token->vector table.

    Tokens without vectors fall back to exact-match similarity.
    """

    def __init__(self, vectors: dict[str, np.ndarray]):
        self._vectors = {}
        for token, vec in vectors.items():
            arr = np.asarray(vec, dtype=np.float64)
            norm = np.linalg.norm(arr)
            if norm > 0:
                self._vectors[token] = arr / norm

    def sim(self, token_a: str, token_b: str) -> float:
        va = self._vectors.get(token_a)
        vb = self._vectors.get(token_b)
        if va is None or vb is None:
            return 1.0 if token_a == token_b else 0.0
        return float(np.dot(va, vb))


def load_embeddings(path) -> EmbeddingSimilarity:
    """Read a token-vector JSONL file: {"token": str, "vec": [float]}."""
    vectors: dict[str, np.ndarray] = {}
    for lineno, record in enumerate(read_records(path), start=1):
        try:
            vectors[str(record["token"])] = np.asarray(record["vec"], dtype=np.float64)
        except (KeyError, TypeError, ValueError) as exc:
            raise MetricError(f"{path} record {lineno}: bad embedding record ({exc})") from exc
    return EmbeddingSimilarity(vectors)


def bpro(prompt: list[str], continuation: list[str], sim: SimilarityProvider) -> float:
    """Greedy token-alignment F1 between a continuation and its prompt."""
    if not prompt or not continuation:
        raise MetricError("prompt and continuation must be non-empty")
    recall = sum(max(sim.sim(p, c) for c in continuation) for p in prompt) / len(prompt)
    precision = sum(max(sim.sim(p, c) for p in prompt) for c in continuation) / len(continuation)
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


# ---------------------------------------------------------------------------
# sentiment consistency


class SentimentScorer(Protocol):
    def score(self, text: str, *, item_id: str | None = None) -> float: ...


_POSITIVE_WORDS = frozenset(
    """great good excellent amazing wonderful fantastic delicious love loved
    awesome perfect best friendly nice tasty fresh clean happy recommend
    enjoyed beautiful favorite incredible helpful fast pleasant cozy
    """.split()
)
_NEGATIVE_WORDS = frozenset(
    """bad terrible awful horrible worst hate hated disgusting rude slow
    dirty cold stale bland mediocre disappointing disappointed poor gross
    overpriced never avoid broken wrong soggy
    """.split()
)


class LexiconSentiment:
    """Deterministic word-valence scorer; a stand-in for a learned regressor."""

    def score(self, text: str, *, item_id: str | None = None) -> float:
        hits = 0
        balance = 0
        for token in text.split():
            core = token_core(token)
            if core in _POSITIVE_WORDS:
                hits += 1
                balance += 1
            elif core in _NEGATIVE_WORDS:
                hits += 1
                balance -= 1
        if hits == 0:
            return 0.5
        return 0.5 + 0.5 * balance / hits


class FileSentiment:
    """Id-keyed sentiment scores from a JSONL file: {"id": str, "score": float}."""

    def __init__(self, scores: dict[str, float]):
        self._scores = scores

    @classmethod
    def from_file(cls, path) -> "FileSentiment":
        scores: dict[str, float] = {}
        for lineno, record in enumerate(read_records(path), start=1):
            try:
                value = float(record["score"])
            except (KeyError, TypeError, ValueError) as exc:
                raise MetricError(f"{path} record {lineno}: bad sentiment record ({exc})") from exc
            if not 0.0 <= value <= 1.0:
                raise MetricError(
                    f"{path} record {lineno}: score {value} outside [0,1]"
                )
            scores[str(record["id"])] = value
        return cls(scores)

    def score(self, text: str, *, item_id: str | None = None) -> float:
        if item_id is None or item_id not in self._scores:
            raise MetricError(f"no sentiment score for item {item_id!r}")
        return self._scores[item_id]


def continuation_item_id(prompt_id: str, index: int) -> str:
    return f"{prompt_id}:{index}"


def sentiment_consistency(
    batches: list[GenerationBatch],
    truths: list[Review],
    scorer: SentimentScorer,
) -> tuple[float | None, float | None, list[dict]]:
    """Average within-batch score spread and distance from ground truth.

    Scores are computed on prompt+continuation concatenations; the truth
    side scores the full review.  Batches with fewer than two usable
    continuations are excluded from the spread average.
    """
    truth_by_id = {r.id: r for r in truths}
    stds = []
    diffs = []
    detail = []
    for batch in batches:
        truth = truth_by_id.get(batch.prompt_id)
        if truth is None:
            raise MetricError(f"no ground-truth review for prompt {batch.prompt_id!r}")
        prompt_text = " ".join(split_review(truth).prompt)
        scores = []
        for index, tokens in batch.usable():
            item_id = continuation_item_id(batch.prompt_id, index)
            text = prompt_text + " " + " ".join(tokens)
            scores.append(scorer.score(text, item_id=item_id))
        entry: dict = {"prompt_id": batch.prompt_id, "scores": scores}
        if len(scores) >= 2:
            entry["sent_std"] = float(np.std(scores))
            stds.append(entry["sent_std"])
        if scores:
            truth_score = scorer.score(truth.text, item_id=truth.id)
            entry["sent_diff"] = sum(abs(s - truth_score) for s in scores) / len(scores)
            diffs.append(entry["sent_diff"])
        detail.append(entry)
    sent_std = sum(stds) / len(stds) if stds else None
    sent_diff = sum(diffs) / len(diffs) if diffs else None
    return sent_std, sent_diff, detail


def stars_to_score(stars: int) -> float:
    if not isinstance(stars, int) or not 1 <= stars <= 5:
        raise MetricError(f"stars must be an integer in 1..5, got {stars!r}")
    return (stars - 1) / 4


# ---------------------------------------------------------------------------
# paired t-test


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the regularized incomplete beta (Lentz)."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, 300):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-15:
            return h
    raise MetricError("incomplete beta continued fraction failed to converge")


def betainc_reg(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b)."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def student_t_sf(t: float, df: float) -> float:
    """P(T > t) for Student's t with df degrees of freedom."""
    x = df / (df + t * t)
    tail = 0.5 * betainc_reg(df / 2.0, 0.5, x)
    return tail if t >= 0 else 1.0 - tail


def paired_ttest(a: list[float], b: list[float]) -> tuple[float, float]:
    """Paired two-tailed t-test; returns (t statistic, p value)."""
    if len(a) != len(b):
        raise MetricError(f"length mismatch: {len(a)} vs {len(b)}")
    n = len(a)
    if n < 2:
        raise MetricError("need at least two pairs")
    diffs = [x - y for x, y in zip(a, b)]
    mean = sum(diffs) / n
    variance = sum((d - mean) ** 2 for d in diffs) / (n - 1)
    if variance == 0.0:
        if mean == 0.0:
            return 0.0, 1.0
        return math.copysign(math.inf, mean), 0.0
    t = mean / math.sqrt(variance / n)
    p = 2.0 * student_t_sf(abs(t), n - 1)
    return t, min(p, 1.0)
