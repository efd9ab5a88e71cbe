"""Augmentation variants and mixed-dataset assembly.

Three families of review variants: word-level random edits (swap, insert a
synonym, delete), character-level synthetic noise on the prompt half, and
keyword replacement driven by degree/frequency keyword scoring plus lexical
relations.  ``build_mix`` partitions a corpus across the families and emits
nested 1.5x/2x/3x/4x datasets: with a fixed seed, every larger amount is a
strict superset of the smaller ones.

All randomness flows through per-(seed, review, method) streams, so results
are independent of worker count and processing order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable

import numpy as np

from .corpus import Review, split_review
from .rng import choice, derive_rng, shuffled
from .stopwords import DEFAULT_STOPWORDS
from .wordnet import (
    REPLACEABLE_TAGS,
    LexDatabase,
    related_words,
    replace_core,
    tag_token,
    token_core,
)

TRIO_KINDS = ("swap", "insert", "delete")
TRIO_ALPHAS = (0.05, 0.10)
NOISE_LEVELS = (0.05, 0.10, 0.15)
KEYWORD_MODES = ("wn_syn", "wn_hypo", "wn_hyper")
KEYWORD_RELATIONS = {
    "wn_syn": "synonym",
    "wn_hypo": "hyponym",
    "wn_hyper": "closest_hypernym",
}
AMOUNTS = ("1.5x", "2x", "3x", "4x")
VARIANTS_PER_REVIEW = 3


class AugmentError(ValueError):
    pass


@dataclass(frozen=True)
class AugmentConfig:
    alpha: float = 0.10
    noise_level: float = 0.10
    stopwords: frozenset[str] = DEFAULT_STOPWORDS
    max_keywords: int = 3
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0 < self.alpha <= 1:
            raise AugmentError(f"alpha must be in (0,1], got {self.alpha}")
        if not 0 <= self.noise_level <= 1:
            raise AugmentError(f"noise_level must be in [0,1], got {self.noise_level}")


@dataclass(frozen=True)
class AugmentationRecord:
    source_id: str
    method: str
    params: dict[str, Any]
    variant_index: int
    text: str

    def to_json(self) -> dict[str, Any]:
        return {
            "source_id": self.source_id,
            "method": self.method,
            "params": self.params,
            "variant_index": self.variant_index,
            "text": self.text,
        }


# ---------------------------------------------------------------------------
# random swap / insert / delete


def _edit_count(alpha: float, n_tokens: int) -> int:
    return max(1, math.floor(alpha * n_tokens + 0.5))


def _any_pos_synonyms(lex: LexDatabase, core: str) -> list[str]:
    seen: set[str] = set()
    out: list[str] = []
    for pos in REPLACEABLE_TAGS:
        for lemma in related_words(lex, core, pos, "synonym"):
            if lemma not in seen:
                seen.add(lemma)
                out.append(lemma)
    return out


def random_trio(
    tokens: list[str],
    alpha: float,
    kind: str,
    lex: LexDatabase | None,
    rng: np.random.Generator,
    stopwords: frozenset[str] = DEFAULT_STOPWORDS,
) -> tuple[list[str], bool]:
    """Apply n = max(1, round(alpha*N)) random edits of one kind.

    Returns (tokens, warned); ``warned`` is set only for an insert pass that
    found no non-stopword token with a synonym, in which case the input
    comes back unchanged.
    """
    if kind not in TRIO_KINDS:
        raise AugmentError(f"kind must be one of {TRIO_KINDS}, got {kind!r}")
    if len(tokens) < 2:
        raise AugmentError("need at least two tokens")
    if not 0 < alpha <= 1:
        raise AugmentError(f"alpha must be in (0,1], got {alpha}")
    n_edits = _edit_count(alpha, len(tokens))
    out = list(tokens)

    if kind == "swap":
        for _ in range(n_edits):
            i, j = (int(v) for v in rng.choice(len(out), size=2, replace=False))
            out[i], out[j] = out[j], out[i]
        return out, False

    if kind == "delete":
        keep = min(n_edits, len(out) - 1)
        drop = {int(v) for v in rng.choice(len(out), size=keep, replace=False)}
        return [t for i, t in enumerate(out) if i not in drop], False

    if lex is None:
        raise AugmentError("insert requires a lexicon")
    for _ in range(n_edits):
        eligible = []
        for token in out:
            core = token_core(token)
            if core and core not in stopwords:
                synonyms = _any_pos_synonyms(lex, core)
                if synonyms:
                    eligible.append(synonyms)
        if not eligible:
            return list(tokens), True
        synonym = choice(rng, choice(rng, eligible))
        position = int(rng.integers(0, len(out) + 1))
        out.insert(position, synonym)
    return out, False


# ---------------------------------------------------------------------------
# character-level synthetic noise


@dataclass
class NoiseStats:
    """Event counters for rate verification."""

    drawn_positions: int = 0
    swap_eligible: int = 0
    inserts: int = 0
    deletes: int = 0
    swaps: int = 0


def _noise_word(
    word: str, level: float, rng: np.random.Generator, stats: NoiseStats | None
) -> str:
    last = len(word) - 1
    if last < 2 or level == 0.0:
        return word
    third = level / 3.0
    out = [word[0]]
    consumed = False
    for i in range(1, last):
        if consumed:
            consumed = False
            continue
        swap_ok = i + 1 < last
        if stats is not None:
            stats.drawn_positions += 1
            stats.swap_eligible += int(swap_ok)
        u = float(rng.random())
        if u < third:
            out.append(chr(ord("a") + int(rng.integers(0, 26))))
            out.append(word[i])
            if stats is not None:
                stats.inserts += 1
        elif u < 2 * third:
            if stats is not None:
                stats.deletes += 1
        elif u < 3 * third and swap_ok:
            out.append(word[i + 1])
            out.append(word[i])
            consumed = True
            if stats is not None:
                stats.swaps += 1
        else:
            out.append(word[i])
    out.append(word[last])
    return "".join(out)


def synthetic_noise(
    prompt_tokens: list[str],
    level: float,
    rng: np.random.Generator,
    stats: NoiseStats | None = None,
) -> list[str]:
    """Character noise on interior positions: insert/delete/swap, each at level/3.

    First and last characters of every word are untouchable, so words of
    length <= 2 pass through unchanged and the word count is preserved.
    Callers noise the prompt half only and reattach the original
    continuation.
    """
    if not 0 <= level <= 1:
        raise AugmentError(f"noise level must be in [0,1], got {level}")
    return [_noise_word(word, level, rng, stats) for word in prompt_tokens]


# ---------------------------------------------------------------------------
# keyword extraction (degree/frequency scoring) and replacement


@dataclass(frozen=True)
class KeywordPhrase:
    words: tuple[str, ...]
    positions: tuple[int, ...]  # token indices of the first occurrence
    score: float

    @property
    def head_position(self) -> int:
        return self.positions[-1]


def _candidate_runs(
    tokens: list[str], stopwords: frozenset[str]
) -> list[list[tuple[str, int]]]:
    """Maximal runs of non-stopword content words; punctuation breaks runs."""
    runs: list[list[tuple[str, int]]] = []
    current: list[tuple[str, int]] = []

    def close() -> None:
        nonlocal current
        if current:
            runs.append(current)
            current = []

    for position, token in enumerate(tokens):
        core = token_core(token)
        if token and not token[0].isalnum():
            close()
        if not core or core in stopwords:
            close()
            continue
        current.append((core, position))
        if not token[-1].isalnum():
            close()
    close()
    return runs


def rake_phrases(tokens: list[str], stopwords: frozenset[str]) -> list[KeywordPhrase]:
    """Score candidate phrases by summed degree/frequency word scores."""
    runs = _candidate_runs(tokens, stopwords)
    frequency: dict[str, int] = {}
    degree: dict[str, int] = {}
    for run in runs:
        for core, _ in run:
            frequency[core] = frequency.get(core, 0) + 1
            degree[core] = degree.get(core, 0) + len(run)
    first_seen: dict[tuple[str, ...], KeywordPhrase] = {}
    for run in runs:
        words = tuple(core for core, _ in run)
        if words in first_seen:
            continue
        score = sum(degree[w] / frequency[w] for w in words)
        first_seen[words] = KeywordPhrase(
            words=words,
            positions=tuple(pos for _, pos in run),
            score=score,
        )
    phrases = list(first_seen.values())
    phrases.sort(key=lambda p: (-p.score, p.positions[0]))
    return phrases


def extract_keywords(
    text: str, stopwords: frozenset[str] = DEFAULT_STOPWORDS
) -> list[tuple[str, float]]:
    """Ranked (phrase, score) pairs; highest score first, ties by position."""
    phrases = rake_phrases(text.split(), stopwords)
    return [(" ".join(p.words), p.score) for p in phrases]


def replace_keywords(
    review: Review,
    mode: str,
    lex: LexDatabase,
    rng: np.random.Generator,
    stopwords: frozenset[str] = DEFAULT_STOPWORDS,
    max_keywords: int = 3,
) -> list[AugmentationRecord]:
    """Cumulative keyword-replacement variants.

    The head (last) word of each of the highest-scored phrases is replaced
    at its position inside that phrase occurrence, provided it carries a
    replaceable part of speech and the lexicon offers candidates for the
    mode.  Variant k keeps the first k replacements; earlier replacements
    stay intact as later ones are added.
    """
    if mode not in KEYWORD_MODES:
        raise AugmentError(f"mode must be one of {KEYWORD_MODES}, got {mode!r}")
    relation = KEYWORD_RELATIONS[mode]
    tokens = review.tokens
    chosen: list[tuple[int, str, str]] = []
    used_positions: set[int] = set()
    for phrase in rake_phrases(tokens, stopwords):
        if len(chosen) >= max_keywords:
            break
        position = phrase.head_position
        if position in used_positions:
            continue
        core = token_core(tokens[position])
        tag = tag_token(lex, tokens[position])
        if tag not in REPLACEABLE_TAGS:
            continue
        candidates = related_words(lex, core, tag, relation)
        if not candidates:
            continue
        if mode == "wn_hyper":
            replacement = candidates[0]
        else:
            replacement = choice(rng, candidates)
        chosen.append((position, core, replacement))
        used_positions.add(position)

    records = []
    work = list(tokens)
    applied: list[list[str]] = []
    for k, (position, core, replacement) in enumerate(chosen, start=1):
        work[position] = replace_core(tokens[position], replacement)
        applied.append([core, replacement])
        records.append(
            AugmentationRecord(
                source_id=review.id,
                method=mode,
                params={"keywords": [list(pair) for pair in applied]},
                variant_index=k,
                text=" ".join(work),
            )
        )
    return records


# ---------------------------------------------------------------------------
# dataset mixing


PoolProvider = Callable[[Review, str], list[AugmentationRecord]]

_EMITTED_PER_AMOUNT = {"1.5x": 1, "2x": 1, "3x": 2, "4x": 3}


def assign_methods(ids: list[str], seed: int) -> dict[str, str]:
    """Seeded partition: thirds for noise/ste/keyword, keyword third in ninths."""
    rng = derive_rng(seed, "mix", "assign")
    order = [ids[int(i)] for i in rng.permutation(len(ids))]
    thirds = np.array_split(np.arange(len(order)), 3)
    assignment: dict[str, str] = {}
    for idx in thirds[0]:
        assignment[order[int(idx)]] = "noise"
    for idx in thirds[1]:
        assignment[order[int(idx)]] = "ste"
    keyword_slice = [order[int(idx)] for idx in thirds[2]]
    ninths = np.array_split(np.arange(len(keyword_slice)), 3)
    for mode, part in zip(KEYWORD_MODES, ninths):
        for idx in part:
            assignment[keyword_slice[int(idx)]] = mode
    return assignment


def _half_ids(ids: list[str], seed: int) -> set[str]:
    rng = derive_rng(seed, "mix", "half")
    order = [ids[int(i)] for i in rng.permutation(len(ids))]
    return set(order[: len(ids) // 2])


def build_mix(
    corpus: list[Review],
    amount: str,
    pool_provider: PoolProvider,
    seed: int,
) -> list[AugmentationRecord]:
    """Assemble an augmentation dataset at 1.5x/2x/3x/4x the corpus size.

    Each review owns a fixed, seeded ordering of its three method variants;
    2x emits the first, 3x the first two, 4x all three, and 1.5x the first
    for a seeded half of the reviews.  Fixed seed makes the emitted sets
    nested across amounts.
    """
    if amount not in AMOUNTS:
        raise AugmentError(f"amount must be one of {AMOUNTS}, got {amount!r}")
    if len(corpus) < 9:
        raise AugmentError(f"need at least 9 reviews to honor ninths, got {len(corpus)}")
    ids = [review.id for review in corpus]
    if len(set(ids)) != len(ids):
        raise AugmentError("review ids must be unique")
    assignment = assign_methods(ids, seed)
    half = _half_ids(ids, seed) if amount == "1.5x" else None
    emit = _EMITTED_PER_AMOUNT[amount]
    records: list[AugmentationRecord] = []
    for review in corpus:
        if half is not None and review.id not in half:
            continue
        method = assignment[review.id]
        pool = pool_provider(review, method)
        if len(pool) < VARIANTS_PER_REVIEW:
            raise AugmentError(
                f"review {review.id!r} produced {len(pool)} variants for "
                f"{method}; need {VARIANTS_PER_REVIEW}"
            )
        rng = derive_rng(seed, "mix", "order", review.id, method)
        sequence = shuffled(rng, pool)
        records.extend(sequence[:emit])
    return records


def noise_variant(
    review: Review, level: float, seed: int, stream_tag: str = "noise"
) -> AugmentationRecord:
    """Noise the prompt half, reattach the continuation."""
    parts = split_review(review)
    rng = derive_rng(seed, review.id, stream_tag, level)
    noised = synthetic_noise(list(parts.prompt), level, rng)
    text = " ".join(noised + list(parts.continuation))
    return AugmentationRecord(
        source_id=review.id,
        method="noise",
        params={"level": level},
        variant_index=NOISE_LEVELS.index(level) + 1 if level in NOISE_LEVELS else 0,
        text=text,
    )


def make_pool_provider(
    lex: LexDatabase,
    ste_variants: Callable[[Review], list[AugmentationRecord]],
    seed: int,
    stopwords: frozenset[str] = DEFAULT_STOPWORDS,
    max_keywords: int = 3,
) -> PoolProvider:
    """Standard per-method pools: three noise levels, three masking rates,
    up to three cumulative keyword variants (noise variants top up any
    keyword shortfall)."""

    def provider(review: Review, method: str) -> list[AugmentationRecord]:
        if method == "noise":
            return [noise_variant(review, level, seed) for level in NOISE_LEVELS]
        if method == "ste":
            return ste_variants(review)
        rng = derive_rng(seed, review.id, method)
        pool = replace_keywords(
            review, method, lex, rng, stopwords=stopwords, max_keywords=max_keywords
        )
        for offset in range(VARIANTS_PER_REVIEW - len(pool)):
            filler = noise_variant(
                review, NOISE_LEVELS[offset], seed, stream_tag=f"{method}-recycled"
            )
            pool.append(
                AugmentationRecord(
                    source_id=review.id,
                    method=method,
                    params={"recycled": "noise", "level": NOISE_LEVELS[offset]},
                    variant_index=len(pool) + 1,
                    text=filler.text,
                )
            )
        return pool

    return provider
