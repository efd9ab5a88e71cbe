"""Review ingestion: cleaning, filtering, splitting, frequency tables.

Cleaning normalizes whitespace to single spaces, collapses runs of
identical punctuation to one character, and drops symbols outside printable
ASCII plus curly quotes and en/em dashes.  Filters (blank / URL / English
heuristic) run on the cleaned text, which makes preprocessing idempotent:
an accepted review re-run through ``preprocess_review`` is unchanged.

Tokenization throughout the toolkit is Unicode-whitespace splitting;
punctuation stays attached to words.
"""

from __future__ import annotations

import math
import re
import string
from dataclasses import dataclass, field

from .stopwords import DEFAULT_STOPWORDS

BLANK_MARKER = "<blank>"

# Non-ASCII characters that survive cleaning.
_ALLOWED_SPECIALS = frozenset("‘’“”–—")
_PUNCT_CHARS = frozenset(string.punctuation) | _ALLOWED_SPECIALS
_STRIP_CHARS = string.punctuation + "".join(sorted(_ALLOWED_SPECIALS))
_PUNCT_RUN = re.compile(
    "([" + re.escape(string.punctuation + "".join(sorted(_ALLOWED_SPECIALS))) + "])\\1+"
)
# After cleaning "//" has collapsed to "/", so schemes match on a single slash.
_URL_PATTERN = re.compile(r"(?i)(?:\b(?:https?|ftp):/|\bwww\.)")
_TRAILING_BANGS = re.compile(r"!{5,}$")

# English heuristic thresholds: share of printable-ASCII characters, and
# one stopword required per this many tokens.
_ASCII_SHARE = 0.95
_TOKENS_PER_STOPWORD = 40


class CorpusError(ValueError):
    pass


@dataclass(frozen=True)
class Review:
    """One cleaned corpus record."""

    id: str
    stars: int
    text: str

    def __post_init__(self) -> None:
        if not 1 <= self.stars <= 5:
            raise CorpusError(f"stars must be in 1..5, got {self.stars}")
        if not self.text:
            raise CorpusError("review text is empty")

    @property
    def tokens(self) -> list[str]:
        return self.text.split()


@dataclass(frozen=True)
class SplitReview:
    prompt: tuple[str, ...]
    continuation: tuple[str, ...]


@dataclass(frozen=True)
class Rejection:
    reason: str  # blank | url | non_english | bad_stars


@dataclass
class UnigramTable:
    """Token and word frequency tables.

    ``counts``/``z`` back the fluency normalizer (token space of whatever
    scorer is in use); ``word_counts``/``N_train`` back the rare-word
    metric (always whitespace words).  Built from one corpus they coincide,
    but an externally supplied token table may differ.
    """

    counts: dict[str, int] = field(default_factory=dict)
    z: int = 0
    word_counts: dict[str, int] = field(default_factory=dict)
    n_train: int = 0

    def prob(self, token: str) -> float:
        """p(t) = f(t)/(z+1); unseen tokens get the reserved 1/(z+1) mass."""
        return (self.counts.get(token, 0) or 1) / (self.z + 1)

    def log_prob(self, token: str) -> float:
        return math.log(self.prob(token))


def clean_text(raw_text: str) -> str:
    """Apply symbol removal, punctuation collapsing, whitespace normalization."""
    kept = []
    for char in raw_text:
        if char.isspace():
            kept.append(" ")
        elif ("\x20" <= char <= "\x7e") or char in _ALLOWED_SPECIALS:
            kept.append(char)
    collapsed = _PUNCT_RUN.sub(r"\1", "".join(kept))
    return " ".join(collapsed.split())


def _common_share(text: str) -> float:
    """Share of characters in the post-cleaning alphabet (ASCII + specials)."""
    common = sum(
        1
        for c in text
        if c.isspace() or ("\x20" <= c <= "\x7e") or c in _ALLOWED_SPECIALS
    )
    return common / len(text) if text else 0.0


def looks_english(text: str, stopwords: frozenset[str] = DEFAULT_STOPWORDS) -> bool:
    """Cheap, deterministic stand-in for a language-ID model."""
    if not text:
        return False
    if _common_share(text) < _ASCII_SHARE:
        return False
    tokens = clean_text(text).split()
    hits = sum(1 for t in tokens if t.strip(_STRIP_CHARS).lower() in stopwords)
    # texts shorter than the window carry too little evidence to demand a hit
    return hits >= len(tokens) // _TOKENS_PER_STOPWORD


def preprocess_review(
    raw_text: str, raw_stars: int, *, review_id: str = ""
) -> Review | Rejection:
    """Clean one raw record; returns a Review or a Rejection with a reason."""
    if not isinstance(raw_stars, int) or not 1 <= raw_stars <= 5:
        return Rejection("bad_stars")
    raw = raw_text.strip()
    if not raw:
        return Rejection("blank")
    text = clean_text(raw)
    if not text:
        return Rejection("non_english")
    if _URL_PATTERN.search(text):
        return Rejection("url")
    if not looks_english(raw):
        return Rejection("non_english")
    return Review(id=review_id, stars=raw_stars, text=text)


def split_review(review: Review) -> SplitReview:
    """First half of the words (rounded up) becomes the prompt."""
    tokens = review.tokens
    if len(tokens) < 2:
        raise CorpusError(f"review {review.id!r} has {len(tokens)} token(s); cannot split")
    cut = math.ceil(len(tokens) / 2)
    return SplitReview(prompt=tuple(tokens[:cut]), continuation=tuple(tokens[cut:]))


def postprocess_continuation(text: str) -> str:
    """Strip a trailing exclamation run longer than four; blank out empties."""
    stripped = _TRAILING_BANGS.sub("", text)
    if not stripped.strip():
        return BLANK_MARKER
    return stripped


def build_unigram_table(corpus: list[Review]) -> UnigramTable:
    """Exact whitespace-token counts over a corpus."""
    if not corpus:
        raise CorpusError("cannot build a unigram table from an empty corpus")
    counts: dict[str, int] = {}
    total = 0
    for review in corpus:
        for token in review.tokens:
            counts[token] = counts.get(token, 0) + 1
            total += 1
    return UnigramTable(counts=counts, z=total, word_counts=dict(counts), n_train=total)


@dataclass
class GenerationBatch:
    """All generated continuations for one test prompt."""

    prompt_id: str
    continuations: list[str]
    blanks: set[int] = field(default_factory=set)

    def __post_init__(self) -> None:
        bad = {i for i in self.blanks if not 0 <= i < len(self.continuations)}
        if bad:
            raise CorpusError(f"blank indices {sorted(bad)} out of range")

    @classmethod
    def from_raw(cls, prompt_id: str, raw_continuations: list[str]) -> "GenerationBatch":
        """Postprocess raw generations and mark the ones that blank out."""
        cleaned = [postprocess_continuation(c) for c in raw_continuations]
        blanks = {i for i, c in enumerate(cleaned) if c == BLANK_MARKER}
        return cls(prompt_id=prompt_id, continuations=cleaned, blanks=blanks)

    def usable(self) -> list[tuple[int, list[str]]]:
        """(index, tokens) for every non-blank continuation."""
        return [
            (i, text.split())
            for i, text in enumerate(self.continuations)
            if i not in self.blanks
        ]
