"""Windowed semantic text exchange with a pluggable mask-fill model.

Long reviews are processed in sliding windows of up to 20 editable tokens
preceded by 10 tokens of already-edited context; reviews of at most 25
tokens form a single window.  Per window, a replacement entity drawn from a
noun pool replaces the most similar editable noun, further words similar to
the replaced noun are masked under a budget, and a fill model supplies one
token per mask.  Output length always equals input length.

The fill model is a contract, not an implementation: anything mapping a
masked token sequence plus left context to one token per mask slot plugs
in.  ``NgramFill`` (argmax over the built-in n-gram model) is the default;
``CommandFill`` speaks a JSONL line protocol to an external process.
"""

from __future__ import annotations

import json
import math
import subprocess
import warnings
from dataclasses import dataclass
from typing import Protocol

import numpy as np

from .augment import AugmentationRecord
from .corpus import Review
from .lm import UNK_TOKEN, NgramModel
from .rng import choice, derive_rng
from .wordnet import (
    LexDatabase,
    PosTag,
    noun_similarity,
    replace_core,
    tag_token,
    token_core,
)

MASK_TOKEN = "<mask>"
STE_MRTS = (0.20, 0.40, 0.60)

_WINDOW_NEW_TOKENS = 20
_WINDOW_CONTEXT_TOKENS = 10
_SINGLE_WINDOW_LIMIT = 25

# top-frequency nouns considered for the replacement-entity pool, and how
# many of them are kept
_POOL_RANKED = 200
_POOL_KEPT = 150


class SteError(ValueError):
    pass


class FillModel(Protocol):
    def fill(self, masked: list[str], context: list[str]) -> list[str]: ...


@dataclass(frozen=True)
class SteConfig:
    mrt: float
    re_pool: tuple[str, ...]
    seed: int = 0
    mask_sim_threshold: float = 0.0

    def __post_init__(self) -> None:
        if not 0 <= self.mrt <= 1:
            raise SteError(f"masking rate threshold must be in [0,1], got {self.mrt}")
        if not self.re_pool:
            raise SteError("replacement-entity pool is empty")


@dataclass(frozen=True)
class Window:
    context: tuple[int, int]  # [start, end) token indices
    editable: tuple[int, int]


@dataclass(frozen=True)
class WindowPlan:
    windows: tuple[Window, ...]


def plan_windows(tokens: list[str]) -> WindowPlan:
    """Editable spans partition the review; contexts trail by ten tokens."""
    n = len(tokens)
    if n == 0:
        return WindowPlan(())
    if n <= _SINGLE_WINDOW_LIMIT:
        return WindowPlan((Window(context=(0, 0), editable=(0, n)),))
    windows = []
    start = 0
    while start < n:
        end = min(start + _WINDOW_NEW_TOKENS, n)
        context = (start - _WINDOW_CONTEXT_TOKENS, start) if start else (0, 0)
        windows.append(Window(context=context, editable=(start, end)))
        start = end
    return WindowPlan(tuple(windows))


def select_re(pool: tuple[str, ...] | list[str], rng: np.random.Generator) -> str:
    if not pool:
        raise SteError("replacement-entity pool is empty")
    return choice(rng, list(pool))


def re_pool_from_corpus(
    corpus: list[Review], lex: LexDatabase, rng: np.random.Generator
) -> list[str]:
    """Sample 150 of the 200 most frequent nouns in the corpus."""
    if not corpus:
        raise SteError("empty corpus")
    frequency: dict[str, int] = {}
    for review in corpus:
        for token in review.tokens:
            core = token_core(token)
            if core and tag_token(lex, token) is PosTag.NOUN:
                frequency[core] = frequency.get(core, 0) + 1
    ranked = sorted(frequency, key=lambda w: (-frequency[w], w))[:_POOL_RANKED]
    if len(ranked) < _POOL_KEPT:
        if not ranked:
            warnings.warn("corpus contains no nouns known to the lexicon")
        else:
            warnings.warn(
                f"only {len(ranked)} nouns available; keeping all of them"
            )
        return ranked
    picks = rng.choice(len(ranked), size=_POOL_KEPT, replace=False)
    return [ranked[int(i)] for i in picks]


@dataclass
class WindowResult:
    tokens: list[str]
    changed: int
    masked: int
    budget: int
    flag: str | None = None


def mask_budget(mrt: float, editable_length: int) -> int:
    # the 1e-9 nudge keeps 0.6*15 from flooring to 8
    return max(1, math.floor(mrt * editable_length + 1e-9))


def ste_window(
    editable_tokens: list[str],
    context_tokens: list[str],
    re_word: str,
    mrt: float,
    lex: LexDatabase,
    fill: FillModel,
    rng: np.random.Generator | None = None,
    mask_sim_threshold: float = 0.0,
) -> WindowResult:
    """Exchange one window: insert the replacement entity, mask, refill.

    The entity site plus the masked sites stay within
    max(1, floor(mrt * editable length)); context tokens are read-only.
    """
    if not editable_tokens:
        raise SteError("editable span is empty")
    length = len(editable_tokens)
    noun_sites = []
    for i, token in enumerate(editable_tokens):
        if tag_token(lex, token) is PosTag.NOUN:
            noun_sites.append((i, token_core(token)))
    if not noun_sites:
        return WindowResult(
            tokens=list(editable_tokens), changed=0, masked=0,
            budget=mask_budget(mrt, length), flag="no_noun",
        )
    entity_pos, entity_core = max(
        noun_sites, key=lambda site: (noun_similarity(lex, site[1], re_word), -site[0])
    )
    budget = mask_budget(mrt, length)
    out = list(editable_tokens)
    out[entity_pos] = replace_core(editable_tokens[entity_pos], re_word)

    candidates = []
    for i, core in noun_sites:
        if i == entity_pos:
            continue
        similarity = noun_similarity(lex, core, entity_core)
        if similarity > mask_sim_threshold:
            candidates.append((similarity, i))
    candidates.sort(key=lambda pair: (-pair[0], pair[1]))
    mask_positions = sorted(i for _, i in candidates[: budget - 1])

    masked_seq = list(out)
    for i in mask_positions:
        masked_seq[i] = MASK_TOKEN
    fills = fill.fill(masked_seq, list(context_tokens))
    if len(fills) != len(mask_positions):
        raise SteError(
            f"fill model returned {len(fills)} tokens for {len(mask_positions)} masks"
        )
    for i, token in zip(mask_positions, fills):
        out[i] = token
    changed = sum(1 for a, b in zip(out, editable_tokens) if a != b)
    return WindowResult(
        tokens=out, changed=changed, masked=len(mask_positions) + 1, budget=budget
    )


def ste_review(
    review: Review,
    config: SteConfig,
    lex: LexDatabase,
    fill: FillModel,
    trace: list[WindowResult] | None = None,
) -> str:
    """Process windows left to right; each sees the edited tail of the last."""
    tokens = review.tokens
    plan = plan_windows(tokens)
    out: list[str] = []
    for index, window in enumerate(plan.windows):
        rng = derive_rng(config.seed, "ste", review.id, config.mrt, index)
        re_word = select_re(config.re_pool, rng)
        context = out[window.context[0] : window.context[1]]
        editable = tokens[window.editable[0] : window.editable[1]]
        result = ste_window(
            editable,
            context,
            re_word,
            config.mrt,
            lex,
            fill,
            rng=rng,
            mask_sim_threshold=config.mask_sim_threshold,
        )
        out.extend(result.tokens)
        if trace is not None:
            trace.append(result)
    return " ".join(out)


def ste_variants(
    review: Review,
    re_pool: tuple[str, ...],
    lex: LexDatabase,
    fill: FillModel,
    seed: int,
    mrts: tuple[float, ...] = STE_MRTS,
) -> list[AugmentationRecord]:
    records = []
    for index, mrt in enumerate(mrts, start=1):
        config = SteConfig(mrt=mrt, re_pool=re_pool, seed=seed)
        text = ste_review(review, config, lex, fill)
        records.append(
            AugmentationRecord(
                source_id=review.id,
                method="ste",
                params={"mrt": mrt},
                variant_index=index,
                text=text,
            )
        )
    return records


class NgramFill:
    """Fill masks with the model's most likely token given left context."""

    def __init__(self, model: NgramModel):
        self._model = model

    def fill(self, masked: list[str], context: list[str]) -> list[str]:
        state = list(context)
        fills = []
        for token in masked:
            if token == MASK_TOKEN:
                pick = self._model.best_next_token(state, exclude={MASK_TOKEN, UNK_TOKEN})
                fills.append(pick)
                state.append(pick)
            else:
                state.append(token)
        return fills


class CommandFill:
    """Line-protocol client for an external fill process.

    Each request is one JSON line {"context": [...], "masked": [...]} on the
    child's stdin; the reply line must be {"fills": [...]} with one token
    per mask slot.
    """

    def __init__(self, argv: list[str]):
        self._proc = subprocess.Popen(
            argv,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            bufsize=1,
        )

    def fill(self, masked: list[str], context: list[str]) -> list[str]:
        request = json.dumps({"context": context, "masked": masked}, ensure_ascii=False)
        assert self._proc.stdin is not None and self._proc.stdout is not None
        self._proc.stdin.write(request + "\n")
        self._proc.stdin.flush()
        reply = self._proc.stdout.readline()
        if not reply:
            raise SteError("fill process closed its output")
        fills = json.loads(reply)["fills"]
        if len(fills) != sum(1 for t in masked if t == MASK_TOKEN):
            raise SteError("fill process returned a wrong number of tokens")
        return [str(t) for t in fills]

    def close(self) -> None:
        if self._proc.stdin:
            self._proc.stdin.close()
        self._proc.wait(timeout=10)

    def __enter__(self) -> "CommandFill":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
