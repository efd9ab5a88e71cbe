"""Interpolated n-gram language model and external-score ingestion.

The built-in model is a desk-scale stand-in for a finetuned neural
evaluator: absolute discounting interpolated across levels, bottoming out
in an add-one unigram over vocabulary plus a reserved unknown token.  Every
conditional distribution sums to one over vocabulary+unknown and assigns
strictly positive mass everywhere.

Metrics never care where log-probabilities come from: they accept either
this model or ``ScoreRecord`` files produced by an external scorer (see
``load_score_file`` for the wire format).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import Review
from .jsonl import make_header, read_records

UNK_TOKEN = "<unk>"

MODEL_FORMAT = "genaug-ngram"
MODEL_FORMAT_VERSION = 1


class LmError(ValueError):
    pass


History = tuple[str, ...]


@dataclass
class NgramModel:
    order: int
    discount: float
    # per level k (1..order): history tuple (k-1 tokens) -> successor counts
    counts: dict[int, dict[History, dict[str, int]]]
    vocab: set[str] = field(default_factory=set)

    def __post_init__(self) -> None:
        self.vocab.add(UNK_TOKEN)
        self._totals: dict[int, dict[History, int]] = {}
        self._distinct: dict[int, dict[History, int]] = {}
        for level, table in self.counts.items():
            self._totals[level] = {h: sum(succ.values()) for h, succ in table.items()}
            self._distinct[level] = {h: len(succ) for h, succ in table.items()}
        unigrams = self.counts.get(1, {}).get((), {})
        self._n_tokens = sum(unigrams.values())
        top = max(unigrams.values(), default=0)
        self._top_unigrams = sorted(w for w, c in unigrams.items() if c == top)

    def _map(self, token: str) -> str:
        return token if token in self.vocab else UNK_TOKEN

    def cond_prob(self, history: list[str] | History, token: str) -> float:
        """p(token | history), history truncated to the model order."""
        hist = tuple(self._map(t) for t in history[max(0, len(history) - self.order + 1) :])
        return self._cond(len(hist) + 1, hist, self._map(token))

    def _cond(self, level: int, hist: History, token: str) -> float:
        if level == 1:
            count = self.counts.get(1, {}).get((), {}).get(token, 0)
            return (count + 1) / (self._n_tokens + len(self.vocab))
        lower = self._cond(level - 1, hist[1:], token)
        total = self._totals.get(level, {}).get(hist, 0)
        if total == 0:
            return lower
        count = self.counts[level][hist].get(token, 0)
        reserved = self.discount * self._distinct[level][hist]
        return (max(count - self.discount, 0.0) + reserved * lower) / total

    def successors(self, hist: History) -> dict[str, int]:
        return self.counts.get(len(hist) + 1, {}).get(hist, {})

    def best_next_token(self, history: list[str], exclude: set[str] | None = None) -> str:
        """Highest conditional-probability vocabulary token; ties go lexicographic.

        Only successor sets of the backoff histories plus the most frequent
        unigrams can attain the maximum, so the scan stays small.
        """
        hist = tuple(self._map(t) for t in history[max(0, len(history) - self.order + 1) :])
        candidates: set[str] = set(self._top_unigrams)
        for start in range(len(hist)):
            candidates.update(self.successors(hist[start:]))
        candidates.discard(UNK_TOKEN)
        if exclude:
            candidates -= exclude
        if not candidates:
            candidates = set(self.vocab) - {UNK_TOKEN} - (exclude or set())
        if not candidates:
            raise LmError("no fill candidates available")
        best_token = ""
        best_prob = -1.0
        for token in sorted(candidates):
            prob = self._cond(len(hist) + 1, hist, token)
            if prob > best_prob:
                best_prob = prob
                best_token = token
        return best_token


def train_ngram(corpus: list[Review], order: int = 3, discount: float = 0.75) -> NgramModel:
    if order < 1:
        raise LmError(f"order must be >= 1, got {order}")
    if not 0 < discount < 1:
        raise LmError(f"discount must be in (0,1), got {discount}")
    if not corpus:
        raise LmError("cannot train on an empty corpus")
    counts: dict[int, dict[History, dict[str, int]]] = {k: {} for k in range(1, order + 1)}
    vocab: set[str] = set()
    for review in corpus:
        tokens = review.tokens
        vocab.update(tokens)
        for i, token in enumerate(tokens):
            for level in range(1, order + 1):
                if i - level + 1 < 0:
                    break
                hist = tuple(tokens[i - level + 1 : i])
                succ = counts[level].setdefault(hist, {})
                succ[token] = succ.get(token, 0) + 1
    return NgramModel(order=order, discount=discount, counts=counts, vocab=vocab)


def sequence_logprob(model: NgramModel, tokens: list[str]) -> tuple[float, list[float]]:
    """Natural-log probability of a token sequence, total and per token."""
    if not tokens:
        raise LmError("cannot score an empty sequence")
    per_token = []
    for i, token in enumerate(tokens):
        per_token.append(math.log(model.cond_prob(tokens[:i], token)))
    return sum(per_token), per_token


def save_model(model: NgramModel, path: str | Path, seed: int | None = None) -> None:
    payload = {
        "_header": make_header(
            {"format": MODEL_FORMAT, "order": model.order, "discount": model.discount},
            seed,
        ),
        "format": MODEL_FORMAT,
        "format_version": MODEL_FORMAT_VERSION,
        "order": model.order,
        "discount": model.discount,
        "counts": {
            str(level): {" ".join(hist): succ for hist, succ in table.items()}
            for level, table in model.counts.items()
        },
    }
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, ensure_ascii=False, sort_keys=True)
        handle.write("\n")


def load_model(path: str | Path) -> NgramModel:
    with open(path, encoding="utf-8") as handle:
        payload = json.load(handle)
    if payload.get("format") != MODEL_FORMAT:
        raise LmError(f"{path}: not a {MODEL_FORMAT} file")
    if payload.get("format_version") != MODEL_FORMAT_VERSION:
        raise LmError(f"{path}: unsupported format version {payload.get('format_version')}")
    counts: dict[int, dict[History, dict[str, int]]] = {}
    for level_str, table in payload["counts"].items():
        level = int(level_str)
        counts[level] = {
            tuple(hist.split(" ")) if hist else (): dict(succ) for hist, succ in table.items()
        }
    vocab = set(counts.get(1, {}).get((), {}))
    return NgramModel(
        order=int(payload["order"]),
        discount=float(payload["discount"]),
        counts=counts,
        vocab=vocab,
    )


@dataclass(frozen=True)
class ScoreRecord:
    id: str
    tokens: tuple[str, ...]
    logprobs: tuple[float, ...]


def load_score_file(path: str | Path) -> list[ScoreRecord]:
    """Read externally computed per-token log-probabilities (natural log).

    One JSON object per line: {"id": str, "tokens": [str], "logprobs": [float]}.
    """
    records = []
    for lineno, record in enumerate(read_records(path), start=1):
        try:
            rid = str(record["id"])
            tokens = [str(t) for t in record["tokens"]]
            logprobs = [float(v) for v in record["logprobs"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise LmError(f"{path} record {lineno}: malformed score record ({exc})") from exc
        if len(tokens) != len(logprobs):
            raise LmError(
                f"{path} record {lineno} (id={rid!r}): {len(tokens)} tokens "
                f"but {len(logprobs)} logprobs"
            )
        bad = [v for v in logprobs if v > 0]
        if bad:
            raise LmError(
                f"{path} record {lineno} (id={rid!r}): positive log-probability {bad[0]}"
            )
        records.append(ScoreRecord(id=rid, tokens=tuple(tokens), logprobs=tuple(logprobs)))
    return records
