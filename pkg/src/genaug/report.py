"""Assemble the full evaluation report for a set of generation batches.

The report is a JSON-friendly dict with an ``aggregates`` block, exact
per-batch / per-continuation detail arrays the aggregates can be recomputed
from, and counts of everything excluded (blank continuations, skipped
batches, unscored items).

Per-batch metric computation is independent, so ``jobs > 1`` fans it out
over a fork-based worker pool; results are collected in input order and
identical to a serial run.
"""

from __future__ import annotations

import multiprocessing
from typing import Any, Protocol

from .corpus import GenerationBatch, Review, UnigramTable, split_review
from .lm import NgramModel, ScoreRecord, sequence_logprob
from .metrics import (
    MetricError,
    SentimentScorer,
    SimilarityProvider,
    SpellIndex,
    bpro,
    continuation_item_id,
    perplexity,
    rare_words_item,
    self_bleu,
    sentiment_consistency,
    slor,
    spell_stats,
    type_token_ratio,
    unique_trigram_ratio,
)


class LogprobSource(Protocol):
    def per_token(self, item_id: str, tokens: list[str]) -> tuple[list[str], list[float]] | None: ...


class ModelScores:
    """Score concatenations with the built-in n-gram model."""

    def __init__(self, model: NgramModel):
        self._model = model

    def per_token(self, item_id: str, tokens: list[str]) -> tuple[list[str], list[float]] | None:
        if not tokens:
            return None
        _, per_token = sequence_logprob(self._model, tokens)
        return tokens, per_token


class FileScores:
    """Use externally supplied per-token log-probabilities, keyed by item id.

    The record's own tokens are authoritative; they may come from a
    different tokenizer than the toolkit's whitespace split.
    """

    def __init__(self, records: list[ScoreRecord]):
        self._by_id = {record.id: record for record in records}

    def per_token(self, item_id: str, tokens: list[str]) -> tuple[list[str], list[float]] | None:
        record = self._by_id.get(item_id)
        if record is None:
            return None
        return list(record.tokens), list(record.logprobs)


def _mean(values: list[float]) -> float | None:
    return sum(values) / len(values) if values else None


# fork-pool state: populated before the pool is created so child processes
# inherit it; nothing here is mutated by workers
_BATCH_STATE: dict[str, Any] = {}


def _batch_metrics(index: int) -> dict:
    state = _BATCH_STATE
    batch: GenerationBatch = state["batches"][index]
    table: UnigramTable = state["table"]
    truth = state["truth_by_id"].get(batch.prompt_id)
    if truth is None:
        raise MetricError(f"no ground-truth review for prompt {batch.prompt_id!r}")
    prompt_tokens = list(split_review(truth).prompt)
    usable = batch.usable()

    batch_entry: dict = {"prompt_id": batch.prompt_id, "usable": len(usable)}
    sbleu = self_bleu(batch)
    if sbleu is not None:
        batch_entry["sbleu"] = sbleu

    entries = []
    unscored = 0
    for index_, tokens in usable:
        item_id = continuation_item_id(batch.prompt_id, index_)
        entry: dict = {"prompt_id": batch.prompt_id, "index": index_}
        entry["ttr"] = type_token_ratio(tokens)
        rwords_value, oov_rate = rare_words_item(tokens, table)
        entry["rwords"] = rwords_value
        entry["rwords_oov_rate"] = oov_rate
        if state["spell_index"] is not None:
            words, chars = spell_stats(state["spell_index"], tokens)
            entry["spell_words"] = words
            entry["spell_chars"] = chars
        if state["similarity"] is not None:
            entry["bpro"] = bpro(prompt_tokens, tokens, state["similarity"])
        if state["logprobs"] is not None:
            scored = state["logprobs"].per_token(item_id, prompt_tokens + tokens)
            if scored is None:
                unscored += 1
            else:
                scored_tokens, per_token = scored
                entry["ppl"] = perplexity(per_token)
                entry["slor"] = slor(scored_tokens, per_token, table)
                covered = sum(1 for t in scored_tokens if t in table.counts)
                entry["table_coverage"] = covered / len(scored_tokens)
        entries.append(entry)

    return {
        "batch_entry": batch_entry,
        "entries": entries,
        "population": [tokens for _, tokens in usable],
        "blanks": len(batch.continuations) - len(usable),
        "sbleu_skipped": int(sbleu is None),
        "unscored": unscored,
    }


def build_report(
    batches: list[GenerationBatch],
    truths: list[Review],
    table: UnigramTable,
    logprobs: LogprobSource | None = None,
    spell_index: SpellIndex | None = None,
    similarity: SimilarityProvider | None = None,
    sentiment: SentimentScorer | None = None,
    jobs: int = 1,
) -> dict:
    _BATCH_STATE.clear()
    _BATCH_STATE.update(
        batches=batches,
        table=table,
        truth_by_id={review.id: review for review in truths},
        logprobs=logprobs,
        spell_index=spell_index,
        similarity=similarity,
    )
    if jobs > 1 and len(batches) > 1:
        context = multiprocessing.get_context("fork")
        with context.Pool(processes=jobs) as pool:
            results = pool.map(_batch_metrics, range(len(batches)))
    else:
        results = [_batch_metrics(i) for i in range(len(batches))]

    per_continuation: list[dict] = []
    per_batch: list[dict] = []
    population: list[list[str]] = []
    blanks = 0
    sbleu_skipped = 0
    unscored = 0
    for result in results:
        per_batch.append(result["batch_entry"])
        per_continuation.extend(result["entries"])
        population.extend(result["population"])
        blanks += result["blanks"]
        sbleu_skipped += result["sbleu_skipped"]
        unscored += result["unscored"]

    sent_std = sent_diff = None
    if sentiment is not None:
        sent_std, sent_diff, sent_detail = sentiment_consistency(batches, truths, sentiment)
        by_id = {d["prompt_id"]: d for d in sent_detail}
        for batch_entry in per_batch:
            info = by_id.get(batch_entry["prompt_id"], {})
            for key in ("sent_std", "sent_diff"):
                if key in info:
                    batch_entry[key] = info[key]

    def collect(key: str) -> list[float]:
        return [e[key] for e in per_continuation if key in e]

    aggregates: dict = {
        "sbleu": _mean([e["sbleu"] for e in per_batch if "sbleu" in e]),
        "utr": unique_trigram_ratio(population),
        "ttr": _mean(collect("ttr")),
        "rwords": _mean(collect("rwords")),
        "rwords_oov_rate": _mean(collect("rwords_oov_rate")),
        "ppl": _mean(collect("ppl")),
        "slor": _mean(collect("slor")),
        "spell_words": _mean(collect("spell_words")),
        "spell_chars": _mean(collect("spell_chars")),
        "bpro": _mean(collect("bpro")),
        "sent_std": sent_std,
        "sent_diff": sent_diff,
    }
    coverage = collect("table_coverage")
    if coverage:
        aggregates["table_coverage"] = _mean(coverage)

    return {
        "aggregates": aggregates,
        "counts": {
            "batches": len(batches),
            "continuations": sum(len(b.continuations) for b in batches),
            "blanks": blanks,
            "sbleu_skipped_batches": sbleu_skipped,
            "unscored_items": unscored,
        },
        "detail": {
            "per_batch": per_batch,
            "per_continuation": per_continuation,
        },
    }
