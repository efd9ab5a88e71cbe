"""Command-line pipeline: ingest -> augment/mix -> train-lm -> evaluate.

Every output file starts with a header line carrying the tool version, a
hash of the effective configuration, and the seed, and identical
(config, seed) runs are byte-identical.  Exit code 1 means a validation
failure (bad flags, missing or malformed inputs), 2 a runtime failure;
either way a machine-readable error object goes to stderr.

A JSON config file (--config) may predefine any long flag by its
destination name; explicit flags win.  GENAUG_WORDNET_DIR provides the
default lexicon directory.
"""

from __future__ import annotations

import argparse
import json
import multiprocessing
import os
import sys
from pathlib import Path
from typing import Any

from . import augment as aug
from . import ste as ste_mod
from .corpus import (
    CorpusError,
    GenerationBatch,
    Rejection,
    Review,
    build_unigram_table,
    preprocess_review,
    split_review,
)
from .jsonl import make_header, read_records, write_records
from .lm import LmError, load_model, load_score_file, save_model, train_ngram
from .metrics import (
    ExactMatchSimilarity,
    FileSentiment,
    LexiconSentiment,
    MetricError,
    build_spell_index,
    load_dictionary,
    load_embeddings,
    paired_ttest,
)
from .report import FileScores, ModelScores, build_report
from .rng import choice, derive_rng
from .stopwords import DEFAULT_STOPWORDS, load_stopwords
from .wordnet import LexiconError, load_lexicon_dir, token_core

# Generation-protocol constants recorded for provenance; generation itself
# happens outside this toolkit.
GENERATION_PROTOCOL = {
    "nucleus_sampling_budget": 0.9,
    "length_limit": 500,
    "continuations_per_prompt": 100,
}

_INPUT_ERRORS = (CorpusError, LexiconError, LmError, MetricError, aug.AugmentError,
                 ste_mod.SteError, ValueError, KeyError, OSError, json.JSONDecodeError)


class ValidationFailure(Exception):
    pass


def _log(args: argparse.Namespace, event: str, **fields: Any) -> None:
    if getattr(args, "log_json", False):
        print(json.dumps({"event": event, **fields}, sort_keys=True), file=sys.stderr)


def _load_config_file(path: str | None) -> dict[str, Any]:
    if not path:
        return {}
    if not Path(path).is_file():
        raise ValidationFailure(f"config file not found: {path}")
    with open(path, encoding="utf-8") as handle:
        config = json.load(handle)
    if not isinstance(config, dict):
        raise ValidationFailure("config file must hold a JSON object")
    return config


def _effective(args: argparse.Namespace, config: dict, key: str, default: Any = None) -> Any:
    value = getattr(args, key, None)
    if value is not None:
        return value
    if key in config:
        return config[key]
    return default


def _require_file(path: Any, what: str) -> Path:
    if not path:
        raise ValidationFailure(f"missing required path for {what}")
    candidate = Path(path)
    if not candidate.is_file():
        raise ValidationFailure(f"{what} not found: {candidate}")
    return candidate


def _read_clean_corpus(path: Path, default_stars: int = 3) -> list[Review]:
    reviews = []
    for record in read_records(path):
        try:
            reviews.append(
                Review(
                    id=str(record["id"]) if "id" in record else str(record["source_id"]),
                    stars=int(record.get("stars", default_stars)),
                    text=str(record["text"]),
                )
            )
        except (KeyError, TypeError, CorpusError) as exc:
            raise ValidationFailure(f"{path}: bad corpus record {record!r} ({exc})") from exc
    if not reviews:
        raise ValidationFailure(f"{path}: no records")
    return reviews


def _stopwords(args: argparse.Namespace, config: dict) -> frozenset[str]:
    path = _effective(args, config, "stopwords")
    if path:
        return load_stopwords(_require_file(path, "stopword list"))
    return DEFAULT_STOPWORDS


def _lexicon(args: argparse.Namespace, config: dict):
    directory = _effective(args, config, "wordnet", os.environ.get("GENAUG_WORDNET_DIR"))
    if not directory:
        raise ValidationFailure(
            "no lexicon directory: pass --wordnet or set GENAUG_WORDNET_DIR"
        )
    if not Path(directory).is_dir():
        raise ValidationFailure(f"lexicon directory not found: {directory}")
    return load_lexicon_dir(directory)


# ---------------------------------------------------------------------------
# subcommands


def cmd_ingest(args: argparse.Namespace, config: dict) -> int:
    src = _require_file(_effective(args, config, "in_path"), "input corpus")
    out_path = _effective(args, config, "out_path")
    if not out_path:
        raise ValidationFailure("missing --out")
    seed = int(_effective(args, config, "seed", 0))
    cleaned: list[dict] = []
    rejected: list[dict] = []
    for record in read_records(src):
        rid = str(record.get("id", len(cleaned) + len(rejected)))
        result = preprocess_review(
            str(record.get("text", "")), record.get("stars"), review_id=rid
        )
        if isinstance(result, Rejection):
            rejected.append({"id": rid, "reason": result.reason})
            continue
        if len(result.tokens) < 2:
            rejected.append({"id": rid, "reason": "too_short"})
            continue
        parts = split_review(result)
        cleaned.append(
            {
                "id": result.id,
                "stars": result.stars,
                "text": result.text,
                "prompt": " ".join(parts.prompt),
                "continuation": " ".join(parts.continuation),
            }
        )
    header_config = {"command": "ingest", "in": str(src), "seed": seed}
    write_records(out_path, cleaned, make_header(header_config, seed))
    rejects_path = _effective(args, config, "rejects")
    if rejects_path:
        write_records(rejects_path, rejected, make_header(header_config, seed))
    reasons: dict[str, int] = {}
    for item in rejected:
        reasons[item["reason"]] = reasons.get(item["reason"], 0) + 1
    _log(args, "ingest", accepted=len(cleaned), rejected=reasons)
    print(json.dumps({"accepted": len(cleaned), "rejected": reasons}, sort_keys=True))
    return 0


_MIX_STATE: dict[str, Any] = {}


def _pool_worker(task: tuple[int, str]) -> tuple[int, list[dict]]:
    index, method = task
    review = _MIX_STATE["corpus"][index]
    records = _MIX_STATE["provider"](review, method)
    return index, [r.to_json() for r in records]


def _build_pools_parallel(
    corpus: list[Review], assignment: dict[str, str], provider, jobs: int
) -> aug.PoolProvider:
    tasks = [(i, assignment[review.id]) for i, review in enumerate(corpus)]
    _MIX_STATE["corpus"] = corpus
    _MIX_STATE["provider"] = provider
    context = multiprocessing.get_context("fork")
    with context.Pool(processes=jobs) as pool:
        results = pool.map(_pool_worker, tasks)
    by_id: dict[tuple[str, str], list[aug.AugmentationRecord]] = {}
    for (index, method), (_, dicts) in zip(tasks, results):
        review = corpus[index]
        by_id[(review.id, method)] = [
            aug.AugmentationRecord(
                source_id=d["source_id"],
                method=d["method"],
                params=d["params"],
                variant_index=d["variant_index"],
                text=d["text"],
            )
            for d in dicts
        ]
    return lambda review, method: by_id[(review.id, method)]


def _standard_provider(corpus, lex, stopwords, seed):
    model = train_ngram(corpus)
    fill = ste_mod.NgramFill(model)
    re_pool = tuple(
        ste_mod.re_pool_from_corpus(corpus, lex, derive_rng(seed, "re-pool"))
    )
    if not re_pool:
        raise ValidationFailure(
            "the corpus yields no nouns for the replacement-entity pool; "
            "check that the lexicon matches the corpus language"
        )

    def ste_fn(review: Review) -> list[aug.AugmentationRecord]:
        return ste_mod.ste_variants(review, re_pool, lex, fill, seed)

    return aug.make_pool_provider(lex, ste_fn, seed, stopwords=stopwords)


def cmd_mix(args: argparse.Namespace, config: dict) -> int:
    src = _require_file(_effective(args, config, "in_path"), "input corpus")
    out_path = _effective(args, config, "out_path")
    if not out_path:
        raise ValidationFailure("missing --out")
    amount = _effective(args, config, "amount")
    if amount not in aug.AMOUNTS:
        raise ValidationFailure(f"--amount must be one of {aug.AMOUNTS}")
    seed = int(_effective(args, config, "seed", 0))
    jobs = int(_effective(args, config, "jobs", 1))
    stopwords = _stopwords(args, config)
    lex = _lexicon(args, config)
    corpus = _read_clean_corpus(src)
    provider = _standard_provider(corpus, lex, stopwords, seed)
    if jobs > 1:
        assignment = aug.assign_methods([r.id for r in corpus], seed)
        provider = _build_pools_parallel(corpus, assignment, provider, jobs)
    records = aug.build_mix(corpus, amount, provider, seed)
    header_config = {"command": "mix", "in": str(src), "amount": amount, "seed": seed}
    write_records(out_path, [r.to_json() for r in records], make_header(header_config, seed))
    _log(args, "mix", amount=amount, records=len(records))
    print(json.dumps({"records": len(records), "amount": amount}, sort_keys=True))
    return 0


_METHOD_CHOICES = ("swap", "insert", "delete", "noise", "ste", "keyword")

_AUG_STATE: dict[str, Any] = {}


def _augment_one(index: int) -> dict | None:
    state = _AUG_STATE
    review: Review = state["corpus"][index]
    method: str = state["method"]
    seed: int = state["seed"]
    pick_rng = derive_rng(seed, review.id, "augment-pick", method)
    if method in ("swap", "insert", "delete"):
        alpha = state["alpha"] if state["alpha"] is not None else choice(pick_rng, list(aug.TRIO_ALPHAS))
        rng = derive_rng(seed, review.id, method, alpha)
        tokens, warned = aug.random_trio(
            review.tokens, alpha, method, state["lex"], rng, stopwords=state["stopwords"]
        )
        params: dict[str, Any] = {"alpha": alpha}
        if warned:
            params["warned"] = "no_synonym_available"
        return aug.AugmentationRecord(
            source_id=review.id,
            method=method,
            params=params,
            variant_index=aug.TRIO_ALPHAS.index(alpha) + 1 if alpha in aug.TRIO_ALPHAS else 0,
            text=" ".join(tokens),
        ).to_json()
    if method == "noise":
        level = state["level"] if state["level"] is not None else choice(pick_rng, list(aug.NOISE_LEVELS))
        return aug.noise_variant(review, level, seed).to_json()
    if method == "ste":
        mrt = state["mrt"] if state["mrt"] is not None else choice(pick_rng, list(ste_mod.STE_MRTS))
        config = ste_mod.SteConfig(mrt=mrt, re_pool=state["re_pool"], seed=seed)
        text = ste_mod.ste_review(review, config, state["lex"], state["fill"])
        return aug.AugmentationRecord(
            source_id=review.id, method="ste", params={"mrt": mrt},
            variant_index=ste_mod.STE_MRTS.index(mrt) + 1 if mrt in ste_mod.STE_MRTS else 0,
            text=text,
        ).to_json()
    rng = derive_rng(seed, review.id, state["mode"])
    pool = aug.replace_keywords(
        review, state["mode"], state["lex"], rng, stopwords=state["stopwords"]
    )
    if not pool:
        return None
    return choice(pick_rng, pool).to_json()


def _forked_map(worker, count: int, jobs: int) -> list:
    """Map over range(count), in order; fork pool when jobs > 1."""
    if jobs > 1 and count > 1:
        context = multiprocessing.get_context("fork")
        with context.Pool(processes=jobs) as pool:
            return pool.map(worker, range(count))
    return [worker(i) for i in range(count)]


def cmd_augment(args: argparse.Namespace, config: dict) -> int:
    src = _require_file(_effective(args, config, "in_path"), "input corpus")
    out_path = _effective(args, config, "out_path")
    if not out_path:
        raise ValidationFailure("missing --out")
    method = _effective(args, config, "method")
    if method not in _METHOD_CHOICES:
        raise ValidationFailure(f"--method must be one of {_METHOD_CHOICES}")
    mode = _effective(args, config, "mode")
    if method == "keyword":
        if mode not in ("syn", "hypo", "hyper"):
            raise ValidationFailure("--method keyword requires --mode {syn,hypo,hyper}")
        mode = f"wn_{mode}"
    seed = int(_effective(args, config, "seed", 0))
    jobs = int(_effective(args, config, "jobs", 1))
    corpus = _read_clean_corpus(src)
    lex = None
    if method in ("insert", "ste", "keyword"):
        lex = _lexicon(args, config)

    alpha_flag = _effective(args, config, "alpha")
    level_flag = _effective(args, config, "noise_level")
    mrt_flag = _effective(args, config, "mrt")

    _AUG_STATE.clear()
    _AUG_STATE.update(
        corpus=corpus,
        method=method,
        mode=mode,
        seed=seed,
        lex=lex,
        stopwords=_stopwords(args, config),
        alpha=float(alpha_flag) if alpha_flag is not None else None,
        level=float(level_flag) if level_flag is not None else None,
        mrt=float(mrt_flag) if mrt_flag is not None else None,
        re_pool=(),
        fill=None,
    )
    if method == "ste":
        model = train_ngram(corpus)
        re_pool = tuple(ste_mod.re_pool_from_corpus(corpus, lex, derive_rng(seed, "re-pool")))
        if not re_pool:
            raise ValidationFailure("no nouns available for the replacement-entity pool")
        _AUG_STATE.update(re_pool=re_pool, fill=ste_mod.NgramFill(model))

    results = _forked_map(_augment_one, len(corpus), jobs)
    records = [r for r in results if r is not None]
    skipped = len(results) - len(records)

    header_config = {
        "command": "augment", "in": str(src), "method": method, "mode": mode,
        "seed": seed,
    }
    write_records(out_path, records, make_header(header_config, seed))
    _log(args, "augment", method=method, records=len(records), skipped=skipped)
    print(json.dumps({"records": len(records), "skipped": skipped}, sort_keys=True))
    return 0


def cmd_train_lm(args: argparse.Namespace, config: dict) -> int:
    src = _require_file(_effective(args, config, "in_path"), "training corpus")
    out_path = _effective(args, config, "out_path")
    if not out_path:
        raise ValidationFailure("missing --out")
    seed = int(_effective(args, config, "seed", 0))
    order = int(_effective(args, config, "order", 3))
    discount = float(_effective(args, config, "discount", 0.75))
    corpus = _read_clean_corpus(src)
    model = train_ngram(corpus, order=order, discount=discount)
    save_model(model, out_path, seed=seed)
    _log(args, "train-lm", order=order, vocab=len(model.vocab) - 1)
    print(json.dumps({"order": order, "vocab": len(model.vocab) - 1}, sort_keys=True))
    return 0


def cmd_evaluate(args: argparse.Namespace, config: dict) -> int:
    batches_path = _require_file(_effective(args, config, "batches"), "generation batches")
    table_path = _require_file(_effective(args, config, "table"), "table corpus")
    out_path = _effective(args, config, "out_path")
    if not out_path:
        raise ValidationFailure("missing --out")
    seed = int(_effective(args, config, "seed", 0))

    table_corpus = _read_clean_corpus(table_path)
    table = build_unigram_table(table_corpus)
    truths_path = _effective(args, config, "truths")
    truths = _read_clean_corpus(_require_file(truths_path, "truth corpus")) if truths_path else table_corpus

    batches = []
    for record in read_records(batches_path):
        try:
            batches.append(
                GenerationBatch.from_raw(
                    str(record["prompt_id"]), [str(c) for c in record["continuations"]]
                )
            )
        except (KeyError, TypeError) as exc:
            raise ValidationFailure(f"{batches_path}: bad batch record ({exc})") from exc

    logprobs = None
    scores_path = _effective(args, config, "scores")
    lm_path = _effective(args, config, "lm")
    if scores_path:
        logprobs = FileScores(load_score_file(_require_file(scores_path, "score file")))
    elif lm_path:
        logprobs = ModelScores(load_model(_require_file(lm_path, "language model")))

    dict_path = _effective(args, config, "dictionary")
    if dict_path:
        words = load_dictionary(_require_file(dict_path, "dictionary"))
    else:
        words = sorted({c for w in table.word_counts for c in [token_core(w)] if c})
    spell_index = build_spell_index(words)

    emb_path = _effective(args, config, "embeddings")
    similarity = load_embeddings(_require_file(emb_path, "embedding file")) if emb_path else ExactMatchSimilarity()

    sent_path = _effective(args, config, "sentiment")
    sentiment = FileSentiment.from_file(_require_file(sent_path, "sentiment file")) if sent_path else LexiconSentiment()

    result = build_report(
        batches, truths, table,
        logprobs=logprobs, spell_index=spell_index,
        similarity=similarity, sentiment=sentiment,
        jobs=int(_effective(args, config, "jobs", 1)),
    )
    header_config = {
        "command": "evaluate",
        "batches": str(batches_path),
        "table": str(table_path),
        "seed": seed,
        "generation_protocol": GENERATION_PROTOCOL,
    }
    header = make_header(header_config, seed)
    header["generation_protocol"] = GENERATION_PROTOCOL
    payload = {"header": header, **result}
    with open(out_path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, ensure_ascii=False, sort_keys=True, indent=1)
        handle.write("\n")
    _log(args, "evaluate", batches=len(batches), blanks=result["counts"]["blanks"])
    fmt = _effective(args, config, "format", "json")
    _print_aggregates(payload, fmt)
    return 0


def _print_aggregates(report_payload: dict, fmt: str) -> None:
    aggregates = report_payload.get("aggregates", {})
    counts = report_payload.get("counts", {})
    if fmt == "tsv":
        for key in sorted(aggregates):
            value = aggregates[key]
            print(f"{key}\t{'' if value is None else value}")
        for key in sorted(counts):
            print(f"count:{key}\t{counts[key]}")
    else:
        print(json.dumps({"aggregates": aggregates, "counts": counts}, sort_keys=True))


def cmd_report(args: argparse.Namespace, config: dict) -> int:
    src = _require_file(_effective(args, config, "in_path"), "report file")
    with open(src, encoding="utf-8") as handle:
        payload = json.load(handle)
    _print_aggregates(payload, _effective(args, config, "format", "json"))
    return 0


def _load_series(path: Path, metric: str | None) -> list[float]:
    with open(path, encoding="utf-8") as handle:
        payload = json.load(handle)
    if isinstance(payload, list):
        return [float(v) for v in payload]
    if metric is None:
        raise ValidationFailure(f"{path} is a report; pass --metric to pick a series")
    detail = payload.get("detail", {})
    rows = detail.get("per_continuation", []) + detail.get("per_batch", [])
    values = [float(row[metric]) for row in rows if metric in row]
    if not values:
        raise ValidationFailure(f"{path}: no values for metric {metric!r}")
    return values


def cmd_ttest(args: argparse.Namespace, config: dict) -> int:
    a = _load_series(_require_file(_effective(args, config, "a"), "--a"), args.metric)
    b = _load_series(_require_file(_effective(args, config, "b"), "--b"), args.metric)
    if len(a) != len(b):
        raise ValidationFailure(f"series lengths differ: {len(a)} vs {len(b)}")
    t, p = paired_ttest(a, b)
    print(json.dumps({"t": t, "p": p, "n": len(a), "alpha": 0.05,
                      "significant": bool(p < 0.05)}, sort_keys=True))
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="genaug",
        description="Corpus augmentation and generation-evaluation toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="JSON config file with flag defaults")
        p.add_argument("--seed", type=int, help="random seed (default 0)")
        p.add_argument("--jobs", type=int, help="worker processes (default 1)")
        p.add_argument("--log-json", action="store_true", dest="log_json",
                       help="emit structured JSON logs on stderr")

    p = sub.add_parser("ingest", help="clean, filter, and split raw reviews")
    p.add_argument("--in", dest="in_path", help="raw corpus JSONL")
    p.add_argument("--out", dest="out_path", help="cleaned corpus JSONL")
    p.add_argument("--rejects", help="rejection report JSONL")
    common(p)

    p = sub.add_parser("augment", help="one augmentation variant per review")
    p.add_argument("--in", dest="in_path", help="cleaned corpus JSONL")
    p.add_argument("--out", dest="out_path", help="augmentation records JSONL")
    p.add_argument("--method", choices=_METHOD_CHOICES)
    p.add_argument("--mode", choices=("syn", "hypo", "hyper"),
                   help="keyword replacement relation")
    p.add_argument("--alpha", type=float, help="edit fraction for swap/insert/delete")
    p.add_argument("--noise-level", dest="noise_level", type=float)
    p.add_argument("--mrt", type=float, help="masking rate threshold")
    p.add_argument("--wordnet", help="lexicon directory (or GENAUG_WORDNET_DIR)")
    p.add_argument("--stopwords", help="stopword list, one word per line")
    common(p)

    p = sub.add_parser("mix", help="mixed augmentation dataset (1.5x-4x)")
    p.add_argument("--in", dest="in_path", help="cleaned corpus JSONL")
    p.add_argument("--out", dest="out_path", help="augmentation records JSONL")
    p.add_argument("--amount", choices=aug.AMOUNTS)
    p.add_argument("--wordnet", help="lexicon directory (or GENAUG_WORDNET_DIR)")
    p.add_argument("--stopwords", help="stopword list, one word per line")
    common(p)

    p = sub.add_parser("train-lm", help="train the n-gram evaluation model")
    p.add_argument("--in", dest="in_path", help="training corpus JSONL")
    p.add_argument("--out", dest="out_path", help="model JSON path")
    p.add_argument("--order", type=int, help="model order (default 3)")
    p.add_argument("--discount", type=float, help="absolute discount (default 0.75)")
    common(p)

    p = sub.add_parser("evaluate", help="compute all metrics for generation batches")
    p.add_argument("--batches", help="generation batches JSONL")
    p.add_argument("--table", help="corpus JSONL for the unigram table")
    p.add_argument("--truths", help="test corpus JSONL (defaults to --table)")
    p.add_argument("--lm", help="trained model JSON")
    p.add_argument("--scores", help="external per-token log-probability JSONL")
    p.add_argument("--dictionary", help="spell-check dictionary, one word per line")
    p.add_argument("--embeddings", help="token-vector JSONL for soft matching")
    p.add_argument("--sentiment", help="id-keyed sentiment score JSONL")
    p.add_argument("--out", dest="out_path", help="report JSON path")
    p.add_argument("--format", choices=("json", "tsv"), help="stdout summary format")
    common(p)

    p = sub.add_parser("report", help="print the aggregate block of a report")
    p.add_argument("--in", dest="in_path", help="report JSON")
    p.add_argument("--format", choices=("json", "tsv"))
    common(p)

    p = sub.add_parser("ttest", help="paired two-tailed t-test between two series")
    p.add_argument("--a", help="JSON array or report JSON")
    p.add_argument("--b", help="JSON array or report JSON")
    p.add_argument("--metric", help="metric name when inputs are reports")
    common(p)

    return parser


_HANDLERS = {
    "ingest": cmd_ingest,
    "augment": cmd_augment,
    "mix": cmd_mix,
    "train-lm": cmd_train_lm,
    "evaluate": cmd_evaluate,
    "report": cmd_report,
    "ttest": cmd_ttest,
}


def _emit_error(kind: str, message: str) -> None:
    print(json.dumps({"error": {"type": kind, "message": message}}), file=sys.stderr)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        if exc.code in (None, 0):
            return 0
        _emit_error("validation", "invalid arguments")
        return 1
    try:
        config = _load_config_file(getattr(args, "config", None))
        return _HANDLERS[args.command](args, config)
    except ValidationFailure as exc:
        _emit_error("validation", str(exc))
        return 1
    except _INPUT_ERRORS as exc:
        _emit_error("validation", f"{type(exc).__name__}: {exc}")
        return 1
    except Exception as exc:  # pragma: no cover - defensive
        _emit_error("runtime", f"{type(exc).__name__}: {exc}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
