"""Corpus augmentation and generation-evaluation toolkit."""

from .corpus import (
    BLANK_MARKER,
    GenerationBatch,
    Rejection,
    Review,
    SplitReview,
    UnigramTable,
    build_unigram_table,
    postprocess_continuation,
    preprocess_review,
    split_review,
)
from .jsonl import TOOL_VERSION as __version__

__all__ = [
    "BLANK_MARKER",
    "GenerationBatch",
    "Rejection",
    "Review",
    "SplitReview",
    "UnigramTable",
    "build_unigram_table",
    "postprocess_continuation",
    "preprocess_review",
    "split_review",
    "__version__",
]
