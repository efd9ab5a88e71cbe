"""Built-in English stopword list.

Fifty high-frequency function words.  Serves two roles: the default
stopword set for keyword extraction and random-insertion eligibility, and
the evidence list for the cheap English-text heuristic in preprocessing.
Callers can substitute their own set (one word per line, UTF-8) anywhere a
stopword set is accepted.
"""

from __future__ import annotations

from pathlib import Path

DEFAULT_STOPWORDS: frozenset[str] = frozenset(
    {
        "the", "of", "and", "a", "to", "in", "is", "you", "that", "it",
        "he", "she", "was", "for", "on", "are", "as", "with", "his", "her",
        "they", "i", "at", "be", "this", "have", "from", "or", "one", "had",
        "by", "not", "but", "what", "all", "were", "we", "when", "your",
        "can", "said", "there", "an", "which", "do", "if", "will", "my",
        "so", "up",
    }
)


def load_stopwords(path: str | Path) -> frozenset[str]:
    """Read a one-word-per-line stopword file."""
    words = set()
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            word = line.strip().lower()
            if word:
                words.add(word)
    return frozenset(words)
