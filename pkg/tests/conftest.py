from __future__ import annotations

import pytest

from genaug.corpus import Review, preprocess_review
from genaug.wordnet import load_lexicon_dir

from fixtures import make_raw_corpus
from wn_fixtures import write_restaurant_lexicon


@pytest.fixture(scope="session")
def lex_dir(tmp_path_factory):
    return write_restaurant_lexicon(tmp_path_factory.mktemp("wordnet"))


@pytest.fixture(scope="session")
def lex(lex_dir):
    return load_lexicon_dir(lex_dir)


@pytest.fixture(scope="session")
def make_clean_reviews():
    cache: dict[tuple[int, int], list[Review]] = {}

    def _make(n: int, seed: int = 0) -> list[Review]:
        key = (n, seed)
        if key not in cache:
            reviews = []
            for raw in make_raw_corpus(n, seed):
                result = preprocess_review(raw["text"], raw["stars"], review_id=raw["id"])
                assert isinstance(result, Review), f"fixture review rejected: {result}"
                reviews.append(result)
            cache[key] = reviews
        return cache[key]

    return _make
