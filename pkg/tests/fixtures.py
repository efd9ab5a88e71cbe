"""Synthetic review corpora matched to the fixture lexicon."""

from __future__ import annotations

import numpy as np

DISHES = [
    "pizza", "burger", "salad", "soup", "pasta", "steak",
    "sushi", "taco", "sandwich", "waffle", "coffee", "dessert",
]
PLACES = ["restaurant", "cafe", "diner", "bakery", "bistro"]
PEOPLE = ["waiter", "cook", "manager", "owner", "server", "chef"]
QUALITIES = ["service", "flavor", "price", "portion", "atmosphere"]
ADJS = ["tasty", "friendly", "fresh", "slow", "clean", "cozy", "crowded", "generous"]
VERBS = ["order", "visit", "enjoy", "recommend", "wait", "serve", "eat", "drink"]
ADVS = ["quickly", "really", "again"]

_TEMPLATES = [
    "the {adj} {dish} at this {place} was {adj2} and i will {verb} it {adv}",
    "we had to {verb} for the {dish} but the {person} was {adj} about it",
    "my {person} said the {quality} here is {adj} so we {verb} the {dish} {adv}",
    "this {place} has {adj} {quality} and the {dish2} tasted {adj2} to me",
    "i {verb} the {dish} every week because the {person} keeps the {place} {adj}",
]


def make_review_text(rng: np.random.Generator, min_tokens: int = 28, max_tokens: int = 70) -> str:
    target = int(rng.integers(min_tokens, max_tokens + 1))
    pieces: list[str] = []
    while len(pieces) < target:
        template = _TEMPLATES[int(rng.integers(0, len(_TEMPLATES)))]
        sentence = template.format(
            dish=DISHES[int(rng.integers(0, len(DISHES)))],
            dish2=DISHES[int(rng.integers(0, len(DISHES)))],
            place=PLACES[int(rng.integers(0, len(PLACES)))],
            person=PEOPLE[int(rng.integers(0, len(PEOPLE)))],
            quality=QUALITIES[int(rng.integers(0, len(QUALITIES)))],
            adj=ADJS[int(rng.integers(0, len(ADJS)))],
            adj2=ADJS[int(rng.integers(0, len(ADJS)))],
            verb=VERBS[int(rng.integers(0, len(VERBS)))],
            adv=ADVS[int(rng.integers(0, len(ADVS)))],
        )
        pieces.extend((sentence + " .").split())
    return " ".join(pieces[:target])


def make_raw_corpus(n: int, seed: int = 0, **kwargs) -> list[dict]:
    rng = np.random.default_rng(seed)
    return [
        {
            "id": f"r{i:05d}",
            "stars": int(rng.integers(1, 6)),
            "text": make_review_text(rng, **kwargs),
        }
        for i in range(n)
    ]


def random_words(rng: np.random.Generator, count: int, min_len: int = 3, max_len: int = 9) -> list[str]:
    alphabet = "abcdefghijklmnopqrstuvwxyz"
    words = set()
    while len(words) < count:
        length = int(rng.integers(min_len, max_len + 1))
        words.add("".join(alphabet[int(rng.integers(0, 26))] for _ in range(length)))
    return sorted(words)
