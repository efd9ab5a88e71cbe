"""Parser and query layer for WordNet 3.x plain-text database files.

Reads the standard ``index.pos`` / ``data.pos`` column layout (space
delimited, hexadecimal word counts, license header lines indented with
spaces).  Only the hypernym ``@`` and hyponym ``~`` pointer relations are
retained; everything else in the files is ignored.

Sense selection is always the first-listed synset in the index, WordNet's
most frequent sense.  Lookups are case-insensitive and use underscores for
multiword lemmas; query results convert underscores back to spaces.
"""

from __future__ import annotations

import string
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable

from .jsonl import read_records


class PosTag(str, Enum):
    NOUN = "noun"
    VERB = "verb"
    ADJECTIVE = "adjective"
    ADVERB = "adverb"
    OTHER = "other"


REPLACEABLE_TAGS = (PosTag.NOUN, PosTag.VERB, PosTag.ADJECTIVE, PosTag.ADVERB)

# File-name suffix -> POS; data-file ss_type letter -> POS.
_SUFFIX_POS = {"noun": PosTag.NOUN, "verb": PosTag.VERB, "adj": PosTag.ADJECTIVE, "adv": PosTag.ADVERB}
_LETTER_POS = {
    "n": PosTag.NOUN,
    "v": PosTag.VERB,
    "a": PosTag.ADJECTIVE,
    "s": PosTag.ADJECTIVE,  # satellite adjectives live in data.adj
    "r": PosTag.ADVERB,
}

_STRIP_CHARS = string.punctuation + "‘’“”–—"


class LexiconError(ValueError):
    pass


SynsetKey = tuple[PosTag, int]


@dataclass(frozen=True)
class Synset:
    offset: int
    pos: PosTag
    lemmas: tuple[str, ...]
    hypernym_ids: tuple[SynsetKey, ...] = ()
    hyponym_ids: tuple[SynsetKey, ...] = ()


@dataclass
class LexDatabase:
    synsets: dict[SynsetKey, Synset] = field(default_factory=dict)
    index: dict[tuple[str, PosTag], tuple[int, ...]] = field(default_factory=dict)
    _distance_cache: dict[tuple[int, int], int | None] = field(default_factory=dict, repr=False)

    def synsets_for(self, word: str, pos: PosTag) -> list[Synset]:
        key = (normalize_lemma(word), pos)
        offsets = self.index.get(key, ())
        return [self.synsets[(pos, off)] for off in offsets if (pos, off) in self.synsets]

    def first_synset(self, word: str, pos: PosTag) -> Synset | None:
        senses = self.synsets_for(word, pos)
        return senses[0] if senses else None

    def has_word(self, word: str, pos: PosTag) -> bool:
        return (normalize_lemma(word), pos) in self.index


def normalize_lemma(word: str) -> str:
    return word.strip().lower().replace(" ", "_")


def token_core(token: str) -> str:
    """Lowercased token with surrounding punctuation removed."""
    return token.strip(_STRIP_CHARS).lower()


def replace_core(token: str, replacement: str) -> str:
    """Swap a token's core word, keeping surrounding punctuation and title case."""
    stripped = token.strip(_STRIP_CHARS)
    if not stripped:
        return token
    lead = len(token) - len(token.lstrip(_STRIP_CHARS))
    trail = len(token) - len(token.rstrip(_STRIP_CHARS))
    if stripped[0].isupper():
        replacement = replacement[:1].upper() + replacement[1:]
    return token[:lead] + replacement + token[len(token) - trail :]


def _classify_path(path: Path) -> tuple[str, PosTag]:
    name = path.name.lower()
    for kind in ("index", "data"):
        for suffix, pos in _SUFFIX_POS.items():
            if name == f"{kind}.{suffix}":
                return kind, pos
    raise LexiconError(f"{path}: not a recognized index.pos/data.pos file name")


def _parse_data_line(path: Path, lineno: int, line: str, pos: PosTag) -> Synset:
    fields = line.split()
    try:
        offset = int(fields[0])
        w_cnt = int(fields[3], 16)
        if w_cnt < 1:
            raise ValueError("word count is zero")
        words = []
        for i in range(w_cnt):
            word = fields[4 + 2 * i]
            # adjectives carry syntactic markers like "galore(ip)"
            if word.endswith(")") and "(" in word:
                word = word[: word.index("(")]
            words.append(word.lower())
        p_base = 4 + 2 * w_cnt
        p_cnt = int(fields[p_base])
        hypernyms = []
        hyponyms = []
        for i in range(p_cnt):
            sym = fields[p_base + 1 + 4 * i]
            target_offset = int(fields[p_base + 2 + 4 * i])
            target_pos = _LETTER_POS[fields[p_base + 3 + 4 * i]]
            int(fields[p_base + 4 + 4 * i], 16)  # source/target field must parse
            if sym == "@":
                hypernyms.append((target_pos, target_offset))
            elif sym == "~":
                hyponyms.append((target_pos, target_offset))
    except (IndexError, ValueError, KeyError) as exc:
        raise LexiconError(f"{path}:{lineno}: malformed data line ({exc})") from exc
    return Synset(
        offset=offset,
        pos=pos,
        lemmas=tuple(words),
        hypernym_ids=tuple(hypernyms),
        hyponym_ids=tuple(hyponyms),
    )


def _parse_index_line(path: Path, lineno: int, line: str) -> tuple[str, PosTag, tuple[int, ...]]:
    fields = line.split()
    try:
        lemma = fields[0].lower()
        pos = _LETTER_POS[fields[1]]
        synset_cnt = int(fields[2])
        p_cnt = int(fields[3])
        offsets_start = 4 + p_cnt + 2  # skip pointer symbols, sense_cnt, tagsense_cnt
        offsets = tuple(int(off) for off in fields[offsets_start : offsets_start + synset_cnt])
        if len(offsets) != synset_cnt:
            raise ValueError(f"expected {synset_cnt} offsets, found {len(offsets)}")
    except (IndexError, ValueError, KeyError) as exc:
        raise LexiconError(f"{path}:{lineno}: malformed index line ({exc})") from exc
    return lemma, pos, offsets


def load_lexicon(paths: Iterable[str | Path]) -> LexDatabase:
    """Parse a set of index/data files into an immutable query database."""
    db = LexDatabase()
    sorted_paths = sorted(Path(p) for p in paths)
    if not sorted_paths:
        raise LexiconError("no lexicon files given")
    for path in sorted_paths:
        if not path.exists():
            raise LexiconError(f"{path}: file not found")
        kind, pos = _classify_path(path)
        with open(path, encoding="utf-8") as handle:
            for lineno, line in enumerate(handle, start=1):
                if not line.strip() or line.startswith(" "):
                    continue
                if kind == "data":
                    synset = _parse_data_line(path, lineno, line, pos)
                    db.synsets[(synset.pos, synset.offset)] = synset
                else:
                    lemma, index_pos, offsets = _parse_index_line(path, lineno, line)
                    db.index[(lemma, index_pos)] = offsets
    _validate(db)
    return db


def load_lexicon_dir(directory: str | Path) -> LexDatabase:
    """Load every index.pos/data.pos file found in a WordNet directory."""
    directory = Path(directory)
    names = [f"{kind}.{suffix}" for kind in ("index", "data") for suffix in _SUFFIX_POS]
    paths = [directory / name for name in names if (directory / name).exists()]
    if not paths:
        raise LexiconError(f"{directory}: no index.pos/data.pos files found")
    return load_lexicon(paths)


def _validate(db: LexDatabase) -> None:
    for (lemma, pos), offsets in db.index.items():
        for off in offsets:
            if (pos, off) not in db.synsets:
                raise LexiconError(
                    f"index entry {lemma!r}/{pos.value} points at missing synset {off:08d}"
                )
    for key, synset in db.synsets.items():
        for rel in (synset.hypernym_ids, synset.hyponym_ids):
            for target in rel:
                if target not in db.synsets:
                    raise LexiconError(
                        f"synset {key[1]:08d}/{key[0].value} points at missing synset "
                        f"{target[1]:08d}/{target[0].value}"
                    )


def related_words(
    db: LexDatabase, word: str, pos: PosTag, relation: str
) -> list[str]:
    """Candidate replacements for a word under one lexical relation.

    ``synonym``: co-lemmas of the first-listed synset, the word itself
    excluded.  ``hyponym``: lemmas of all direct hyponym synsets of that
    synset.  ``closest_hypernym``: lemmas of its first direct hypernym
    synset, one level up only.  Unknown words yield an empty list.
    """
    if pos not in REPLACEABLE_TAGS:
        raise ValueError(f"pos must be one of {[t.value for t in REPLACEABLE_TAGS]}")
    sense = db.first_synset(word, pos)
    if sense is None:
        return []
    query = normalize_lemma(word)
    lemmas: list[str] = []
    if relation == "synonym":
        lemmas = [l for l in sense.lemmas if l != query]
    elif relation == "hyponym":
        for target in sense.hyponym_ids:
            lemmas.extend(db.synsets[target].lemmas)
    elif relation == "closest_hypernym":
        if sense.hypernym_ids:
            lemmas = list(db.synsets[sense.hypernym_ids[0]].lemmas)
    else:
        raise ValueError(f"unknown relation {relation!r}")
    seen: set[str] = set()
    out = []
    for lemma in lemmas:
        if lemma not in seen:
            seen.add(lemma)
            out.append(lemma.replace("_", " "))
    return out


def tag_token(db: LexDatabase, token: str, overrides: dict[str, PosTag] | None = None) -> PosTag:
    core = token_core(token)
    if overrides and core in overrides:
        return overrides[core]
    if not core:
        return PosTag.OTHER
    for pos in REPLACEABLE_TAGS:  # noun > verb > adjective > adverb
        if db.has_word(core, pos):
            return pos
    return PosTag.OTHER


def pos_tag(
    tokens: list[str], db: LexDatabase, overrides: dict[str, PosTag] | None = None
) -> list[tuple[str, PosTag]]:
    """Lexicon-priority tagging: first index that knows the word wins."""
    return [(token, tag_token(db, token, overrides)) for token in tokens]


def load_tag_overrides(path: str | Path) -> dict[str, PosTag]:
    """Read a JSONL tag-override file: {"token": str, "pos": str}."""
    overrides: dict[str, PosTag] = {}
    for record in read_records(path):
        try:
            overrides[token_core(str(record["token"]))] = PosTag(record["pos"])
        except (KeyError, ValueError) as exc:
            raise LexiconError(f"{path}: bad override record {record!r} ({exc})") from exc
    return overrides


def synset_distance(db: LexDatabase, a: Synset, b: Synset) -> int | None:
    """Shortest distance between synsets over hypernym/hyponym edges."""
    if a.pos is not b.pos:
        return None
    if a.offset == b.offset:
        return 0
    cache_key = (min(a.offset, b.offset), max(a.offset, b.offset))
    if cache_key in db._distance_cache:
        return db._distance_cache[cache_key]
    # bidirectional BFS; the graphs are shallow but can fan out widely
    frontier_a = {(a.pos, a.offset)}
    frontier_b = {(b.pos, b.offset)}
    seen_a = dict.fromkeys(frontier_a, 0)
    seen_b = dict.fromkeys(frontier_b, 0)
    distance: int | None = None
    for _ in range(64):
        if not frontier_a and not frontier_b:
            break
        if len(frontier_a) > len(frontier_b):
            frontier_a, frontier_b = frontier_b, frontier_a
            seen_a, seen_b = seen_b, seen_a
        next_frontier = set()
        for key in frontier_a:
            synset = db.synsets[key]
            depth = seen_a[key]
            for neighbor in synset.hypernym_ids + synset.hyponym_ids:
                if neighbor in seen_a:
                    continue
                seen_a[neighbor] = depth + 1
                if neighbor in seen_b:
                    total = depth + 1 + seen_b[neighbor]
                    if distance is None or total < distance:
                        distance = total
                next_frontier.add(neighbor)
        frontier_a = next_frontier
        if distance is not None:
            break
    db._distance_cache[cache_key] = distance
    return distance


def noun_similarity(db: LexDatabase, word_a: str, word_b: str) -> float:
    """1/(1+d) over the hypernym graph of first-sense noun synsets.

    Unknown words, non-nouns, and disconnected pairs score 0.
    """
    sense_a = db.first_synset(word_a, PosTag.NOUN)
    sense_b = db.first_synset(word_b, PosTag.NOUN)
    if sense_a is None or sense_b is None:
        return 0.0
    distance = synset_distance(db, sense_a, sense_b)
    if distance is None:
        return 0.0
    return 1.0 / (1.0 + distance)
