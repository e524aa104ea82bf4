"""Shared fixtures: a deterministic toy corpus with invented restricted words.

The restricted vocabulary is pure nonsense (sci-fi expletives) so the
repository contains no actual offensive text.  Clean sentences are
assembled from small word banks the built-in tagger knows, keeping POS
tags stable and retrieval/generation well-exercised.
"""

from __future__ import annotations

import random
from pathlib import Path
from typing import List, Sequence, Tuple

import pytest

from redactor.corpus import LabeledSentence, RestrictedVocab, label_for
from redactor.lm import NgramMaskFiller, NgramModel, train_ngram
from redactor.postag import BuiltinTagger, TaggedSentence, substitute_bw, tag_sentence
from redactor.retrieve import PosIndex, build_index

RESTRICTED_WORDS: Tuple[str, ...] = (
    "frak", "smeg", "gorram", "frell", "dren", "zark", "shazbot", "felgercarb",
    "mickfig", "blurg", "taural", "veck", "skroll", "narf", "drokk", "funt",
    "spla", "gruntle", "zorp", "quib", "vortle", "snarf", "bloit", "crunge",
)

DETS = ("the", "a", "my", "this", "every", "some")
NOUNS = (
    "dog", "cat", "bird", "friend", "clown", "house", "tree", "car", "book",
    "night", "road", "door", "city", "child", "game", "girl", "boy", "man",
)
VERBS = (
    "runs", "walks", "sings", "eats", "barks", "reads", "plays", "works",
    "talks", "waits", "stops", "jumps", "looks", "turns", "helps", "calls",
)
ADJS = (
    "loud", "fast", "old", "busy", "cold", "dumb", "early", "small", "happy",
    "green", "dark", "quiet", "angry", "strange", "tiny", "proud",
)
ADVS = ("never", "now", "here", "always", "often", "slowly", "today", "again")

_TEMPLATES: Tuple[Tuple[str, ...], ...] = (
    ("DET", "NOUN", "VERB", "ADV", "ADP", "DET", "NOUN"),
    ("DET", "ADJ", "NOUN", "VERB", "ADV"),
    ("DET", "NOUN", "VERB", "DET", "ADJ", "NOUN"),
    ("DET", "NOUN", "ADV", "VERB", "DET", "NOUN", "ADV"),
    ("DET", "ADJ", "NOUN", "VERB", "DET", "ADJ", "NOUN"),
    ("DET", "NOUN", "VERB", "ADP", "DET", "NOUN", "ADV"),
)
_ADPS = ("at", "near", "behind", "under", "by", "with")

_BANKS = {"DET": DETS, "NOUN": NOUNS, "VERB": VERBS, "ADJ": ADJS,
          "ADV": ADVS, "ADP": _ADPS}


def make_clean_sentence(rng: random.Random) -> List[str]:
    template = rng.choice(_TEMPLATES)
    return [rng.choice(_BANKS[slot]) for slot in template]


def make_offensive_sentence(rng: random.Random) -> List[str]:
    """A clean sentence with one content word swapped for a restricted one."""
    tokens = make_clean_sentence(rng)
    content = [i for i, t in enumerate(tokens) if t in NOUNS or t in ADJS]
    tokens[rng.choice(content)] = rng.choice(RESTRICTED_WORDS)
    return tokens


def desk_corpus(n_clean: int, n_offensive: int, seed: int = 0
                ) -> Tuple[List[List[str]], List[List[str]]]:
    rng = random.Random(seed)
    clean = [make_clean_sentence(rng) for _ in range(n_clean)]
    offensive = [make_offensive_sentence(rng) for _ in range(n_offensive)]
    return clean, offensive


def as_labeled(token_lists: Sequence[Sequence[str]], vocab: RestrictedVocab,
               prefix: str = "s") -> List[LabeledSentence]:
    return [
        LabeledSentence(f"{prefix}{i:06d}", tuple(toks), label_for(tuple(toks), vocab))
        for i, toks in enumerate(token_lists)
    ]


def write_embeddings(path: Path, words: Sequence[str], dim: int = 8,
                     seed: int = 11) -> Path:
    """Deterministic toy word vectors, one `word v1 .. vd` line each."""
    rng = random.Random(seed)
    lines = []
    for word in sorted(set(words)):
        vec = [round(rng.uniform(-1.0, 1.0), 6) for _ in range(dim)]
        lines.append(word + " " + " ".join(str(v) for v in vec))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


@pytest.fixture(scope="session")
def vocab() -> RestrictedVocab:
    return RestrictedVocab(RESTRICTED_WORDS)


@pytest.fixture(scope="session")
def tagger() -> BuiltinTagger:
    return BuiltinTagger()


@pytest.fixture(scope="session")
def desk_clean(vocab, tagger) -> List[TaggedSentence]:
    clean, _ = desk_corpus(300, 0, seed=101)
    labeled = as_labeled(clean, vocab, prefix="c")
    return [substitute_bw(tag_sentence(s, tagger), vocab) for s in labeled]


@pytest.fixture(scope="session")
def desk_offensive(vocab) -> List[LabeledSentence]:
    _, offensive = desk_corpus(0, 120, seed=202)
    return as_labeled(offensive, vocab, prefix="o")


@pytest.fixture(scope="session")
def desk_index(desk_clean) -> PosIndex:
    return build_index([t.pos_sequence for t in desk_clean])


@pytest.fixture(scope="session")
def desk_lm(desk_clean) -> NgramModel:
    return train_ngram([list(t.tokens) for t in desk_clean], order=3)


@pytest.fixture(scope="session")
def desk_filler(desk_lm) -> NgramMaskFiller:
    return NgramMaskFiller(desk_lm, pool_size=2000)
