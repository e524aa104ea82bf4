"""Corpus ingestion: restricted vocabulary, sentence extraction, labeling, splits.

A sentence is "offensive" exactly when at least one of its tokens, after
lowercasing and stripping leading/trailing non-alphanumeric characters,
is a member of the restricted vocabulary.  Matching is exact per token;
substring hits do not count.
"""

from __future__ import annotations

import json
import math
import random
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple

OFFENSIVE = "offensive"
NON_OFFENSIVE = "non-offensive"

# Sentence boundary: terminal . ! ? followed by whitespace.
_SENT_BOUNDARY = re.compile(r"(?<=[.!?])\s+")

# Terminal punctuation split off whitespace-separated units as one token.
_TERMINAL_PUNCT = re.compile(r"^(.*?)([.,!?;:]+)$")

_NON_ALNUM_EDGE = re.compile(r"^[^0-9a-z]+|[^0-9a-z]+$")


class CorpusError(Exception):
    """Raised for unreadable or malformed corpus inputs."""


class EmptyVocab(CorpusError):
    """Raised when a restricted vocabulary file yields no usable terms."""


def normalize_token(token: str) -> str:
    """Lowercase and strip leading/trailing non-alphanumeric characters."""
    return _NON_ALNUM_EDGE.sub("", token.lower())


class RestrictedVocab:
    """Set of lowercase restricted terms with O(1) membership checks."""

    def __init__(self, terms: Iterable[str]):
        cleaned = []
        for term in terms:
            if term != term.lower():
                raise ValueError(f"restricted term must be lowercase: {term!r}")
            if not term or any(ch.isspace() for ch in term):
                raise ValueError(f"restricted term must be a single non-empty token: {term!r}")
            cleaned.append(term)
        if not cleaned:
            raise EmptyVocab("restricted vocabulary is empty")
        self.terms: frozenset[str] = frozenset(cleaned)

    def __contains__(self, term: str) -> bool:
        return term in self.terms

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self) -> Iterator[str]:
        return iter(sorted(self.terms))


def load_restricted_vocab(path: str | Path) -> RestrictedVocab:
    """Load one term per line, lowercased and trimmed; blank lines are skipped.

    Multi-word lines are skipped (single-token terms only).  Raises
    EmptyVocab if nothing usable remains.
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CorpusError(f"cannot read vocabulary file {path}: {exc}") from exc
    terms = set()
    for line in text.splitlines():
        term = line.strip().lower()
        if not term:
            continue
        if any(ch.isspace() for ch in term):
            continue
        terms.add(term)
    if not terms:
        raise EmptyVocab(f"no usable terms in {path}")
    return RestrictedVocab(terms)


def is_restricted(vocab: RestrictedVocab, token: str) -> bool:
    """True when the normalized token is exactly a restricted term."""
    return normalize_token(token) in vocab


@dataclass(frozen=True)
class LabeledSentence:
    """A tokenized sentence with its binary offensiveness label."""

    id: str
    tokens: Tuple[str, ...]
    label: str

    def to_record(self) -> dict:
        return {"id": self.id, "tokens": list(self.tokens), "label": self.label}


def label_for(tokens: Sequence[str], vocab: RestrictedVocab) -> str:
    return OFFENSIVE if any(is_restricted(vocab, t) for t in tokens) else NON_OFFENSIVE


@dataclass(frozen=True)
class NoiseFilter:
    name: str
    pattern: re.Pattern


def load_noise_filters(path: Optional[str | Path] = None) -> List[NoiseFilter]:
    """Load the drop-sentence regex set; defaults to the bundled config."""
    if path is None:
        raw = resources.files("redactor.data").joinpath("noise_filters.json").read_text("utf-8")
    else:
        raw = Path(path).read_text(encoding="utf-8")
    data = json.loads(raw)
    if data.get("version") != 1:
        raise CorpusError(f"unsupported noise filter config version: {data.get('version')!r}")
    return [
        NoiseFilter(f["name"], re.compile(f["pattern"], re.IGNORECASE))
        for f in data["filters"]
    ]


def tokenize_sentence(sentence: str) -> List[str]:
    """Whitespace tokens with any terminal punctuation run split off."""
    tokens: List[str] = []
    for unit in sentence.split():
        m = _TERMINAL_PUNCT.match(unit)
        if m and m.group(1):
            tokens.append(m.group(1))
            tokens.append(m.group(2))
        else:
            tokens.append(unit)
    return tokens


def split_sentences(raw_text: str) -> List[str]:
    return [s for s in _SENT_BOUNDARY.split(raw_text.strip()) if s]


def extract_and_filter(
    raw_text: str,
    min_len: int = 5,
    max_len: int = 20,
    filters: Optional[Sequence[NoiseFilter]] = None,
) -> List[List[str]]:
    """Split raw text into clean token lists.

    Sentences outside [min_len, max_len] tokens or matching any noise
    filter are dropped.
    """
    if filters is None:
        filters = load_noise_filters()
    out: List[List[str]] = []
    for sent in split_sentences(raw_text):
        if any(f.pattern.search(sent) for f in filters):
            continue
        tokens = tokenize_sentence(sent)
        if min_len <= len(tokens) <= max_len:
            out.append(tokens)
    return out


def build_corpus(
    lines: Iterable[str],
    vocab: RestrictedVocab,
    min_len: int = 5,
    max_len: int = 20,
    filters: Optional[Sequence[NoiseFilter]] = None,
    id_prefix: str = "s",
) -> List[LabeledSentence]:
    """Extract, filter and label sentences from raw comment lines."""
    if filters is None:
        filters = load_noise_filters()
    sentences: List[LabeledSentence] = []
    counter = 0
    for line in lines:
        for tokens in extract_and_filter(line, min_len, max_len, filters):
            sid = f"{id_prefix}{counter:08d}"
            counter += 1
            sentences.append(
                LabeledSentence(sid, tuple(tokens), label_for(tokens, vocab))
            )
    return sentences


def ascii_alpha_ratio(tokens: Sequence[str]) -> float:
    """Share of non-space characters that are ASCII letters; crude English check."""
    chars = "".join(tokens)
    if not chars:
        return 0.0
    alpha = sum(1 for ch in chars if ch.isascii() and ch.isalpha())
    return alpha / len(chars)


@dataclass
class CorpusSplits:
    train: List[LabeledSentence]
    validation: List[LabeledSentence]
    test: List[LabeledSentence]
    seed: int = 0

    def __iter__(self) -> Iterator[Tuple[str, List[LabeledSentence]]]:
        yield "train", self.train
        yield "validation", self.validation
        yield "test", self.test


def build_splits(
    sentences: Sequence[LabeledSentence],
    proportions: Tuple[float, float, float] = (0.8, 0.1, 0.1),
    subsample_nonoffensive_to: Optional[int] = None,
    seed: int = 0,
) -> CorpusSplits:
    """Deterministic shuffled train/validation/test split.

    When subsample_nonoffensive_to is given, the non-offensive class is
    first sampled down to that count (uniformly, seeded); the splits then
    partition the subsampled corpus.  Train and validation sizes are
    floor(p * n); the remainder is the test set.
    """
    if abs(sum(proportions) - 1.0) > 1e-9:
        raise ValueError(f"split proportions must sum to 1, got {proportions}")
    if any(p < 0 for p in proportions):
        raise ValueError(f"split proportions must be non-negative, got {proportions}")
    rng = random.Random(seed)
    pool = list(sentences)
    if subsample_nonoffensive_to is not None:
        non = [s for s in pool if s.label == NON_OFFENSIVE]
        off = [s for s in pool if s.label == OFFENSIVE]
        if subsample_nonoffensive_to > len(non):
            raise ValueError(
                f"cannot subsample non-offensive class to {subsample_nonoffensive_to}: "
                f"only {len(non)} available"
            )
        non = rng.sample(non, subsample_nonoffensive_to)
        pool = off + non
    rng.shuffle(pool)
    n = len(pool)
    n_train = math.floor(proportions[0] * n)
    n_val = math.floor(proportions[1] * n)
    return CorpusSplits(
        train=pool[:n_train],
        validation=pool[n_train : n_train + n_val],
        test=pool[n_train + n_val :],
        seed=seed,
    )


def save_corpus(path: str | Path, sentences: Iterable) -> None:
    """Write sentences as JSON-lines; TaggedSentence records include tags."""
    with open(path, "w", encoding="utf-8") as fh:
        for sent in sentences:
            fh.write(json.dumps(sent.to_record(), ensure_ascii=False) + "\n")


def load_corpus(path: str | Path) -> List[LabeledSentence]:
    """Read a JSON-lines corpus; tag fields, if present, are ignored here."""
    sentences: List[LabeledSentence] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
                sentences.append(
                    LabeledSentence(rec["id"], tuple(rec["tokens"]), rec["label"])
                )
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise CorpusError(f"{path}:{lineno}: bad corpus record: {exc}") from exc
    return sentences
