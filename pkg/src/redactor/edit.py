"""Editing: synthesize a parallel corpus and optionally denoise candidates.

The pipeline's generated candidates read like template fills, so an
editor can be trained to smooth them into natural sentences.  Training
data is synthesized from the clean (non-offensive) corpus alone: each
sampled sentence is run through retrieve-and-generate with its own
sequence excluded from retrieval, and every generated candidate becomes
a (candidate -> original sentence) pair.  Pairs whose source equals the
target are dropped.

Editing itself is pluggable: identity mode returns candidates verbatim;
remote mode posts each candidate to an /edit service.  An editor may
reintroduce restricted words, so selection re-filters afterwards and
the pipeline falls back to the unedited set when the filter empties.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import requests

from .corpus import NON_OFFENSIVE, LabeledSentence, RestrictedVocab, ascii_alpha_ratio
from .generate import GenerationCaps, generate_candidates
from .lm import MaskFiller
from .postag import Tagger, substitute_bw, tag_sentence
from .retrieve import PosIndex, query_similar

DEFAULT_SAMPLE_N = 60000
ENGLISH_ASCII_RATIO = 0.9


class EditError(Exception):
    """Raised for edit-service failures and bad synthesis inputs."""

    def __init__(self, message: str, edited_count: int = 0):
        super().__init__(message)
        self.edited_count = edited_count


@dataclass(frozen=True)
class EditPair:
    source: Tuple[str, ...]   # generated candidate
    target: Tuple[str, ...]   # original clean sentence


@dataclass(frozen=True)
class EditorConfig:
    mode: str = "identity"            # "identity" | "remote"
    endpoint: Optional[str] = None
    beam_size: int = 5
    max_len: int = 30
    timeout: float = 30.0

    def __post_init__(self):
        if self.mode not in ("identity", "remote"):
            raise ValueError(f"unknown editor mode {self.mode!r}")
        if self.mode == "remote" and not self.endpoint:
            raise ValueError("remote editor needs an endpoint")


class RemoteEditor:
    """Client for POST /edit:
    {"tokens": [...], "beam_size": n, "max_len": n} -> {"tokens": [...]}.
    """

    def __init__(self, config: EditorConfig):
        if config.mode != "remote":
            raise ValueError("RemoteEditor requires remote mode config")
        self.config = config
        self.endpoint = config.endpoint.rstrip("/")

    def edit(self, tokens: Sequence[str]) -> List[str]:
        url = f"{self.endpoint}/edit"
        payload = {
            "tokens": list(tokens),
            "beam_size": self.config.beam_size,
            "max_len": self.config.max_len,
        }
        try:
            resp = requests.post(url, json=payload, timeout=self.config.timeout)
        except requests.RequestException as exc:
            raise EditError(f"edit service unreachable at {url}: {exc}") from exc
        if resp.status_code != 200:
            raise EditError(f"edit service at {url} returned {resp.status_code}")
        try:
            out = list(resp.json()["tokens"])
        except (ValueError, KeyError, TypeError) as exc:
            raise EditError(f"malformed response from {url}: {exc}") from exc
        if len(out) > self.config.max_len:
            raise EditError(
                f"edit service at {url} returned {len(out)} tokens, max_len {self.config.max_len}"
            )
        return out


def edit_candidates(
    candidates: Sequence[Sequence[str]],
    config: EditorConfig,
) -> List[Tuple[str, ...]]:
    """Run every candidate through the editor, order preserved.

    On a remote failure the raised EditError carries how many candidates
    were already edited.
    """
    if config.mode == "identity":
        return [tuple(c) for c in candidates]
    editor = RemoteEditor(config)
    out: List[Tuple[str, ...]] = []
    for cand in candidates:
        try:
            out.append(tuple(editor.edit(cand)))
        except EditError as exc:
            raise EditError(str(exc), edited_count=len(out)) from exc
    return out


def synthesize_edit_corpus(
    sentences: Sequence[LabeledSentence],
    index: PosIndex,
    tagger: Tagger,
    filler: MaskFiller,
    vocab: RestrictedVocab,
    sample_n: int = DEFAULT_SAMPLE_N,
    seed: int = 0,
    k: int = 10,
    caps: GenerationCaps = GenerationCaps(),
) -> List[EditPair]:
    """Deterministic (candidate -> original) pairs from clean sentences.

    Only English-looking sentences (>= 90% ASCII letters) are sampled.
    Each sentence's own POS sequence is excluded from retrieval so the
    easy copy template is never offered.
    """
    for s in sentences:
        if s.label != NON_OFFENSIVE:
            raise EditError(f"offensive sentence {s.id} in edit-synthesis input")
    english = [s for s in sentences if ascii_alpha_ratio(s.tokens) >= ENGLISH_ASCII_RATIO]
    if not english:
        raise EditError("no English-looking sentences to synthesize from")
    rng = random.Random(seed)
    n = min(sample_n, len(english))
    sample = english if n == len(english) else rng.sample(english, n)
    pairs: List[EditPair] = []
    for sent in sample:
        tagged = substitute_bw(tag_sentence(sent, tagger), vocab)
        hits = query_similar(index, tagged.pos_sequence, k=k, exclude_exact=True)
        templates = [h.sequence for h in hits]
        for cand in generate_candidates(tagged, templates, filler, vocab, caps):
            if cand != sent.tokens:
                pairs.append(EditPair(cand, sent.tokens))
    return pairs


def save_edit_pairs(pairs: Sequence[EditPair], path: str | Path) -> None:
    """TSV: source tokens TAB target tokens, each space-joined."""
    with open(path, "w", encoding="utf-8") as fh:
        for pair in pairs:
            fh.write(" ".join(pair.source) + "\t" + " ".join(pair.target) + "\n")


def load_edit_pairs(path: str | Path) -> List[EditPair]:
    pairs: List[EditPair] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise EditError(f"{path}:{lineno}: expected 2 tab-separated fields")
            pairs.append(EditPair(tuple(parts[0].split()), tuple(parts[1].split())))
    return pairs
