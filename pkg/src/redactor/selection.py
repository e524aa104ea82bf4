"""Candidate selection: balance content preservation against fluency.

Content is smoothed sentence BLEU of the candidate against its source
(max order 4, add-one smoothing on the higher-order precisions, so a
verbatim restricted-free copy scores 1.0).  Fluency is per-sentence
perplexity.  Both are min-max normalized within the candidate set (a
degenerate set where max == min maps everything to 0.5), perplexity is
flipped so higher is better, and the candidate with the highest sum
wins.  Ties break by lower raw perplexity, then by lexicographically
smaller token list.

Candidates still containing restricted tokens are removed before
scoring; the pipeline treats an empty survivor set as a signal to fall
back (to the unedited candidates, or to dropping restricted words).
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from .corpus import LabeledSentence, RestrictedVocab, is_restricted
from .lm import Scorer, perplexity


class SelectionError(Exception):
    """Raised for unusable candidate sets or non-finite scores."""


class EmptyAfterFilter(SelectionError):
    """Raised when the restricted-token filter removes every candidate."""


@dataclass(frozen=True)
class ScoredCandidate:
    tokens: Tuple[str, ...]
    content_raw: float      # smoothed sentence BLEU vs the source
    fluency_raw: float      # per-sentence perplexity
    content_norm: float
    fluency_norm: float

    @property
    def total(self) -> float:
        return self.content_norm + self.fluency_norm


def _ngram_counts(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def sentence_bleu(candidate: Sequence[str], reference: Sequence[str]) -> float:
    """Smoothed sentence BLEU, orders 1..min(4, len(candidate)).

    Order-1 precision is unsmoothed (an empty overlap really is zero);
    higher orders get add-one smoothing.  Brevity penalty is
    exp(1 - r/c) when the candidate is shorter than the reference.
    """
    c, r = len(candidate), len(reference)
    if c == 0 or r == 0:
        return 0.0
    max_order = min(4, c)
    log_sum = 0.0
    for n in range(1, max_order + 1):
        cand_counts = _ngram_counts(candidate, n)
        ref_counts = _ngram_counts(reference, n)
        matches = sum(min(cnt, ref_counts[g]) for g, cnt in cand_counts.items())
        total = sum(cand_counts.values())
        if n == 1:
            if matches == 0:
                return 0.0
            p = matches / total
        else:
            p = (matches + 1) / (total + 1)
        log_sum += math.log(p)
    bp = 1.0 if c >= r else math.exp(1.0 - r / c)
    return bp * math.exp(log_sum / max_order)


def minmax_normalize(values: Sequence[float]) -> List[float]:
    """(v - min) / (max - min); a constant vector maps to all 0.5."""
    if not values:
        raise SelectionError("cannot normalize an empty value list")
    if any(not math.isfinite(v) for v in values):
        raise SelectionError(f"non-finite value in {values!r}")
    lo, hi = min(values), max(values)
    if hi == lo:
        return [0.5] * len(values)
    return [(v - lo) / (hi - lo) for v in values]


def score_candidates(
    source: Sequence[str],
    candidates: Sequence[Sequence[str]],
    scorer: Scorer,
    vocab: RestrictedVocab,
) -> List[ScoredCandidate]:
    """Filter restricted candidates, then score and normalize the rest."""
    survivors = [
        tuple(cand)
        for cand in candidates
        if not any(is_restricted(vocab, tok) for tok in cand)
    ]
    if not survivors:
        raise EmptyAfterFilter(
            f"no candidate free of restricted words (started with {len(candidates)})"
        )
    content = [sentence_bleu(cand, source) for cand in survivors]
    fluency = [perplexity(scorer, cand) for cand in survivors]
    content_norm = minmax_normalize(content)
    ppl_norm = minmax_normalize(fluency)
    return [
        ScoredCandidate(cand, c_raw, f_raw, c_n, 1.0 - p_n)
        for cand, c_raw, f_raw, c_n, p_n in zip(
            survivors, content, fluency, content_norm, ppl_norm
        )
    ]


def select_best(scored: Sequence[ScoredCandidate]) -> ScoredCandidate:
    """Highest combined score; ties by lower perplexity, then tokens."""
    if not scored:
        raise SelectionError("no scored candidates to select from")
    return min(scored, key=lambda sc: (-sc.total, sc.fluency_raw, sc.tokens))


@dataclass(frozen=True)
class TransferResult:
    """One rewriting outcome: the chosen output plus its provenance.

    candidate_count is the number of distinct generated candidates the
    selector chose from.  fallback_used marks outputs that did not come
    from the configured route (unedited candidates after an edit-filter
    wipeout, or restricted-token deletion as the last resort).
    passthrough marks non-offensive inputs returned unchanged.
    """

    source: "LabeledSentence"
    output: Tuple[str, ...]
    selected: Optional[ScoredCandidate]
    candidate_count: int
    fallback_used: bool
    passthrough: bool = False

    def to_record(self) -> dict:
        selected = None
        if self.selected is not None:
            selected = {
                "tokens": list(self.selected.tokens),
                "content_raw": self.selected.content_raw,
                "fluency_raw": self.selected.fluency_raw,
                "content_norm": self.selected.content_norm,
                "fluency_norm": self.selected.fluency_norm,
                "total": self.selected.total,
            }
        return {
            "id": self.source.id,
            "source_tokens": list(self.source.tokens),
            "source_label": self.source.label,
            "output": list(self.output),
            "candidate_count": self.candidate_count,
            "fallback_used": self.fallback_used,
            "passthrough": self.passthrough,
            "selected": selected,
        }
