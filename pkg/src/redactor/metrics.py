"""Corpus-level evaluation: BLEU, ROUGE-L, METEOR, accuracy, PPL, FuCP.

All content metrics take parallel lists of hypothesis and reference
token lists and return a corpus-level real in [0, 1]:

- bleu_corpus: BLEU-4 with clipped n-gram precisions pooled over the
  corpus and brevity penalty; orders no hypothesis is long enough for
  are skipped rather than treated as zero.
- rouge_l: mean sentence ROUGE-L F1 (LCS recall/precision harmonic mean).
- meteor: exact-match METEOR (no stems or synonyms).  Fragmentation is
  counted beyond a single chunk, penalty = gamma * ((chunks-1)/m)^beta,
  so any perfectly contiguous alignment (identical sentences included)
  scores with no penalty and identical corpora score exactly 1.0.
- fu_content_preservation: cosine between sentence embeddings built by
  concatenating element-wise min, mean and max over word vectors.

transfer_accuracy and avg_perplexity report the restricted-free share
and mean fluency of outputs.  Corpus means reduce in input order, so
results are deterministic and permutation of pairs leaves them
unchanged.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .corpus import RestrictedVocab, is_restricted
from .lm import Scorer, perplexity


class MetricsError(Exception):
    """Raised for mismatched inputs or unusable embeddings."""


def _check_parallel(hypotheses: Sequence, references: Sequence) -> None:
    if len(hypotheses) != len(references):
        raise MetricsError(
            f"{len(hypotheses)} hypotheses vs {len(references)} references"
        )
    if not hypotheses:
        raise MetricsError("empty corpus")


# --- BLEU --------------------------------------------------------------------


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu_corpus(
    hypotheses: Sequence[Sequence[str]],
    references: Sequence[Sequence[str]],
    max_order: int = 4,
) -> float:
    """Corpus BLEU-4: pooled clipped precisions, geometric mean, BP."""
    _check_parallel(hypotheses, references)
    matches = [0] * max_order
    totals = [0] * max_order
    hyp_len = 0
    ref_len = 0
    for hyp, ref in zip(hypotheses, references):
        hyp_len += len(hyp)
        ref_len += len(ref)
        for n in range(1, max_order + 1):
            hyp_counts = _ngrams(hyp, n)
            if not hyp_counts:
                continue
            ref_counts = _ngrams(ref, n)
            matches[n - 1] += sum(
                min(cnt, ref_counts[g]) for g, cnt in hyp_counts.items()
            )
            totals[n - 1] += sum(hyp_counts.values())
    used = [(m, t) for m, t in zip(matches, totals) if t > 0]
    if not used:
        return 0.0
    if any(m == 0 for m, _ in used):
        return 0.0
    log_sum = sum(math.log(m / t) for m, t in used) / len(used)
    bp = 1.0 if hyp_len >= ref_len else math.exp(1.0 - ref_len / max(hyp_len, 1))
    return bp * math.exp(log_sum)


# --- ROUGE-L ------------------------------------------------------------------


def _lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for i in range(1, len(a) + 1):
        cur = [0] * (len(b) + 1)
        for j in range(1, len(b) + 1):
            if a[i - 1] == b[j - 1]:
                cur[j] = prev[j - 1] + 1
            else:
                cur[j] = max(prev[j], cur[j - 1])
        prev = cur
    return prev[len(b)]


def rouge_l(
    hypotheses: Sequence[Sequence[str]],
    references: Sequence[Sequence[str]],
) -> float:
    """Mean sentence ROUGE-L F1; a pair with no common subsequence scores 0."""
    _check_parallel(hypotheses, references)
    total = 0.0
    for hyp, ref in zip(hypotheses, references):
        lcs = _lcs_length(hyp, ref)
        if lcs == 0 or not hyp or not ref:
            continue
        p = lcs / len(hyp)
        r = lcs / len(ref)
        total += 2 * p * r / (p + r)
    return total / len(hypotheses)


# --- METEOR -------------------------------------------------------------------

_METEOR_NODE_BUDGET = 100000


def _meteor_align(hyp: Sequence[str], ref: Sequence[str]) -> Tuple[int, int]:
    """Maximum exact unigram matching with the fewest chunks.

    Returns (matches, chunks).  Searches assignments depth-first with
    pruning; on pathological duplicate-heavy inputs the search budget
    runs out and the best alignment found so far is kept (deterministic
    either way).
    """
    hyp_counts = Counter(hyp)
    ref_counts = Counter(ref)
    budget_full = {w: min(c, ref_counts[w]) for w, c in hyp_counts.items() if ref_counts[w]}
    m = sum(budget_full.values())
    if m == 0:
        return 0, 0
    ref_positions: Dict[str, List[int]] = {}
    for j, w in enumerate(ref):
        if w in budget_full:
            ref_positions.setdefault(w, []).append(j)

    # greedy pass: prefer the ref position continuing the current chunk
    budget = dict(budget_full)
    free = {w: list(ps) for w, ps in ref_positions.items()}
    chunks_greedy = 0
    last = None  # (hyp index, ref index) of previous match
    for i, w in enumerate(hyp):
        if budget.get(w, 0) == 0 or not free.get(w):
            continue
        want = last[1] + 1 if last is not None and last[0] == i - 1 else None
        if want is not None and want in free[w]:
            j = want
        else:
            j = free[w][0]
        free[w].remove(j)
        budget[w] -= 1
        chunks_greedy += 0 if (last is not None and last[0] == i - 1 and j == last[1] + 1) else 1
        last = (i, j)

    best = chunks_greedy
    if best <= 1:
        return m, best

    # exact search: assign hyp positions left to right
    nodes = 0

    def possible_from(i: int, budget: Dict[str, int]) -> int:
        remaining: Dict[str, int] = {}
        for w in hyp[i:]:
            if budget.get(w, 0) > remaining.get(w, 0):
                remaining[w] = remaining.get(w, 0) + 1
        return sum(remaining.values())

    def dfs(i: int, matched: int, chunks: int, budget: Dict[str, int],
            used: frozenset, last: Optional[Tuple[int, int]]) -> None:
        nonlocal best, nodes
        nodes += 1
        if nodes > _METEOR_NODE_BUDGET:
            return
        if chunks >= best:
            return
        if matched == m:
            best = chunks
            return
        if i >= len(hyp) or matched + possible_from(i, budget) < m:
            return
        w = hyp[i]
        if budget.get(w, 0) > 0:
            for j in ref_positions[w]:
                if j in used:
                    continue
                extends = last is not None and last[0] == i - 1 and j == last[1] + 1
                budget[w] -= 1
                dfs(i + 1, matched + 1, chunks + (0 if extends else 1),
                    budget, used | {j}, (i, j))
                budget[w] += 1
        dfs(i + 1, matched, chunks, budget, used, last)

    dfs(0, 0, 0, dict(budget_full), frozenset(), None)
    return m, best


def meteor_sentence(
    hyp: Sequence[str],
    ref: Sequence[str],
    alpha: float = 0.9,
    beta: float = 3.0,
    gamma: float = 0.5,
) -> float:
    if not hyp or not ref:
        return 0.0
    m, chunks = _meteor_align(hyp, ref)
    if m == 0:
        return 0.0
    p = m / len(hyp)
    r = m / len(ref)
    f_mean = p * r / (alpha * p + (1 - alpha) * r)
    penalty = gamma * ((chunks - 1) / m) ** beta
    return f_mean * (1.0 - penalty)


def meteor(
    hypotheses: Sequence[Sequence[str]],
    references: Sequence[Sequence[str]],
    alpha: float = 0.9,
    beta: float = 3.0,
    gamma: float = 0.5,
) -> float:
    """Mean exact-match METEOR over the corpus."""
    _check_parallel(hypotheses, references)
    return sum(
        meteor_sentence(h, r, alpha, beta, gamma)
        for h, r in zip(hypotheses, references)
    ) / len(hypotheses)


# --- accuracy and fluency ------------------------------------------------------


def transfer_accuracy(outputs: Sequence[Sequence[str]], vocab: RestrictedVocab) -> float:
    """Percentage of outputs containing zero restricted tokens."""
    if not outputs:
        raise MetricsError("empty outputs")
    clean = sum(
        1 for out in outputs if not any(is_restricted(vocab, t) for t in out)
    )
    return 100.0 * clean / len(outputs)


def avg_perplexity(outputs: Sequence[Sequence[str]], scorer: Scorer) -> float:
    if not outputs:
        raise MetricsError("empty outputs")
    return sum(perplexity(scorer, out) for out in outputs) / len(outputs)


# --- Fu-style content preservation ---------------------------------------------


class EmbeddingTable:
    """word -> fixed-dimension vector, loaded from "word v1 v2 ... vd" lines."""

    def __init__(self, vectors: Dict[str, np.ndarray]):
        if not vectors:
            raise MetricsError("empty embedding table")
        dims = {v.shape for v in vectors.values()}
        if len(dims) != 1:
            raise MetricsError(f"inconsistent embedding dimensions: {dims}")
        self.vectors = vectors
        self.dim = next(iter(dims))[0]

    def get(self, word: str) -> Optional[np.ndarray]:
        return self.vectors.get(word)

    @staticmethod
    def load(path: str | Path) -> "EmbeddingTable":
        vectors: Dict[str, np.ndarray] = {}
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                parts = line.split()
                if not parts:
                    continue
                if len(parts) < 2:
                    raise MetricsError(f"{path}:{lineno}: no vector components")
                try:
                    vectors[parts[0]] = np.array([float(x) for x in parts[1:]], dtype=float)
                except ValueError as exc:
                    raise MetricsError(f"{path}:{lineno}: bad float: {exc}") from exc
        return EmbeddingTable(vectors)


def _sentence_embedding(tokens: Sequence[str], emb: EmbeddingTable) -> np.ndarray:
    """Concat(min, mean, max) pooling; OOV = zero vector, in mean only."""
    known = [emb.get(t) for t in tokens]
    present = [v for v in known if v is not None]
    zeros = np.zeros(emb.dim)
    if present:
        stacked = np.stack(present)
        pooled_min = stacked.min(axis=0)
        pooled_max = stacked.max(axis=0)
    else:
        pooled_min = zeros
        pooled_max = zeros
    total = np.sum(present, axis=0) if present else zeros
    pooled_mean = total / max(len(tokens), 1)
    return np.concatenate([pooled_min, pooled_mean, pooled_max])


def fu_content_preservation(
    hypotheses: Sequence[Sequence[str]],
    sources: Sequence[Sequence[str]],
    embeddings: EmbeddingTable,
) -> float:
    """Mean cosine between pooled hypothesis and source embeddings."""
    _check_parallel(hypotheses, sources)
    total = 0.0
    for hyp, src in zip(hypotheses, sources):
        hv = _sentence_embedding(hyp, embeddings)
        sv = _sentence_embedding(src, embeddings)
        hn = float(np.linalg.norm(hv))
        sn = float(np.linalg.norm(sv))
        if hn == 0.0 or sn == 0.0:
            raise MetricsError(
                f"zero-norm sentence vector (all words OOV?) for {hyp!r} / {src!r}"
            )
        total += float(np.dot(hv, sv)) / (hn * sn)
    return total / len(hypotheses)


# --- report --------------------------------------------------------------------


@dataclass
class EvalReport:
    bleu: float
    rouge: float
    meteor: float
    fucp: Optional[float]
    accuracy: float
    avg_ppl: float
    n: int

    def to_json(self) -> str:
        return json.dumps(
            {
                "bleu": self.bleu,
                "rouge": self.rouge,
                "meteor": self.meteor,
                "fucp": self.fucp,
                "accuracy": self.accuracy,
                "avg_ppl": self.avg_ppl,
                "n": self.n,
            },
            indent=2,
        )

    def tsv_row(self) -> str:
        """BL RG MT FuCP Acc PPL, the content metrics scaled by 100."""
        fucp = f"{self.fucp:.3f}" if self.fucp is not None else "-"
        return "\t".join(
            [
                f"{self.bleu * 100:.1f}",
                f"{self.rouge * 100:.1f}",
                f"{self.meteor * 100:.1f}",
                fucp,
                f"{self.accuracy:.1f}",
                f"{self.avg_ppl:.1f}",
            ]
        )
