"""TF-IDF retrieval over part-of-speech sequences.

Documents are unique POS sequences (duplicates collapse, multiplicity is
kept for diagnostics only).  Index terms are tag unigrams plus adjacent
tag bigrams; BW positions contribute no terms and bigrams spanning a BW
position are dropped, so restricted positions never influence matching.

Weights: tf = sqrt(raw count), idf = 1 + ln(doc_count / (df + 1)), both
query and document vectors L2-normalized, similarity = cosine.  Ranking
ties (scores compared at 1e-12 resolution) break by smaller absolute
length difference from the query, then by ascending document id.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from .postag import ALL_TAGS, BW

INDEX_FORMAT_VERSION = 1
TERM_SCHEME = "pos-uni+bi/v1"

# Resolution at which two cosine scores count as tied for ranking.
_SCORE_DECIMALS = 12


class RetrievalError(Exception):
    """Raised for malformed index inputs or files."""


@dataclass(frozen=True)
class RetrievalHit:
    doc_id: int
    sequence: Tuple[str, ...]
    score: float
    exact_match: bool


def sequence_terms(sequence: Sequence[str]) -> List[str]:
    """Unigram and adjacent-bigram terms; BW yields nothing.

    A bigram is emitted only for positions adjacent in the sequence with
    neither side BW, so inserting BW anywhere never adds a term.
    """
    terms: List[str] = []
    for tag in sequence:
        if tag != BW:
            terms.append(tag)
    for left, right in zip(sequence, sequence[1:]):
        if left != BW and right != BW:
            terms.append(f"{left} {right}")
    return terms


def _term_counts(sequence: Sequence[str]) -> Dict[str, int]:
    counts: Dict[str, int] = {}
    for term in sequence_terms(sequence):
        counts[term] = counts.get(term, 0) + 1
    return counts


class PosIndex:
    """Inverted index over unique POS sequences."""

    def __init__(
        self,
        documents: List[Tuple[str, ...]],
        multiplicity: List[int],
        postings: Dict[str, List[Tuple[int, int]]],
    ):
        self.documents = documents
        self.multiplicity = multiplicity
        self.postings = postings
        self.doc_count = len(documents)
        self.idf: Dict[str, float] = {
            term: 1.0 + math.log(self.doc_count / (len(plist) + 1))
            for term, plist in postings.items()
        }
        # Norms accumulate per document over its own sorted terms so the
        # summation order (hence the float result) is identical whether the
        # index was just built or loaded from disk.
        self.doc_norms: List[float] = []
        for seq in documents:
            total = 0.0
            for term, tf in sorted(_term_counts(seq).items()):
                w = math.sqrt(tf) * self.idf[term]
                total += w * w
            self.doc_norms.append(math.sqrt(total))
        if any(n <= 0 for n in self.doc_norms):
            raise RetrievalError("document with zero norm; empty sequence in input?")

    def term_idf(self, term: str) -> float:
        """idf under the index; unseen terms score as df = 0."""
        got = self.idf.get(term)
        if got is not None:
            return got
        return 1.0 + math.log(self.doc_count / 1.0)


def build_index(sequences: Sequence[Sequence[str]]) -> PosIndex:
    """Index unique sequences in first-appearance order.

    Inputs must be non-empty, BW-free (BW in supposedly non-offensive
    data means corpus corruption) and use known tags only.
    """
    if not sequences:
        raise RetrievalError("cannot build an index from zero sequences")
    documents: List[Tuple[str, ...]] = []
    multiplicity: List[int] = []
    seen: Dict[Tuple[str, ...], int] = {}
    for seq in sequences:
        seq = tuple(seq)
        if not seq:
            raise RetrievalError("empty POS sequence")
        for tag in seq:
            if tag == BW:
                raise RetrievalError(f"BW tag in index input sequence {seq!r}")
            if tag not in ALL_TAGS:
                raise RetrievalError(f"unknown tag {tag!r} in sequence {seq!r}")
        if seq in seen:
            multiplicity[seen[seq]] += 1
            continue
        seen[seq] = len(documents)
        documents.append(seq)
        multiplicity.append(1)
    postings: Dict[str, List[Tuple[int, int]]] = {}
    for doc_id, seq in enumerate(documents):
        for term, tf in sorted(_term_counts(seq).items()):
            postings.setdefault(term, []).append((doc_id, tf))
    return PosIndex(documents, multiplicity, postings)


def _query_weights(index: PosIndex, query: Sequence[str]) -> Tuple[Dict[str, float], float]:
    """Un-normalized query weights and the query norm (0.0 for no terms)."""
    weights = {
        term: math.sqrt(tf) * index.term_idf(term)
        for term, tf in _term_counts(query).items()
    }
    norm = math.sqrt(sum(w * w for w in weights.values()))
    return weights, norm


def tfidf_score(index: PosIndex, query: Sequence[str], doc_id: int) -> float:
    """Cosine similarity between query and one document; 0 for a termless query."""
    weights, qnorm = _query_weights(index, query)
    if qnorm == 0.0:
        return 0.0
    doc_counts = _term_counts(index.documents[doc_id])
    dot = 0.0
    for term, w in weights.items():
        tf = doc_counts.get(term)
        if tf:
            dot += w * math.sqrt(tf) * index.term_idf(term)
    return dot / (qnorm * index.doc_norms[doc_id])


def query_similar(
    index: PosIndex,
    query: Sequence[str],
    k: int = 10,
    exclude_exact: bool = False,
) -> List[RetrievalHit]:
    """Top-k documents by cosine score under the deterministic tie-break.

    Returns min(k, available documents) hits; documents sharing no term
    with the query rank with score 0.  With exclude_exact, documents
    equal to the query are removed before truncation.
    """
    if index.doc_count == 0:
        raise RetrievalError("empty index")
    if k < 1:
        raise RetrievalError(f"k must be positive, got {k}")
    query = tuple(query)
    weights, qnorm = _query_weights(index, query)
    scores: Dict[int, float] = {}
    if qnorm > 0.0:
        for term, w in weights.items():
            idf = index.term_idf(term)
            for doc_id, tf in index.postings.get(term, ()):
                scores[doc_id] = scores.get(doc_id, 0.0) + w * math.sqrt(tf) * idf
    qlen = len(query)

    def sort_key(doc_id: int) -> Tuple[float, int, int]:
        raw = scores.get(doc_id, 0.0)
        if raw:
            raw /= qnorm * index.doc_norms[doc_id]
        return (-round(raw, _SCORE_DECIMALS), abs(len(index.documents[doc_id]) - qlen), doc_id)

    candidates = [
        d for d in range(index.doc_count)
        if not (exclude_exact and index.documents[d] == query)
    ]
    candidates.sort(key=sort_key)
    hits = []
    for doc_id in candidates[:k]:
        raw = scores.get(doc_id, 0.0)
        if raw:
            raw /= qnorm * index.doc_norms[doc_id]
        hits.append(
            RetrievalHit(
                doc_id=doc_id,
                sequence=index.documents[doc_id],
                score=raw,
                exact_match=index.documents[doc_id] == query,
            )
        )
    return hits


# --- persistence ------------------------------------------------------------


def save_index(index: PosIndex, directory: str | Path) -> None:
    """Write manifest.json, documents.jsonl and postings.jsonl."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    manifest = {
        "version": INDEX_FORMAT_VERSION,
        "term_scheme": TERM_SCHEME,
        "doc_count": index.doc_count,
        "multiplicity": index.multiplicity,
    }
    (directory / "manifest.json").write_text(
        json.dumps(manifest, ensure_ascii=False) + "\n", encoding="utf-8"
    )
    with open(directory / "documents.jsonl", "w", encoding="utf-8") as fh:
        for seq in index.documents:
            fh.write(json.dumps(list(seq)) + "\n")
    with open(directory / "postings.jsonl", "w", encoding="utf-8") as fh:
        for term in sorted(index.postings):
            fh.write(
                json.dumps(
                    {"term": term, "postings": [[d, tf] for d, tf in index.postings[term]]}
                )
                + "\n"
            )


def load_index(directory: str | Path) -> PosIndex:
    """Load a saved index; unknown format versions are rejected."""
    directory = Path(directory)
    try:
        manifest = json.loads((directory / "manifest.json").read_text(encoding="utf-8"))
    except OSError as exc:
        raise RetrievalError(f"cannot read index manifest in {directory}: {exc}") from exc
    if manifest.get("version") != INDEX_FORMAT_VERSION:
        raise RetrievalError(f"unsupported index version: {manifest.get('version')!r}")
    if manifest.get("term_scheme") != TERM_SCHEME:
        raise RetrievalError(f"unsupported term scheme: {manifest.get('term_scheme')!r}")
    documents: List[Tuple[str, ...]] = []
    with open(directory / "documents.jsonl", "r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                documents.append(tuple(json.loads(line)))
    postings: Dict[str, List[Tuple[int, int]]] = {}
    with open(directory / "postings.jsonl", "r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                rec = json.loads(line)
                postings[rec["term"]] = [(d, tf) for d, tf in rec["postings"]]
    multiplicity = manifest.get("multiplicity", [1] * len(documents))
    if len(documents) != manifest.get("doc_count"):
        raise RetrievalError(
            f"manifest doc_count {manifest.get('doc_count')} != {len(documents)} documents"
        )
    return PosIndex(documents, multiplicity, postings)
