"""N-gram language model: fluency scoring and restricted-free mask filling.

The model is an absolute-discounting backoff n-gram (order 1..5).  The
base distribution under the unigram level is uniform at 1/V over the
seen event vocabulary, and out-of-vocabulary words also draw that 1/V
base mass, so unseen words keep non-zero probability while the total
over the vocabulary still sums to 1.

Sentence probability covers every token plus, by default, an
end-of-sentence event; perplexity is exp(-(1/T) * sum(log p)).

Mask filling is greedy left to right: each [MASK] slot takes the
candidate-pool word maximizing the product of the n-gram probabilities
covering the masked position and its right neighbor.  Candidates are
the most frequent vocabulary words minus all excluded words, so
restricted words can never be produced.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Protocol, Sequence, Tuple

import requests

from .corpus import RestrictedVocab, is_restricted, normalize_token

BOS = "<s>"
EOS = "</s>"
MASK = "[MASK]"
SEP = "[SEP]"
SPECIAL_TOKENS = frozenset({BOS, EOS, MASK, SEP})

MODEL_FORMAT_VERSION = 1
DEFAULT_POOL_SIZE = 5000


class LmError(Exception):
    """Raised for bad model inputs, files, or fill failures."""


class Scorer(Protocol):
    def sentence_perplexity(self, tokens: Sequence[str], include_eos: Optional[bool] = None) -> float:
        ...


@dataclass(frozen=True)
class FillConstraint:
    """What a filler may output.

    excluded_words holds restricted terms plus special tokens; exclusion
    is checked both literally and on the normalized form of a candidate.
    candidate_pool, when None, lets the filler use its own default pool
    (most frequent model words minus exclusions).
    """

    excluded_words: frozenset[str]
    candidate_pool: Optional[Tuple[str, ...]] = None

    @staticmethod
    def for_vocab(vocab: RestrictedVocab, extra: Iterable[str] = ()) -> "FillConstraint":
        return FillConstraint(frozenset(vocab.terms) | SPECIAL_TOKENS | frozenset(extra))

    def allows(self, word: str) -> bool:
        return word not in self.excluded_words and normalize_token(word) not in self.excluded_words


class MaskFiller(Protocol):
    def fill(self, context: Sequence[str], slots: Sequence[str], constraint: FillConstraint) -> List[str]:
        ...


class NgramModel:
    """Absolute-discounting backoff n-gram model over tokenized sentences."""

    def __init__(self, order: int, discount: float, eos: bool = True):
        if not 1 <= order <= 5:
            raise LmError(f"order must be in [1, 5], got {order}")
        if not 0.0 < discount < 1.0:
            raise LmError(f"discount must be in (0, 1), got {discount}")
        self.order = order
        self.discount = discount
        self.eos = eos
        # counts[context_tuple][word] = raw count; contexts of length 0..order-1
        self.counts: Dict[Tuple[str, ...], Dict[str, int]] = {}
        self.context_totals: Dict[Tuple[str, ...], int] = {}
        self._ranked: Optional[List[str]] = None
        self._prob_cache: Dict[Tuple[Tuple[str, ...], str], float] = {}

    # -- training ------------------------------------------------------------

    def _add(self, context: Tuple[str, ...], word: str, n: int = 1) -> None:
        for start in range(len(context) + 1):
            ctx = context[start:]
            bucket = self.counts.setdefault(ctx, {})
            bucket[word] = bucket.get(word, 0) + n
            self.context_totals[ctx] = self.context_totals.get(ctx, 0) + n

    def add_sentence(self, tokens: Sequence[str]) -> None:
        padded = [BOS] * (self.order - 1) + list(tokens)
        events = list(tokens) + ([EOS] if self.eos else [])
        for i, event in enumerate(events):
            context = tuple(padded[i : i + self.order - 1])
            self._add(context, event)
        self._ranked = None
        self._prob_cache.clear()

    # -- probabilities -------------------------------------------------------

    @property
    def vocabulary(self) -> Dict[str, int]:
        """Seen event words (EOS included when modeled) with raw counts."""
        return self.counts.get((), {})

    def ranked_words(self) -> List[str]:
        """Vocabulary by descending frequency, ties alphabetical."""
        if self._ranked is None:
            vocab = self.vocabulary
            self._ranked = sorted(vocab, key=lambda w: (-vocab[w], w))
        return self._ranked

    def prob(self, word: str, context: Sequence[str]) -> float:
        """p(word | last order-1 context tokens), backing off as needed."""
        ctx = tuple(context)[max(0, len(context) - (self.order - 1)) :]
        return self._prob(word, ctx)

    def _prob(self, word: str, ctx: Tuple[str, ...]) -> float:
        key = (ctx, word)
        cached = self._prob_cache.get(key)
        if cached is not None:
            return cached
        vocab_size = len(self.vocabulary)
        if vocab_size == 0:
            raise LmError("model has no training data")
        if len(ctx) == 0:
            bucket = self.counts[()]
            total = self.context_totals[()]
            c = bucket.get(word, 0)
            p = max(c - self.discount, 0.0) / total + (
                self.discount * len(bucket) / total
            ) * (1.0 / vocab_size)
        else:
            bucket = self.counts.get(ctx)
            if not bucket:
                p = self._prob(word, ctx[1:])
            else:
                total = self.context_totals[ctx]
                c = bucket.get(word, 0)
                lower = self._prob(word, ctx[1:])
                p = max(c - self.discount, 0.0) / total + (
                    self.discount * len(bucket) / total
                ) * lower
        self._prob_cache[key] = p
        return p

    def sequence_logprob(self, tokens: Sequence[str], include_eos: Optional[bool] = None) -> Tuple[float, int]:
        """Total natural-log probability and the number of scored events."""
        if include_eos is None:
            include_eos = self.eos
        if include_eos and not self.eos:
            raise LmError("model was trained without an end-of-sentence event")
        padded = [BOS] * (self.order - 1) + list(tokens)
        events = list(tokens) + ([EOS] if include_eos else [])
        total = 0.0
        for i, event in enumerate(events):
            context = tuple(padded[i : i + self.order - 1])
            total += math.log(self._prob(event, context))
        return total, len(events)

    def sentence_perplexity(self, tokens: Sequence[str], include_eos: Optional[bool] = None) -> float:
        logprob, n_events = self.sequence_logprob(tokens, include_eos)
        if n_events == 0:
            raise LmError("cannot score an empty sentence")
        return math.exp(-logprob / n_events)

    # -- persistence ---------------------------------------------------------

    def save(self, path: str | Path) -> None:
        """JSON-lines: a manifest line, then (context, word, count) records."""
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(
                json.dumps(
                    {
                        "format": "ngram-counts",
                        "version": MODEL_FORMAT_VERSION,
                        "order": self.order,
                        "discount": self.discount,
                        "eos": self.eos,
                    }
                )
                + "\n"
            )
            # only maximal contexts are stored; lower orders rebuild on load
            for ctx in sorted(self.counts):
                if len(ctx) != self.order - 1:
                    continue
                bucket = self.counts[ctx]
                for word in sorted(bucket):
                    fh.write(
                        json.dumps({"context": list(ctx), "word": word, "count": bucket[word]})
                        + "\n"
                    )

    @staticmethod
    def load(path: str | Path) -> "NgramModel":
        with open(path, "r", encoding="utf-8") as fh:
            header = fh.readline()
            try:
                manifest = json.loads(header)
            except json.JSONDecodeError as exc:
                raise LmError(f"{path}: bad model header: {exc}") from exc
            if manifest.get("format") != "ngram-counts" or manifest.get("version") != MODEL_FORMAT_VERSION:
                raise LmError(f"{path}: unsupported model format {manifest!r}")
            model = NgramModel(manifest["order"], manifest["discount"], manifest.get("eos", True))
            for lineno, line in enumerate(fh, 2):
                line = line.strip()
                if not line:
                    continue
                rec = json.loads(line)
                ctx = tuple(rec["context"])
                if len(ctx) != model.order - 1:
                    raise LmError(f"{path}:{lineno}: context length {len(ctx)} for order {model.order}")
                model._add(ctx, rec["word"], rec["count"])
        return model


def train_ngram(
    corpus: Iterable[Sequence[str]],
    order: int = 3,
    discount: float = 0.75,
    eos: bool = True,
) -> NgramModel:
    """Train on token lists; deterministic for a fixed input ordering."""
    model = NgramModel(order, discount, eos)
    n = 0
    for tokens in corpus:
        if tokens:
            model.add_sentence(tokens)
            n += 1
    if n == 0:
        raise LmError("cannot train on an empty corpus")
    return model


def perplexity(model: Scorer, tokens: Sequence[str], include_eos: Optional[bool] = None) -> float:
    """Per-sentence perplexity under any Scorer."""
    return model.sentence_perplexity(tokens, include_eos)


# --- mask filling -----------------------------------------------------------


class NgramMaskFiller:
    """Greedy left-to-right filler over the model's frequent-word pool."""

    def __init__(self, model: NgramModel, pool_size: int = DEFAULT_POOL_SIZE):
        self.model = model
        self.pool_size = pool_size
        self._pool_cache: Dict[frozenset, Tuple[str, ...]] = {}

    def _pool(self, constraint: FillConstraint) -> Tuple[str, ...]:
        if constraint.candidate_pool is not None:
            pool = tuple(w for w in constraint.candidate_pool if constraint.allows(w))
        else:
            cached = self._pool_cache.get(constraint.excluded_words)
            if cached is not None:
                return cached
            top = self.model.ranked_words()[: self.pool_size]
            pool = tuple(w for w in top if constraint.allows(w))
            self._pool_cache[constraint.excluded_words] = pool
        return pool

    def fill(self, context: Sequence[str], slots: Sequence[str], constraint: FillConstraint) -> List[str]:
        pool = self._pool(constraint)
        if not pool:
            raise LmError("candidate pool is empty after exclusions")
        working = list(context) + [SEP] + list(slots)
        offset = len(context) + 1
        for i in range(offset, len(working)):
            if working[i] != MASK:
                continue
            right = None
            if i + 1 < len(working):
                if working[i + 1] != MASK:
                    right = working[i + 1]
            elif self.model.eos:
                right = EOS
            best_word = None
            best_score = -1.0
            for word in pool:
                score = self.model.prob(word, working[max(0, i - (self.model.order - 1)) : i])
                if right is not None:
                    ctx = working[max(0, i - (self.model.order - 2)) : i] + [word] if self.model.order > 1 else []
                    score *= self.model.prob(right, ctx)
                if score > best_score:
                    best_score = score
                    best_word = word
            working[i] = best_word
        return working[offset:]


def fill_slots(
    context: Sequence[str],
    slots: Sequence[str],
    constraint: FillConstraint,
    filler: MaskFiller,
) -> List[str]:
    """Fill every [MASK] slot; validates the filler held the contract."""
    out = list(filler.fill(context, slots, constraint))
    if len(out) != len(slots):
        raise LmError(f"filler returned {len(out)} tokens for {len(slots)} slots")
    for j, (slot, word) in enumerate(zip(slots, out)):
        if slot != MASK:
            if word != slot:
                raise LmError(f"filler changed non-mask slot {j}: {slot!r} -> {word!r}")
        else:
            if word == MASK or not constraint.allows(word):
                raise LmError(f"filler produced excluded token {word!r} at slot {j}")
    return out


# --- remote clients ---------------------------------------------------------


class RemoteScorer:
    """Client for POST /ppl: {"tokens": [...]} -> {"ppl": float}."""

    def __init__(self, endpoint: str, timeout: float = 10.0):
        self.endpoint = endpoint.rstrip("/")
        self.timeout = timeout

    def sentence_perplexity(self, tokens: Sequence[str], include_eos: Optional[bool] = None) -> float:
        url = f"{self.endpoint}/ppl"
        try:
            resp = requests.post(url, json={"tokens": list(tokens)}, timeout=self.timeout)
        except requests.RequestException as exc:
            raise LmError(f"scoring service unreachable at {url}: {exc}") from exc
        if resp.status_code != 200:
            raise LmError(f"scoring service at {url} returned {resp.status_code}")
        try:
            ppl = float(resp.json()["ppl"])
        except (ValueError, KeyError, TypeError) as exc:
            raise LmError(f"malformed response from {url}: {exc}") from exc
        if not math.isfinite(ppl) or ppl <= 0:
            raise LmError(f"scoring service at {url} returned bad perplexity {ppl!r}")
        return ppl


class RemoteMaskFiller:
    """Client for POST /fill:
    {"context": [...], "slots": [...], "restricted": [...]} -> {"tokens": [...]}.
    """

    def __init__(self, endpoint: str, timeout: float = 10.0):
        self.endpoint = endpoint.rstrip("/")
        self.timeout = timeout

    def fill(self, context: Sequence[str], slots: Sequence[str], constraint: FillConstraint) -> List[str]:
        url = f"{self.endpoint}/fill"
        payload = {
            "context": list(context),
            "slots": list(slots),
            "restricted": sorted(constraint.excluded_words),
        }
        try:
            resp = requests.post(url, json=payload, timeout=self.timeout)
        except requests.RequestException as exc:
            raise LmError(f"fill service unreachable at {url}: {exc}") from exc
        if resp.status_code != 200:
            raise LmError(f"fill service at {url} returned {resp.status_code}")
        try:
            tokens = list(resp.json()["tokens"])
        except (ValueError, KeyError, TypeError) as exc:
            raise LmError(f"malformed response from {url}: {exc}") from exc
        return tokens
