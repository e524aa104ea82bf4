"""End-to-end transfer orchestration shared by the CLI commands.

A pipeline bundles the loaded artifacts (restricted vocabulary, POS
index, n-gram model) with the pluggable backends (tagger, filler,
scorer, editor) and rewrites one sentence at a time:

  tag -> substitute BW -> retrieve templates -> generate candidates
  [-> edit] -> filter + score -> select

Non-offensive inputs pass through unchanged.  When editing wipes out
every restricted-free candidate the unedited set is rescored; when
generation itself fails the restricted tokens are simply deleted (the
deletion baseline).  Every fallback is marked on the result and
reported on the diagnostics stream.
"""

from __future__ import annotations

import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import IO, Iterable, List, Optional, Sequence

from .corpus import (
    OFFENSIVE,
    LabeledSentence,
    RestrictedVocab,
    is_restricted,
    label_for,
)
from .edit import EditError, EditorConfig, edit_candidates
from .generate import GenerationCaps, generate_candidates
from .lm import LmError, MaskFiller, NgramMaskFiller, NgramModel, Scorer
from .postag import Tagger, substitute_bw, tag_sentence
from .retrieve import PosIndex, query_similar
from .selection import (
    EmptyAfterFilter,
    TransferResult,
    score_candidates,
    select_best,
)

RGS = "rgs"
RGES = "rges"


def emit_diagnostic(stream: Optional[IO[str]] = None, **fields) -> None:
    """One JSON-lines diagnostic record on stderr (or a given stream)."""
    print(json.dumps(fields, ensure_ascii=False), file=stream or sys.stderr)


@dataclass
class TransferPipeline:
    vocab: RestrictedVocab
    index: PosIndex
    tagger: Tagger
    filler: MaskFiller
    scorer: Scorer
    k: int = 10
    caps: GenerationCaps = field(default_factory=GenerationCaps)
    editor: EditorConfig = field(default_factory=EditorConfig)
    editor_fallback: bool = False
    diagnostics: Optional[IO[str]] = None

    def _diag(self, **fields) -> None:
        emit_diagnostic(self.diagnostics, **fields)

    def _rem_result(self, sent: LabeledSentence, reason: str) -> TransferResult:
        output = tuple(t for t in sent.tokens if not is_restricted(self.vocab, t))
        self._diag(event="fallback", id=sent.id, mode="delete-restricted", reason=reason)
        return TransferResult(sent, output, None, 0, fallback_used=True)

    def transfer_sentence(self, sent: LabeledSentence, variant: str = RGS) -> TransferResult:
        if variant not in (RGS, RGES):
            raise ValueError(f"unknown variant {variant!r}")
        if label_for(sent.tokens, self.vocab) != OFFENSIVE:
            return TransferResult(
                sent, sent.tokens, None, 0, fallback_used=False, passthrough=True
            )
        tagged = substitute_bw(tag_sentence(sent, self.tagger), self.vocab)
        hits = query_similar(self.index, tagged.pos_sequence, k=self.k)
        templates = [h.sequence for h in hits]
        try:
            candidates = generate_candidates(
                tagged, templates, self.filler, self.vocab, self.caps
            )
        except LmError as exc:
            return self._rem_result(sent, f"fill failed: {exc}")
        if not candidates:
            return self._rem_result(sent, "no candidates generated")

        fallback_used = False
        pool: Sequence = candidates
        if variant == RGES:
            try:
                pool = edit_candidates(candidates, self.editor)
            except EditError as exc:
                if not self.editor_fallback:
                    raise
                self._diag(
                    event="fallback", id=sent.id, mode="unedited",
                    reason=f"editor failed after {exc.edited_count}: {exc}",
                )
                pool = candidates
                fallback_used = True
        try:
            scored = score_candidates(sent.tokens, pool, self.scorer, self.vocab)
        except EmptyAfterFilter:
            if variant == RGES and pool is not candidates:
                self._diag(
                    event="fallback", id=sent.id, mode="unedited",
                    reason="every edited candidate contained a restricted word",
                )
                fallback_used = True
                try:
                    scored = score_candidates(
                        sent.tokens, candidates, self.scorer, self.vocab
                    )
                except EmptyAfterFilter:
                    return self._rem_result(sent, "no restricted-free candidate")
            else:
                return self._rem_result(sent, "no restricted-free candidate")
        best = select_best(scored)
        return TransferResult(
            sent, best.tokens, best, len(candidates), fallback_used=fallback_used
        )

    def transfer_corpus(
        self,
        sentences: Sequence[LabeledSentence],
        variant: str = RGS,
        jobs: int = 1,
    ) -> List[TransferResult]:
        """Rewrite sentences; output order always equals input order."""
        if jobs <= 1:
            return [self.transfer_sentence(s, variant) for s in sentences]
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(lambda s: self.transfer_sentence(s, variant), sentences))


def build_filler(model: NgramModel, pool_size: int) -> NgramMaskFiller:
    return NgramMaskFiller(model, pool_size)


def save_results(results: Iterable[TransferResult], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for res in results:
            fh.write(json.dumps(res.to_record(), ensure_ascii=False) + "\n")


def load_results(path) -> List[dict]:
    """Parse a results file; bad lines name their line number."""
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
                rec["source_tokens"], rec["output"]
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ValueError(f"{path}:{lineno}: malformed result record: {exc}") from exc
            records.append(rec)
    return records
