"""Candidate generation: match source words into retrieved POS templates.

For a source sentence x (with BW at restricted positions) and one
retrieved BW-free template, matching considers each shared tag t:

  W_t = occurrences of x's words tagged t, in source order
  S_t = template positions carrying t, ascending

and enumerates injective assignments of words to positions.  With
N = |W_t| and M = |S_t| there are exactly P(max(N, M), min(N, M)) =
max! / (max - min)! assignments: when N >= M every position gets a word
(ordered selections of words), otherwise every word gets a position
(ordered selections of positions).  Unmatched positions stay [MASK] and
unmatched words are dropped.  Restricted words never participate since
BW is excluded from the shared tags.

A template's candidates are the cross product of per-tag assignments
(tags in sorted order), starting from the all-[MASK] candidate, so the
pre-cap candidate count obeys the product law over per-tag assignment
counts.  Caps bound the blow-up per tag, per template and per sentence.
"""

from __future__ import annotations

import itertools
import json
import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .corpus import RestrictedVocab
from .lm import MASK, FillConstraint, MaskFiller, fill_slots
from .postag import BW, TaggedSentence

logger = logging.getLogger(__name__)


class GenerateError(Exception):
    """Raised for malformed matching inputs."""


@dataclass(frozen=True)
class WordOccurrence:
    word: str
    source_position: int


@dataclass(frozen=True)
class TagMatch:
    tag: str
    words: Tuple[WordOccurrence, ...]   # source order
    positions: Tuple[int, ...]          # ascending template positions


@dataclass(frozen=True)
class MatchPlan:
    source_id: str
    template: Tuple[str, ...]
    shared: Tuple[TagMatch, ...]        # sorted by tag


@dataclass(frozen=True)
class Assignment:
    """Injective map of word occurrences to template positions."""

    pairs: Tuple[Tuple[WordOccurrence, int], ...]


@dataclass(frozen=True)
class CandidateSlots:
    """A template instance: words placed, the rest [MASK]."""

    slots: Tuple[str, ...]
    template: Tuple[str, ...]
    source_id: str


@dataclass(frozen=True)
class GenerationCaps:
    per_tag: int = 24
    per_template: int = 64
    per_sentence: int = 640


def permutation_count(n: int, k: int) -> int:
    """P(n, k) = n! / (n - k)!"""
    return math.perm(n, k)


def plan_match(x: TaggedSentence, template: Sequence[str]) -> MatchPlan:
    """Shared-tag word/position bookkeeping for one template."""
    template = tuple(template)
    if not template:
        raise GenerateError("empty template")
    if BW in template:
        raise GenerateError(f"template contains BW: {template!r}")
    source_tags = set(x.tags)
    shared_tags = sorted((source_tags & set(template)) - {BW})
    matches = []
    for tag in shared_tags:
        words = tuple(
            WordOccurrence(tok, j)
            for j, (tok, t) in enumerate(zip(x.tokens, x.tags))
            if t == tag
        )
        positions = tuple(j for j, t in enumerate(template) if t == tag)
        matches.append(TagMatch(tag, words, positions))
    return MatchPlan(x.id, template, tuple(matches))


def enumerate_assignments(
    words: Sequence[WordOccurrence],
    positions: Sequence[int],
    cap: Optional[int] = None,
) -> List[Assignment]:
    """All injective word-to-position assignments for one tag, capped.

    Without a cap the result has exactly P(max(N, M), min(N, M))
    assignments.  Enumeration is lexicographic: over word-occurrence
    order when words are plentiful (N >= M), over the ascending position
    list when slots are plentiful (N < M).
    """
    words = tuple(words)
    positions = tuple(sorted(positions))
    n, m = len(words), len(positions)
    out: List[Assignment] = []
    if n >= m:
        combos = itertools.permutations(words, m)
        for chosen in combos:
            out.append(Assignment(tuple(zip(chosen, positions))))
            if cap is not None and len(out) >= cap:
                break
    else:
        for chosen_pos in itertools.permutations(positions, n):
            out.append(Assignment(tuple(zip(words, chosen_pos))))
            if cap is not None and len(out) >= cap:
                break
    return out


def apply_assignment(assignment: Assignment, candidate: CandidateSlots) -> CandidateSlots:
    """Place the assignment's words into [MASK] slots; never overwrites."""
    slots = list(candidate.slots)
    for occ, pos in assignment.pairs:
        if slots[pos] != MASK:
            raise GenerateError(f"slot {pos} already filled with {slots[pos]!r}")
        slots[pos] = occ.word
    return CandidateSlots(tuple(slots), candidate.template, candidate.source_id)


def match_candidates(
    x: TaggedSentence,
    template: Sequence[str],
    caps: GenerationCaps = GenerationCaps(),
) -> List[CandidateSlots]:
    """All capped template instances for one retrieved template."""
    plan = plan_match(x, template)
    base = CandidateSlots(tuple([MASK] * len(plan.template)), plan.template, x.id)
    per_tag = [
        enumerate_assignments(tm.words, tm.positions, caps.per_tag)
        for tm in plan.shared
    ]
    counts = {tm.tag: len(a) for tm, a in zip(plan.shared, per_tag)}
    logger.debug(
        json.dumps(
            {
                "event": "assignments",
                "source_id": x.id,
                "template_len": len(plan.template),
                "per_tag_counts": counts,
                "product": math.prod(counts.values()) if counts else 1,
            }
        )
    )
    candidates: List[CandidateSlots] = []
    for combo in itertools.product(*per_tag):
        cand = base
        for assignment in combo:
            cand = apply_assignment(assignment, cand)
        candidates.append(cand)
        if len(candidates) >= caps.per_template:
            logger.debug(
                json.dumps(
                    {"event": "cap", "which": "per_template", "source_id": x.id}
                )
            )
            break
    return candidates


def generate_candidates(
    x: TaggedSentence,
    templates: Sequence[Sequence[str]],
    filler: MaskFiller,
    vocab: RestrictedVocab,
    caps: GenerationCaps = GenerationCaps(),
) -> List[Tuple[str, ...]]:
    """Filled, deduplicated candidate sentences across all templates.

    The fill context is the source sentence itself; the filler sees
    "x tokens [SEP] slots".  Duplicate outputs keep first occurrence.
    Filler failures propagate to the caller.
    """
    constraint = FillConstraint.for_vocab(vocab)
    seen: Dict[Tuple[str, ...], None] = {}
    total = 0
    for template in templates:
        for cand in match_candidates(x, template, caps):
            if total >= caps.per_sentence:
                logger.debug(
                    json.dumps(
                        {"event": "cap", "which": "per_sentence", "source_id": x.id}
                    )
                )
                break
            total += 1
            filled = tuple(fill_slots(x.tokens, cand.slots, constraint, filler))
            if filled not in seen:
                seen[filled] = None
        else:
            continue
        break
    return list(seen.keys())
