"""Rewrite sentences containing restricted words into clean paraphrases.

The pipeline retrieves part-of-speech templates similar to the source
sentence, generates candidates by matching and mask-filling, optionally
edits them for fluency, and selects the best candidate by a combined
content/fluency score.  Evaluation metrics and a delete-only baseline
are included.
"""

from __future__ import annotations

from .corpus import (
    CorpusError,
    EmptyVocab,
    LabeledSentence,
    NON_OFFENSIVE,
    OFFENSIVE,
    RestrictedVocab,
    build_corpus,
    build_splits,
    is_restricted,
    label_for,
    load_corpus,
    load_restricted_vocab,
    normalize_token,
    save_corpus,
)
from .edit import EditError, EditorConfig, EditPair, synthesize_edit_corpus
from .generate import GenerateError, GenerationCaps, generate_candidates, plan_match
from .lm import (
    LmError,
    NgramMaskFiller,
    NgramModel,
    RemoteMaskFiller,
    RemoteScorer,
    train_ngram,
)
from .metrics import (
    EmbeddingTable,
    EvalReport,
    MetricsError,
    bleu_corpus,
    fu_content_preservation,
    meteor,
    rouge_l,
    transfer_accuracy,
)
from .pipeline import RGES, RGS, TransferPipeline
from .postag import (
    BuiltinTagger,
    InvalidToken,
    RemoteTagger,
    TaggedSentence,
    TaggerError,
    substitute_bw,
    tag_sentence,
)
from .retrieve import PosIndex, RetrievalError, build_index, load_index, query_similar, save_index
from .selection import (
    EmptyAfterFilter,
    ScoredCandidate,
    SelectionError,
    TransferResult,
    select_best,
    sentence_bleu,
)

__version__ = "0.1.0"

__all__ = [
    "BuiltinTagger",
    "CorpusError",
    "EditError",
    "EditorConfig",
    "EditPair",
    "EmbeddingTable",
    "EmptyAfterFilter",
    "EmptyVocab",
    "EvalReport",
    "GenerateError",
    "GenerationCaps",
    "InvalidToken",
    "LabeledSentence",
    "LmError",
    "MetricsError",
    "NON_OFFENSIVE",
    "NgramMaskFiller",
    "NgramModel",
    "OFFENSIVE",
    "PosIndex",
    "RemoteMaskFiller",
    "RemoteScorer",
    "RemoteTagger",
    "RestrictedVocab",
    "RetrievalError",
    "RGES",
    "RGS",
    "ScoredCandidate",
    "SelectionError",
    "TaggedSentence",
    "TaggerError",
    "TransferPipeline",
    "TransferResult",
    "bleu_corpus",
    "build_corpus",
    "build_index",
    "build_splits",
    "fu_content_preservation",
    "generate_candidates",
    "is_restricted",
    "label_for",
    "load_corpus",
    "load_index",
    "load_restricted_vocab",
    "meteor",
    "normalize_token",
    "plan_match",
    "query_similar",
    "rouge_l",
    "save_corpus",
    "save_index",
    "select_best",
    "sentence_bleu",
    "substitute_bw",
    "synthesize_edit_corpus",
    "tag_sentence",
    "train_ngram",
    "transfer_accuracy",
]
