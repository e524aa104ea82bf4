"""Command-line front end.

Subcommands, one concern each:

  build         raw text -> labeled + tagged JSON-lines corpus + splits
  index         tagged corpus -> TF-IDF POS index on disk
  train-lm      corpus -> n-gram model file
  synth-edit    corpus + artifacts -> parallel edit-training pairs (TSV)
  transfer      sentences + artifacts -> rewritten results (JSON-lines)
  evaluate      results + artifacts -> metric report (JSON + TSV row)
  rem-baseline  sentences -> results with restricted tokens deleted

Options can come from a config file of simple `key = value` lines
(strings, numbers, booleans; `#` comments); command-line flags win over
file values.  stdout carries results only; diagnostics go to stderr as
JSON lines.  Exit code 0 means the command's postcondition held.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from . import corpus as corpus_mod
from . import edit as edit_mod
from . import lm as lm_mod
from . import metrics as metrics_mod
from . import pipeline as pipeline_mod
from . import postag as postag_mod
from . import retrieve as retrieve_mod
from .corpus import (
    NON_OFFENSIVE,
    OFFENSIVE,
    LabeledSentence,
    RestrictedVocab,
)
from .edit import EditorConfig
from .generate import GenerationCaps
from .pipeline import TransferPipeline, emit_diagnostic


class CliError(Exception):
    """User-facing command failure; message printed, exit code 1."""


# --- config file ------------------------------------------------------------


def parse_config_file(path: str | Path) -> Dict[str, str]:
    """Flat `key = value` pairs; quotes optional, `#` starts a comment."""
    values: Dict[str, str] = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read config file {path}: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise CliError(f"{path}:{lineno}: expected `key = value`")
        key, _, value = stripped.partition("=")
        value = value.split("#", 1)[0].strip()
        if len(value) >= 2 and value[0] == value[-1] and value[0] in "\"'":
            value = value[1:-1]
        values[key.strip()] = value
    return values


def _merge_option(args: argparse.Namespace, config: Dict[str, str], name: str,
                  cast=str, default=None):
    """Flag wins, then config file, then default."""
    flag_val = getattr(args, name.replace("-", "_"), None)
    if flag_val is not None:
        return flag_val
    if name in config:
        raw = config[name]
        if cast is bool:
            return raw.lower() in ("1", "true", "yes", "on")
        return cast(raw)
    return default


# --- shared loading helpers ---------------------------------------------------


def _require_path(path: Optional[str], what: str) -> Path:
    if not path:
        raise CliError(f"missing required {what} path")
    p = Path(path)
    if not p.exists():
        raise CliError(f"{what} not found: {p}")
    return p


def _load_input_sentences(path: Path, vocab: RestrictedVocab) -> List[LabeledSentence]:
    """JSON-lines corpus records or plain text, one sentence per line.

    Labels always come from a fresh vocabulary scan so routing never
    trusts stale file labels.
    """
    sentences: List[LabeledSentence] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("{"):
                try:
                    rec = json.loads(line)
                    sid = rec.get("id", f"in{lineno:08d}")
                    tokens = tuple(rec["tokens"])
                except (json.JSONDecodeError, KeyError, TypeError) as exc:
                    raise CliError(f"{path}:{lineno}: bad input record: {exc}") from exc
            else:
                sid = f"in{lineno:08d}"
                tokens = tuple(corpus_mod.tokenize_sentence(line))
            if not tokens:
                continue
            sentences.append(
                LabeledSentence(sid, tokens, corpus_mod.label_for(tokens, vocab))
            )
    if not sentences:
        raise CliError(f"no input sentences in {path}")
    return sentences


def _make_tagger(mode: str, endpoint: Optional[str]) -> postag_mod.Tagger:
    if mode == "builtin":
        return postag_mod.BuiltinTagger()
    if mode == "remote":
        if not endpoint:
            raise CliError("remote tagger needs --tagger-endpoint")
        return postag_mod.RemoteTagger(endpoint)
    raise CliError(f"unknown tagger mode {mode!r}")


def _caps_from(args, config) -> GenerationCaps:
    return GenerationCaps(
        per_tag=_merge_option(args, config, "cap-per-tag", int, 24),
        per_template=_merge_option(args, config, "cap-per-template", int, 64),
        per_sentence=_merge_option(args, config, "cap-per-sentence", int, 640),
    )


# --- subcommands --------------------------------------------------------------


def cmd_build(args: argparse.Namespace, config: Dict[str, str]) -> int:
    vocab = corpus_mod.load_restricted_vocab(_require_path(args.vocab, "vocabulary"))
    input_path = _require_path(args.input, "raw input")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    filters = corpus_mod.load_noise_filters(args.filters)
    with open(input_path, "r", encoding="utf-8") as fh:
        sentences = corpus_mod.build_corpus(
            fh, vocab, min_len=args.min_len, max_len=args.max_len, filters=filters
        )
    if not sentences:
        raise CliError(f"no usable sentences extracted from {input_path}")
    tagger = _make_tagger(args.tagger, args.tagger_endpoint)
    tagged = [
        postag_mod.substitute_bw(postag_mod.tag_sentence(s, tagger), vocab)
        for s in sentences
    ]
    proportions = tuple(float(x) for x in args.proportions.split(","))
    if len(proportions) != 3:
        raise CliError(f"--proportions needs three comma-separated values")
    splits = corpus_mod.build_splits(
        sentences,
        proportions,  # type: ignore[arg-type]
        subsample_nonoffensive_to=args.subsample_nonoffensive,
        seed=args.seed,
    )
    corpus_mod.save_corpus(out_dir / "corpus.jsonl", tagged)
    split_ids = {name: [s.id for s in part] for name, part in splits}
    (out_dir / "splits.json").write_text(
        json.dumps({"seed": args.seed, "proportions": list(proportions), **split_ids})
        + "\n",
        encoding="utf-8",
    )
    tagged_by_id = {t.id: t for t in tagged}
    for name, part in splits:
        corpus_mod.save_corpus(out_dir / f"{name}.jsonl", [tagged_by_id[s.id] for s in part])
    n_off = sum(1 for s in sentences if s.label == OFFENSIVE)
    summary = {
        "sentences": len(sentences),
        "offensive": n_off,
        "non_offensive": len(sentences) - n_off,
        "train": len(splits.train),
        "validation": len(splits.validation),
        "test": len(splits.test),
    }
    print(json.dumps(summary))
    return 0


def cmd_index(args: argparse.Namespace, config: Dict[str, str]) -> int:
    tagged = postag_mod.load_tagged_corpus(_require_path(args.corpus, "corpus"))
    sequences = [t.pos_sequence for t in tagged if t.label == args.label]
    if not sequences:
        raise CliError(f"no {args.label} sentences in {args.corpus}")
    index = retrieve_mod.build_index(sequences)
    retrieve_mod.save_index(index, args.out)
    print(json.dumps({"documents": index.doc_count, "sequences": len(sequences)}))
    return 0


def cmd_train_lm(args: argparse.Namespace, config: Dict[str, str]) -> int:
    sentences = corpus_mod.load_corpus(_require_path(args.corpus, "corpus"))
    selected = [s.tokens for s in sentences if args.label in ("any", s.label)]
    if not selected:
        raise CliError(f"no {args.label} sentences in {args.corpus}")
    model = lm_mod.train_ngram(selected, order=args.order, discount=args.discount)
    model.save(args.out)
    print(
        json.dumps(
            {"sentences": len(selected), "order": model.order,
             "vocabulary": len(model.vocabulary)}
        )
    )
    return 0


def cmd_synth_edit(args: argparse.Namespace, config: Dict[str, str]) -> int:
    vocab = corpus_mod.load_restricted_vocab(_require_path(args.vocab, "vocabulary"))
    tagged = postag_mod.load_tagged_corpus(_require_path(args.corpus, "corpus"))
    index = retrieve_mod.load_index(_require_path(args.index, "index"))
    model = lm_mod.NgramModel.load(_require_path(args.lm, "language model"))
    filler = lm_mod.NgramMaskFiller(model, args.pool_size)
    clean = [
        LabeledSentence(t.id, t.tokens, t.label)
        for t in tagged
        if t.label == NON_OFFENSIVE
    ]
    pairs = edit_mod.synthesize_edit_corpus(
        clean,
        index,
        postag_mod.BuiltinTagger() if args.tagger == "builtin"
        else _make_tagger(args.tagger, args.tagger_endpoint),
        filler,
        vocab,
        sample_n=args.sample_n,
        seed=args.seed,
        k=args.k,
        caps=_caps_from(args, config),
    )
    edit_mod.save_edit_pairs(pairs, args.out)
    sampled = min(args.sample_n, len(clean))
    emit_diagnostic(
        event="synth-edit", sampled=sampled, pairs=len(pairs),
        pairs_per_sentence=round(len(pairs) / max(sampled, 1), 2),
    )
    print(json.dumps({"pairs": len(pairs), "sampled_sentences": sampled}))
    return 0


def _build_pipeline(args, config) -> TransferPipeline:
    vocab = corpus_mod.load_restricted_vocab(_require_path(args.vocab, "vocabulary"))
    index = retrieve_mod.load_index(_require_path(args.index, "index"))
    model = lm_mod.NgramModel.load(_require_path(args.lm, "language model"))
    tagger = _make_tagger(args.tagger, args.tagger_endpoint)
    if args.filler == "ngram":
        filler = lm_mod.NgramMaskFiller(model, args.pool_size)
    elif args.filler == "remote":
        if not args.filler_endpoint:
            raise CliError("remote filler needs --filler-endpoint")
        filler = lm_mod.RemoteMaskFiller(args.filler_endpoint)
    else:
        raise CliError(f"unknown filler mode {args.filler!r}")
    if args.scorer == "ngram":
        scorer = model
    elif args.scorer == "remote":
        if not args.scorer_endpoint:
            raise CliError("remote scorer needs --scorer-endpoint")
        scorer = lm_mod.RemoteScorer(args.scorer_endpoint)
    else:
        raise CliError(f"unknown scorer mode {args.scorer!r}")
    editor = EditorConfig(
        mode=args.editor,
        endpoint=args.editor_endpoint,
        beam_size=args.editor_beam_size,
        max_len=args.editor_max_len,
    )
    return TransferPipeline(
        vocab=vocab,
        index=index,
        tagger=tagger,
        filler=filler,
        scorer=scorer,
        k=args.k,
        caps=_caps_from(args, config),
        editor=editor,
        editor_fallback=args.editor_fallback,
    )


def cmd_transfer(args: argparse.Namespace, config: Dict[str, str]) -> int:
    pipe = _build_pipeline(args, config)
    sentences = _load_input_sentences(_require_path(args.input, "input"), pipe.vocab)
    try:
        results = pipe.transfer_corpus(sentences, variant=args.variant, jobs=args.jobs)
    except edit_mod.EditError as exc:
        raise CliError(f"editing failed (no --editor-fallback given): {exc}") from exc
    pipeline_mod.save_results(results, args.out)
    n_off = sum(1 for r in results if not r.passthrough)
    print(
        json.dumps(
            {
                "results": len(results),
                "offensive": n_off,
                "passthrough": len(results) - n_off,
                "fallbacks": sum(1 for r in results if r.fallback_used),
            }
        )
    )
    return 0


def cmd_rem_baseline(args: argparse.Namespace, config: Dict[str, str]) -> int:
    vocab = corpus_mod.load_restricted_vocab(_require_path(args.vocab, "vocabulary"))
    sentences = _load_input_sentences(_require_path(args.input, "input"), vocab)
    results = []
    for sent in sentences:
        if sent.label == OFFENSIVE:
            output = tuple(
                t for t in sent.tokens if not corpus_mod.is_restricted(vocab, t)
            )
            results.append(
                pipeline_mod.TransferResult(sent, output, None, 0, fallback_used=False)
            )
        else:
            results.append(
                pipeline_mod.TransferResult(
                    sent, sent.tokens, None, 0, fallback_used=False, passthrough=True
                )
            )
    pipeline_mod.save_results(results, args.out)
    print(json.dumps({"results": len(results)}))
    return 0


def cmd_evaluate(args: argparse.Namespace, config: Dict[str, str]) -> int:
    vocab = corpus_mod.load_restricted_vocab(_require_path(args.vocab, "vocabulary"))
    model = lm_mod.NgramModel.load(_require_path(args.lm, "language model"))
    try:
        records = pipeline_mod.load_results(_require_path(args.results, "results"))
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    if not records:
        raise CliError(f"no records in {args.results}")
    hyps = [list(r["output"]) for r in records]
    srcs = [list(r["source_tokens"]) for r in records]
    fucp = None
    if args.embeddings:
        table = metrics_mod.EmbeddingTable.load(_require_path(args.embeddings, "embeddings"))
        fucp = metrics_mod.fu_content_preservation(hyps, srcs, table)
    report = metrics_mod.EvalReport(
        bleu=metrics_mod.bleu_corpus(hyps, srcs),
        rouge=metrics_mod.rouge_l(hyps, srcs),
        meteor=metrics_mod.meteor(hyps, srcs),
        fucp=fucp,
        accuracy=metrics_mod.transfer_accuracy(hyps, vocab),
        avg_ppl=metrics_mod.avg_perplexity([h for h in hyps if h] or hyps, model),
        n=len(records),
    )
    print(report.to_json())
    print(report.tsv_row())
    return 0


# --- argument wiring ----------------------------------------------------------


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value config file; flags win")
    p.add_argument("--seed", type=int, default=0)


def _add_caps(p: argparse.ArgumentParser) -> None:
    p.add_argument("--cap-per-tag", type=int, default=24)
    p.add_argument("--cap-per-template", type=int, default=64)
    p.add_argument("--cap-per-sentence", type=int, default=640)


def _add_tagger(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tagger", choices=["builtin", "remote"], default="builtin")
    p.add_argument("--tagger-endpoint")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="redactor",
        description="Rewrite sentences containing restricted words into "
        "restricted-word-free paraphrases.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="ingest raw text into a labeled, tagged corpus")
    p.add_argument("--input", required=True, help="raw text, one comment per line")
    p.add_argument("--vocab", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--min-len", type=int, default=5)
    p.add_argument("--max-len", type=int, default=20)
    p.add_argument("--filters", help="noise filter JSON (defaults to bundled set)")
    p.add_argument("--proportions", default="0.8,0.1,0.1")
    p.add_argument("--subsample-nonoffensive", type=int, default=None)
    _add_tagger(p)
    _add_common(p)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("index", help="build the POS-sequence retrieval index")
    p.add_argument("--corpus", required=True, help="tagged corpus JSON-lines")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--label", default=NON_OFFENSIVE)
    _add_common(p)
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("train-lm", help="train the n-gram language model")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--order", type=int, default=3)
    p.add_argument("--discount", type=float, default=0.75)
    p.add_argument("--label", default=NON_OFFENSIVE, help="'any' trains on all")
    _add_common(p)
    p.set_defaults(func=cmd_train_lm)

    p = sub.add_parser("synth-edit", help="synthesize editor training pairs")
    p.add_argument("--corpus", required=True, help="tagged corpus JSON-lines")
    p.add_argument("--index", required=True)
    p.add_argument("--lm", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--out", required=True, help="pairs TSV path")
    p.add_argument("--sample-n", type=int, default=edit_mod.DEFAULT_SAMPLE_N)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--pool-size", type=int, default=lm_mod.DEFAULT_POOL_SIZE)
    _add_tagger(p)
    _add_caps(p)
    _add_common(p)
    p.set_defaults(func=cmd_synth_edit)

    p = sub.add_parser("transfer", help="rewrite offensive sentences")
    p.add_argument("--input", required=True, help="JSON-lines corpus or plain text")
    p.add_argument("--vocab", required=True)
    p.add_argument("--index", required=True)
    p.add_argument("--lm", required=True)
    p.add_argument("--out", required=True, help="results JSON-lines path")
    p.add_argument("--variant", choices=[pipeline_mod.RGS, pipeline_mod.RGES],
                   default=pipeline_mod.RGS)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--pool-size", type=int, default=lm_mod.DEFAULT_POOL_SIZE)
    p.add_argument("--filler", choices=["ngram", "remote"], default="ngram")
    p.add_argument("--filler-endpoint")
    p.add_argument("--scorer", choices=["ngram", "remote"], default="ngram")
    p.add_argument("--scorer-endpoint")
    p.add_argument("--editor", choices=["identity", "remote"], default="identity")
    p.add_argument("--editor-endpoint")
    p.add_argument("--editor-beam-size", type=int, default=5)
    p.add_argument("--editor-max-len", type=int, default=30)
    p.add_argument("--editor-fallback", action="store_true",
                   help="fall back to unedited candidates if the editor fails")
    p.add_argument("--jobs", type=int, default=1)
    _add_tagger(p)
    _add_caps(p)
    _add_common(p)
    p.set_defaults(func=cmd_transfer)

    p = sub.add_parser("evaluate", help="score a results file")
    p.add_argument("--results", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--lm", required=True)
    p.add_argument("--embeddings", help="word embedding text file (enables FuCP)")
    _add_common(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("rem-baseline", help="delete restricted tokens (baseline)")
    p.add_argument("--input", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--out", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_rem_baseline)

    return parser


def _explicit_dests(subparser: argparse.ArgumentParser,
                    argv: Sequence[str]) -> set:
    """Dests whose option strings literally appear on the command line."""
    present = set()
    argv_opts = {a.split("=", 1)[0] for a in argv if a.startswith("-")}
    for action in subparser._actions:
        if any(opt in argv_opts for opt in action.option_strings):
            present.add(action.dest)
    return present


def _apply_config(args: argparse.Namespace, config: Dict[str, str],
                  subparser: argparse.ArgumentParser,
                  argv: Sequence[str]) -> None:
    """Config file supplies any option not given as a flag; flags win."""
    explicit = _explicit_dests(subparser, argv)
    types = {a.dest: a for a in subparser._actions}
    for key, raw in config.items():
        attr = key.replace("-", "_")
        if not hasattr(args, attr) or attr in explicit:
            continue
        action = types.get(attr)
        default = action.default if action is not None else None
        if isinstance(default, bool):
            setattr(args, attr, raw.lower() in ("1", "true", "yes", "on"))
        elif isinstance(default, int):
            setattr(args, attr, int(raw))
        elif isinstance(default, float):
            setattr(args, attr, float(raw))
        else:
            setattr(args, attr, raw)


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO, format="%(message)s")
    if argv is None:
        argv = sys.argv[1:]
    parser = build_parser()
    args = parser.parse_args(argv)
    config: Dict[str, str] = {}
    if getattr(args, "config", None):
        config = parse_config_file(args.config)
        subparsers_action = next(
            a for a in parser._actions
            if isinstance(a, argparse._SubParsersAction)
        )
        _apply_config(args, config, subparsers_action.choices[args.command], argv)
    try:
        return args.func(args, config)
    except CliError as exc:
        emit_diagnostic(event="error", message=str(exc))
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (
        corpus_mod.CorpusError,
        postag_mod.InvalidToken,
        postag_mod.TaggerError,
        retrieve_mod.RetrievalError,
        lm_mod.LmError,
        edit_mod.EditError,
        metrics_mod.MetricsError,
    ) as exc:
        emit_diagnostic(event="error", kind=type(exc).__name__, message=str(exc))
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
