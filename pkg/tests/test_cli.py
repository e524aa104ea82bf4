"""Command-line workflow: artifacts, exit codes, config precedence."""

from __future__ import annotations

import json
import random

import pytest

from redactor.cli import main, parse_config_file
from redactor.corpus import load_corpus

from conftest import RESTRICTED_WORDS, desk_corpus


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """Vocab file + raw text + built artifacts shared by the CLI tests."""
    root = tmp_path_factory.mktemp("cli")
    vocab_path = root / "vocab.txt"
    vocab_path.write_text("\n".join(RESTRICTED_WORDS) + "\n", encoding="utf-8")

    clean, offensive = desk_corpus(120, 40, seed=501)
    rng = random.Random(502)
    lines = [" ".join(s) + " ." for s in clean + offensive]
    rng.shuffle(lines)
    raw_path = root / "raw.txt"
    raw_path.write_text("\n".join(lines) + "\n", encoding="utf-8")

    corpus_dir = root / "corpus"
    assert main([
        "build", "--input", str(raw_path), "--vocab", str(vocab_path),
        "--out", str(corpus_dir), "--seed", "3",
    ]) == 0
    assert main([
        "index", "--corpus", str(corpus_dir / "corpus.jsonl"),
        "--out", str(root / "index"),
    ]) == 0
    assert main([
        "train-lm", "--corpus", str(corpus_dir / "corpus.jsonl"),
        "--out", str(root / "lm.jsonl"),
    ]) == 0
    return {
        "root": root,
        "vocab": vocab_path,
        "raw": raw_path,
        "corpus": corpus_dir / "corpus.jsonl",
        "index": root / "index",
        "lm": root / "lm.jsonl",
    }


def _transfer_args(ws, inp, out, *extra):
    return [
        "transfer", "--input", str(inp), "--vocab", str(ws["vocab"]),
        "--index", str(ws["index"]), "--lm", str(ws["lm"]), "--out", str(out),
        "--cap-per-template", "8", "--cap-per-sentence", "32", *extra,
    ]


# --- build -----------------------------------------------------------------------


def test_build_summary_recountable(workspace, capsys):
    """The printed counts must match an independent recount of the output."""
    corpus_path = workspace["corpus"]
    sentences = load_corpus(corpus_path)
    rerun_dir = workspace["root"] / "corpus2"
    assert main([
        "build", "--input", str(workspace["raw"]), "--vocab", str(workspace["vocab"]),
        "--out", str(rerun_dir), "--seed", "3",
    ]) == 0
    summary = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    n_off = sum(1 for s in sentences if s.label == "offensive")
    assert summary["sentences"] == len(sentences)
    assert summary["offensive"] == n_off
    assert summary["non_offensive"] == len(sentences) - n_off
    assert summary["train"] + summary["validation"] + summary["test"] == len(sentences)


def test_build_deterministic(workspace):
    a = (workspace["root"] / "corpus" / "corpus.jsonl").read_bytes()
    b = (workspace["root"] / "corpus2" / "corpus.jsonl").read_bytes()
    assert a == b
    sa = (workspace["root"] / "corpus" / "splits.json").read_bytes()
    sb = (workspace["root"] / "corpus2" / "splits.json").read_bytes()
    assert sa == sb


def test_build_missing_vocab_fails(workspace, capsys):
    rc = main([
        "build", "--input", str(workspace["raw"]),
        "--vocab", str(workspace["root"] / "missing.txt"),
        "--out", str(workspace["root"] / "nowhere"),
    ])
    assert rc != 0
    assert "error" in capsys.readouterr().err


def test_corpus_records_have_bw_tags(workspace):
    from redactor.postag import BW, load_tagged_corpus

    tagged = load_tagged_corpus(workspace["corpus"])
    offensive = [t for t in tagged if t.label == "offensive"]
    assert offensive
    assert all(BW in t.tags for t in offensive)


# --- transfer ----------------------------------------------------------------------


def test_transfer_plain_text_input(workspace, tmp_path, capsys):
    inp = tmp_path / "in.txt"
    inp.write_text("the frak dog barks loud today .\n", encoding="utf-8")
    out = tmp_path / "res.jsonl"
    assert main(_transfer_args(workspace, inp, out)) == 0
    (rec,) = [json.loads(l) for l in out.read_text().splitlines()]
    assert rec["source_label"] == "offensive"
    assert "frak" not in rec["output"]


def test_transfer_jsonl_input(workspace, tmp_path):
    inp = tmp_path / "in.jsonl"
    inp.write_text(
        json.dumps({"id": "z1", "tokens": ["the", "smeg", "cat", "eats", "now"]})
        + "\n",
        encoding="utf-8",
    )
    out = tmp_path / "res.jsonl"
    assert main(_transfer_args(workspace, inp, out)) == 0
    (rec,) = [json.loads(l) for l in out.read_text().splitlines()]
    assert rec["id"] == "z1"
    assert "smeg" not in rec["output"]


def test_transfer_missing_artifact_fails(workspace, tmp_path, capsys):
    inp = tmp_path / "in.txt"
    inp.write_text("hello there friend of mine .\n", encoding="utf-8")
    rc = main([
        "transfer", "--input", str(inp), "--vocab", str(workspace["vocab"]),
        "--index", str(tmp_path / "no-index"), "--lm", str(workspace["lm"]),
        "--out", str(tmp_path / "out.jsonl"),
    ])
    assert rc != 0


def test_transfer_jobs_order_matches_serial(workspace, tmp_path):
    _, offensive = desk_corpus(0, 12, seed=503)
    inp = tmp_path / "many.txt"
    inp.write_text("\n".join(" ".join(s) for s in offensive) + "\n", encoding="utf-8")
    out1 = tmp_path / "serial.jsonl"
    out4 = tmp_path / "parallel.jsonl"
    assert main(_transfer_args(workspace, inp, out1)) == 0
    assert main(_transfer_args(workspace, inp, out4, "--jobs", "4")) == 0
    assert out1.read_bytes() == out4.read_bytes()


def test_transfer_deterministic_bytes(workspace, tmp_path):
    _, offensive = desk_corpus(0, 8, seed=505)
    inp = tmp_path / "in.txt"
    inp.write_text("\n".join(" ".join(s) for s in offensive) + "\n", encoding="utf-8")
    out1 = tmp_path / "a.jsonl"
    out2 = tmp_path / "b.jsonl"
    assert main(_transfer_args(workspace, inp, out1)) == 0
    assert main(_transfer_args(workspace, inp, out2)) == 0
    assert out1.read_bytes() == out2.read_bytes()


# --- rem baseline ------------------------------------------------------------------


def test_rem_baseline_deletes_restricted(workspace, tmp_path):
    inp = tmp_path / "in.txt"
    inp.write_text("the frak dog barks loud today .\nthe dog barks loud today .\n",
                   encoding="utf-8")
    out = tmp_path / "rem.jsonl"
    assert main([
        "rem-baseline", "--input", str(inp), "--vocab", str(workspace["vocab"]),
        "--out", str(out),
    ]) == 0
    recs = [json.loads(l) for l in out.read_text().splitlines()]
    assert recs[0]["output"] == ["the", "dog", "barks", "loud", "today", "."]
    assert recs[0]["fallback_used"] is False
    assert recs[1]["passthrough"] is True


# --- evaluate ----------------------------------------------------------------------


def test_evaluate_identity_results(workspace, tmp_path, capsys):
    # hand-rolled results where output == source: BLEU/ROUGE/METEOR 1.0
    recs = [
        {"id": "e1", "source_tokens": ["the", "dog", "runs", "now"],
         "output": ["the", "dog", "runs", "now"], "source_label": "non-offensive",
         "candidate_count": 0, "fallback_used": False, "passthrough": True,
         "selected": None},
        {"id": "e2", "source_tokens": ["a", "cat", "eats", "here"],
         "output": ["a", "cat", "eats", "here"], "source_label": "non-offensive",
         "candidate_count": 0, "fallback_used": False, "passthrough": True,
         "selected": None},
    ]
    path = tmp_path / "results.jsonl"
    path.write_text("\n".join(json.dumps(r) for r in recs) + "\n", encoding="utf-8")
    assert main([
        "evaluate", "--results", str(path), "--vocab", str(workspace["vocab"]),
        "--lm", str(workspace["lm"]),
    ]) == 0
    out = capsys.readouterr().out
    report = json.loads(out[: out.rindex("}") + 1])
    assert report["bleu"] == pytest.approx(1.0, abs=1e-9)
    assert report["rouge"] == pytest.approx(1.0, abs=1e-9)
    assert report["meteor"] == pytest.approx(1.0, abs=1e-9)
    assert report["accuracy"] == 100.0
    tsv = out.strip().splitlines()[-1]
    assert tsv.split("\t")[0] == "100.0"


def test_evaluate_with_embeddings(workspace, tmp_path, capsys):
    from conftest import write_embeddings

    rec = {"id": "e1", "source_tokens": ["the", "dog"], "output": ["the", "dog"],
           "source_label": "non-offensive", "candidate_count": 0,
           "fallback_used": False, "passthrough": True, "selected": None}
    path = tmp_path / "results.jsonl"
    path.write_text(json.dumps(rec) + "\n", encoding="utf-8")
    emb = write_embeddings(tmp_path / "emb.txt", ["the", "dog"])
    assert main([
        "evaluate", "--results", str(path), "--vocab", str(workspace["vocab"]),
        "--lm", str(workspace["lm"]), "--embeddings", str(emb),
    ]) == 0
    out = capsys.readouterr().out
    report = json.loads(out[: out.rindex("}") + 1])
    assert report["fucp"] == pytest.approx(1.0, abs=1e-9)


def test_evaluate_malformed_results_fails(workspace, tmp_path, capsys):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"id": "x"}\n', encoding="utf-8")
    rc = main([
        "evaluate", "--results", str(path), "--vocab", str(workspace["vocab"]),
        "--lm", str(workspace["lm"]),
    ])
    assert rc != 0


# --- synth-edit --------------------------------------------------------------------


def test_synth_edit_cli(workspace, tmp_path):
    out = tmp_path / "pairs.tsv"
    assert main([
        "synth-edit", "--corpus", str(workspace["corpus"]),
        "--index", str(workspace["index"]), "--lm", str(workspace["lm"]),
        "--vocab", str(workspace["vocab"]), "--out", str(out),
        "--sample-n", "10", "--seed", "2", "--k", "4",
        "--cap-per-tag", "4", "--cap-per-template", "8", "--cap-per-sentence", "16",
    ]) == 0
    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines
    assert all("\t" in l for l in lines)


# --- config file -------------------------------------------------------------------


def test_config_parsing(tmp_path):
    path = tmp_path / "conf.txt"
    path.write_text(
        '# comment\nk = 5\nvariant = "rges"\neditor-fallback = true  # trailing\n',
        encoding="utf-8",
    )
    values = parse_config_file(path)
    assert values == {"k": "5", "variant": "rges", "editor-fallback": "true"}


def test_config_rejects_bad_line(tmp_path):
    path = tmp_path / "conf.txt"
    path.write_text("not a pair\n", encoding="utf-8")
    from redactor.cli import CliError

    with pytest.raises(CliError):
        parse_config_file(path)


def test_flags_beat_config(workspace, tmp_path):
    _, offensive = desk_corpus(0, 2, seed=507)
    inp = tmp_path / "in.txt"
    inp.write_text("\n".join(" ".join(s) for s in offensive) + "\n", encoding="utf-8")
    conf = tmp_path / "conf.txt"
    conf.write_text("k = 1\ncap-per-template = 8\ncap-per-sentence = 32\n",
                    encoding="utf-8")
    out_flag = tmp_path / "flag.jsonl"
    out_conf = tmp_path / "conf.jsonl"
    # --k 5 on the command line must beat k = 1 from the file
    assert main([
        "transfer", "--input", str(inp), "--vocab", str(workspace["vocab"]),
        "--index", str(workspace["index"]), "--lm", str(workspace["lm"]),
        "--out", str(out_flag), "--config", str(conf), "--k", "5",
    ]) == 0
    assert main([
        "transfer", "--input", str(inp), "--vocab", str(workspace["vocab"]),
        "--index", str(workspace["index"]), "--lm", str(workspace["lm"]),
        "--out", str(out_conf), "--config", str(conf),
    ]) == 0
    flag_counts = [json.loads(l)["candidate_count"]
                   for l in out_flag.read_text().splitlines()]
    conf_counts = [json.loads(l)["candidate_count"]
                   for l in out_conf.read_text().splitlines()]
    assert flag_counts != conf_counts  # k=5 explores more templates than k=1
