"""Edit-pair synthesis and editor application."""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest

from redactor.corpus import NON_OFFENSIVE, LabeledSentence
from redactor.edit import (
    EditError,
    EditorConfig,
    EditPair,
    RemoteEditor,
    edit_candidates,
    load_edit_pairs,
    save_edit_pairs,
    synthesize_edit_corpus,
)
from redactor.generate import GenerationCaps

from conftest import as_labeled, desk_corpus

CAPS = GenerationCaps(per_tag=4, per_template=8, per_sentence=16)


def _clean_sentences(vocab, n=50, seed=311):
    clean, _ = desk_corpus(n, 0, seed=seed)
    return as_labeled(clean, vocab, prefix="n")


# --- synthesis -----------------------------------------------------------------


def test_synthesis_targets_are_corpus_sentences(vocab, tagger, desk_index, desk_filler):
    sentences = _clean_sentences(vocab)
    pairs = synthesize_edit_corpus(
        sentences, desk_index, tagger, desk_filler, vocab,
        sample_n=20, seed=5, k=4, caps=CAPS,
    )
    assert pairs
    corpus_token_lists = {s.tokens for s in sentences}
    for pair in pairs:
        assert tuple(pair.target) in corpus_token_lists


def test_synthesis_drops_identity_pairs(vocab, tagger, desk_index, desk_filler):
    sentences = _clean_sentences(vocab)
    pairs = synthesize_edit_corpus(
        sentences, desk_index, tagger, desk_filler, vocab,
        sample_n=20, seed=5, k=4, caps=CAPS,
    )
    for pair in pairs:
        assert tuple(pair.source) != tuple(pair.target)


def test_synthesis_deterministic(vocab, tagger, desk_index, desk_filler):
    sentences = _clean_sentences(vocab)
    kwargs = dict(sample_n=15, seed=9, k=4, caps=CAPS)
    a = synthesize_edit_corpus(sentences, desk_index, tagger, desk_filler, vocab, **kwargs)
    b = synthesize_edit_corpus(sentences, desk_index, tagger, desk_filler, vocab, **kwargs)
    assert a == b


def test_synthesis_seed_changes_sample(vocab, tagger, desk_index, desk_filler):
    sentences = _clean_sentences(vocab, n=80)
    a = synthesize_edit_corpus(
        sentences, desk_index, tagger, desk_filler, vocab, sample_n=10, seed=1, caps=CAPS
    )
    b = synthesize_edit_corpus(
        sentences, desk_index, tagger, desk_filler, vocab, sample_n=10, seed=2, caps=CAPS
    )
    assert [p.target for p in a] != [p.target for p in b]


def test_synthesis_rejects_offensive_input(vocab, tagger, desk_index, desk_filler):
    _, offensive = desk_corpus(0, 3, seed=313)
    bad = as_labeled(offensive, vocab)
    with pytest.raises(EditError):
        synthesize_edit_corpus(bad, desk_index, tagger, desk_filler, vocab, caps=CAPS)


def test_synthesis_rejects_empty_corpus(vocab, tagger, desk_index, desk_filler):
    with pytest.raises(EditError):
        synthesize_edit_corpus([], desk_index, tagger, desk_filler, vocab, caps=CAPS)


def test_synthesis_filters_non_english(vocab, tagger, desk_index, desk_filler):
    sentences = _clean_sentences(vocab, n=10)
    cyrillic = LabeledSentence(
        "cyr", ("привет",) * 6, NON_OFFENSIVE
    )
    pairs = synthesize_edit_corpus(
        sentences + [cyrillic], desk_index, tagger, desk_filler, vocab,
        sample_n=11, seed=5, caps=CAPS,
    )
    assert all(tuple(p.target) != cyrillic.tokens for p in pairs)


# --- pairs persistence ------------------------------------------------------------


def test_pairs_tsv_round_trip(tmp_path):
    pairs = [
        EditPair(("the", "dog"), ("the", "cat")),
        EditPair(("a", "b", "c"), ("a", "c")),
    ]
    path = tmp_path / "pairs.tsv"
    save_edit_pairs(pairs, path)
    assert load_edit_pairs(path) == pairs
    raw = path.read_text(encoding="utf-8").splitlines()
    assert raw[0] == "the dog\tthe cat"


# --- editing ----------------------------------------------------------------------


def test_identity_editor_returns_inputs():
    cands = [["the", "dog"], ["a", "cat", "runs"]]
    out = edit_candidates(cands, EditorConfig(mode="identity"))
    assert out == [("the", "dog"), ("a", "cat", "runs")]


def test_editor_config_validation():
    with pytest.raises(ValueError):
        EditorConfig(mode="remote")  # endpoint required
    with pytest.raises(ValueError):
        EditorConfig(mode="nonsense")


class _EditHandler(BaseHTTPRequestHandler):
    mode = "echo"  # echo | fail | fail_after_one | too_long
    calls = 0

    def do_POST(self):
        _EditHandler.calls += 1
        if self.mode == "fail" or (self.mode == "fail_after_one" and _EditHandler.calls > 1):
            self.send_response(500)
            self.end_headers()
            return
        length = int(self.headers["Content-Length"])
        body = json.loads(self.rfile.read(length))
        if self.mode == "too_long":
            tokens = ["w"] * (body["max_len"] + 1)
        else:
            tokens = body["tokens"]
        payload = json.dumps({"tokens": tokens}).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def log_message(self, *args):
        pass


@pytest.fixture
def edit_server():
    server = HTTPServer(("127.0.0.1", 0), _EditHandler)
    threading.Thread(target=server.serve_forever, daemon=True).start()
    _EditHandler.calls = 0
    yield f"http://127.0.0.1:{server.server_port}"
    server.shutdown()


def test_remote_editor_round_trip(edit_server):
    _EditHandler.mode = "echo"
    config = EditorConfig(mode="remote", endpoint=edit_server)
    out = edit_candidates([["a", "b"], ["c"]], config)
    assert out == [("a", "b"), ("c",)]


def test_remote_editor_error_reports_progress(edit_server):
    _EditHandler.mode = "fail_after_one"
    _EditHandler.calls = 0
    config = EditorConfig(mode="remote", endpoint=edit_server)
    with pytest.raises(EditError) as exc:
        edit_candidates([["a"], ["b"], ["c"]], config)
    assert exc.value.edited_count == 1
    _EditHandler.mode = "echo"


def test_remote_editor_rejects_overlong_output(edit_server):
    _EditHandler.mode = "too_long"
    config = EditorConfig(mode="remote", endpoint=edit_server, max_len=5)
    with pytest.raises(EditError):
        edit_candidates([["a"]], config)
    _EditHandler.mode = "echo"
