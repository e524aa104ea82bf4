"""Corpus ingestion, labeling, and split behavior."""

from __future__ import annotations

import json
import random

import pytest

from redactor.corpus import (
    CorpusError,
    EmptyVocab,
    LabeledSentence,
    NON_OFFENSIVE,
    OFFENSIVE,
    RestrictedVocab,
    build_corpus,
    build_splits,
    extract_and_filter,
    is_restricted,
    label_for,
    load_corpus,
    load_noise_filters,
    load_restricted_vocab,
    normalize_token,
    save_corpus,
    tokenize_sentence,
)

from conftest import RESTRICTED_WORDS, as_labeled, desk_corpus


# --- vocabulary ---------------------------------------------------------------


def test_vocab_load_dedupes_and_lowercases(tmp_path):
    path = tmp_path / "vocab.txt"
    path.write_text("Idiot\n\nidiot\njerk\n", encoding="utf-8")
    vocab = load_restricted_vocab(path)
    assert vocab.terms == {"idiot", "jerk"}
    assert len(vocab) == 2


def test_vocab_skips_multiword_lines(tmp_path):
    path = tmp_path / "vocab.txt"
    path.write_text("bad word\nsolo\n", encoding="utf-8")
    vocab = load_restricted_vocab(path)
    assert vocab.terms == {"solo"}


def test_vocab_empty_file_raises(tmp_path):
    path = tmp_path / "vocab.txt"
    path.write_text("\n\n", encoding="utf-8")
    with pytest.raises(EmptyVocab):
        load_restricted_vocab(path)


def test_vocab_missing_file_raises(tmp_path):
    with pytest.raises(CorpusError):
        load_restricted_vocab(tmp_path / "nope.txt")


def test_vocab_rejects_uppercase_terms():
    with pytest.raises(ValueError):
        RestrictedVocab(["Loud"])


def test_vocab_iterates_sorted():
    vocab = RestrictedVocab(["zeta", "alpha", "mid"])
    assert list(vocab) == ["alpha", "mid", "zeta"]


# --- restricted matching --------------------------------------------------------


def test_is_restricted_normalizes_case_and_edges():
    vocab = RestrictedVocab(["idiot"])
    assert is_restricted(vocab, "Idiot!")
    assert is_restricted(vocab, "idiot")
    assert is_restricted(vocab, '"IDIOT..."')


def test_is_restricted_is_exact_not_substring():
    vocab = RestrictedVocab(["idiot"])
    assert not is_restricted(vocab, "idiotic")
    assert not is_restricted(vocab, "hello")


def test_normalization_idempotent_random_tokens():
    rng = random.Random(41)
    alphabet = "aZ3!?.,' -é"
    for _ in range(500):
        token = "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 10)))
        once = normalize_token(token)
        assert normalize_token(once) == once


def test_is_restricted_agrees_with_normalized_form():
    vocab = RestrictedVocab(list(RESTRICTED_WORDS))
    rng = random.Random(42)
    for _ in range(300):
        word = rng.choice(RESTRICTED_WORDS + ("hello", "world", "the"))
        decorated = rng.choice(["", '"', "((", "..."]) + word + rng.choice(["", "!", "?!", "..."])
        if rng.random() < 0.5:
            decorated = decorated.upper()
        assert is_restricted(vocab, decorated) == is_restricted(
            vocab, normalize_token(decorated)
        )


# --- extraction + filtering -----------------------------------------------------


def test_extract_six_token_fixture():
    out = extract_and_filter("reap what you sow clowns .")
    assert out == [["reap", "what", "you", "sow", "clowns", "."]]
    # oracle: independent whitespace split of the same text
    assert len("reap what you sow clowns .".split()) == 6


def test_extract_drops_urls():
    assert extract_and_filter("Visit http://x.com now please everyone.") == []


def test_extract_drops_short_sentences():
    assert extract_and_filter("four words are here") == []


def test_extract_drops_long_sentences():
    text = " ".join(["word"] * 21)
    assert extract_and_filter(text) == []


def test_extract_length_bounds_hold():
    clean, _ = desk_corpus(50, 0, seed=9)
    text = " . ".join(" ".join(s) for s in clean) + " ."
    for tokens in extract_and_filter(text, min_len=5, max_len=20):
        assert 5 <= len(tokens) <= 20


@pytest.mark.parametrize(
    "noisy",
    [
        "send mail to john.doe@example.com for more info today",
        "it costs 25 dollars at the store right now",
        "see you at 10:30 pm tonight my friend",
        "the party is on 12/25/2024 at the old house",
        "that was really funny :) we laughed a lot",
        "check www.example.org for the full story everyone",
    ],
)
def test_noise_filters_drop_patterns(noisy):
    assert extract_and_filter(noisy) == []


def test_noise_filter_config_version_checked(tmp_path):
    path = tmp_path / "filters.json"
    path.write_text(json.dumps({"version": 2, "filters": []}), encoding="utf-8")
    with pytest.raises(CorpusError):
        load_noise_filters(path)


def test_tokenizer_splits_terminal_punct():
    assert tokenize_sentence("stop it, now!") == ["stop", "it", ",", "now", "!"]
    assert tokenize_sentence("lone .") == ["lone", "."]


# --- labeling -------------------------------------------------------------------


def test_labeling_soundness_exhaustive():
    vocab = RestrictedVocab(list(RESTRICTED_WORDS))
    clean, offensive = desk_corpus(100, 100, seed=13)
    for sent in as_labeled(clean + offensive, vocab):
        has_restricted = any(is_restricted(vocab, t) for t in sent.tokens)
        assert (sent.label == OFFENSIVE) == has_restricted


def test_build_corpus_labels_and_ids(tmp_path):
    vocab = RestrictedVocab(["frak"])
    lines = ["the frak dog barks loud .", "the small dog barks loud ."]
    sentences = build_corpus(lines, vocab, id_prefix="t")
    assert [s.id for s in sentences] == ["t00000000", "t00000001"]
    assert [s.label for s in sentences] == [OFFENSIVE, NON_OFFENSIVE]


# --- persistence ----------------------------------------------------------------


def test_corpus_round_trip(tmp_path):
    vocab = RestrictedVocab(list(RESTRICTED_WORDS))
    clean, offensive = desk_corpus(20, 20, seed=15)
    sentences = as_labeled(clean + offensive, vocab)
    path = tmp_path / "corpus.jsonl"
    save_corpus(path, sentences)
    loaded = load_corpus(path)
    assert loaded == sentences


def test_load_corpus_reports_bad_line(tmp_path):
    path = tmp_path / "corpus.jsonl"
    path.write_text('{"id": "a", "tokens": ["x"], "label": "offensive"}\nnot json\n',
                    encoding="utf-8")
    with pytest.raises(CorpusError) as exc:
        load_corpus(path)
    assert "2" in str(exc.value)


# --- splits ---------------------------------------------------------------------


def _sentences(n):
    vocab = RestrictedVocab(list(RESTRICTED_WORDS))
    clean, offensive = desk_corpus(n - n // 4, n // 4, seed=77)
    return as_labeled(clean + offensive, vocab)[:n]


def test_splits_100_into_80_10_10():
    sentences = _sentences(100)
    splits = build_splits(sentences, (0.8, 0.1, 0.1), seed=7)
    assert (len(splits.train), len(splits.validation), len(splits.test)) == (80, 10, 10)


def test_splits_deterministic_and_partition():
    sentences = _sentences(97)
    a = build_splits(sentences, (0.8, 0.1, 0.1), seed=7)
    b = build_splits(sentences, (0.8, 0.1, 0.1), seed=7)
    assert [s.id for s in a.train] == [s.id for s in b.train]
    assert [s.id for s in a.validation] == [s.id for s in b.validation]
    assert [s.id for s in a.test] == [s.id for s in b.test]
    all_ids = sorted(s.id for part in (a.train, a.validation, a.test) for s in part)
    assert all_ids == sorted(s.id for s in sentences)


def test_splits_change_with_seed():
    sentences = _sentences(100)
    a = build_splits(sentences, seed=1)
    b = build_splits(sentences, seed=2)
    assert [s.id for s in a.train] != [s.id for s in b.train]


def test_splits_subsample_nonoffensive():
    sentences = _sentences(100)
    n_off = sum(1 for s in sentences if s.label == OFFENSIVE)
    splits = build_splits(sentences, subsample_nonoffensive_to=10, seed=3)
    total = [s for part in (splits.train, splits.validation, splits.test) for s in part]
    assert len(total) == n_off + 10
    assert sum(1 for s in total if s.label == NON_OFFENSIVE) == 10


def test_splits_subsample_target_too_large():
    sentences = _sentences(20)
    with pytest.raises(ValueError):
        build_splits(sentences, subsample_nonoffensive_to=10_000)


def test_splits_proportions_must_sum_to_one():
    with pytest.raises(ValueError):
        build_splits(_sentences(10), (0.5, 0.2, 0.2))
