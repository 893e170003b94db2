"""Tokenization and TF-IDF embedding against hand-worked values."""

from __future__ import annotations

import math

import numpy as np
import pytest

from zskg.data import CandidateSet, Relation, Triple, ZeroShotSplit
from zskg.errors import DataError
from zskg.text import (WordVectorTable, build_corpus_stats, embed_all_relations,
                       embed_description, load_stopwords, load_word_vectors,
                       tfidf_weights, tokenize_and_filter)


def corpus_split(descriptions: list[str]) -> ZeroShotSplit:
    relations = [Relation(i, f"r{i}", "seen", d) for i, d in enumerate(descriptions)]
    train = [Triple(0, i, 1) for i in range(len(descriptions))]
    return ZeroShotSplit(entity_names=["a", "b"], relations=relations,
                         train=train, valid=[], test=[],
                         valid_candidates=[], test_candidates=[])


def test_tokenize_strips_punctuation_case_and_stopwords():
    sw = frozenset({"the", "of"})
    assert tokenize_and_filter("The Wrath, of KHAN-2!", sw) == ["wrath", "khan"]


def test_tokenize_empty_for_all_stopwords():
    sw = frozenset({"the", "of"})
    assert tokenize_and_filter("the of THE", sw) == []


def test_packaged_stopword_list_loads():
    sw = load_stopwords()
    assert "the" in sw and "of" in sw
    assert "wrath" not in sw


def test_tfidf_hand_values():
    # four documents; "alpha" occurs in two of them, "beta" in one.
    # doc0 = "alpha alpha beta": raw weights 2*ln2 for both words -> 1/sqrt(2) each
    split = corpus_split(["alpha alpha beta", "alpha gamma", "gamma delta", "delta epsilon"])
    stats = build_corpus_stats(split, frozenset())
    assert stats.document_count == 4
    assert stats.document_frequency == {"alpha": 2, "beta": 1, "gamma": 2,
                                        "delta": 2, "epsilon": 1}
    w = tfidf_weights(["alpha", "alpha", "beta"], stats)
    assert w["alpha"] == pytest.approx(1.0 / math.sqrt(2.0), abs=1e-12)
    assert w["beta"] == pytest.approx(1.0 / math.sqrt(2.0), abs=1e-12)


def test_tfidf_word_in_every_document_weighs_zero():
    split = corpus_split(["shared alpha", "shared beta", "shared gamma", "shared delta"])
    stats = build_corpus_stats(split, frozenset())
    w = tfidf_weights(["shared", "alpha"], stats)
    assert w["shared"] == pytest.approx(0.0, abs=1e-12)
    assert w["alpha"] == pytest.approx(1.0, abs=1e-12)   # the only weight left


def test_tfidf_rejects_degenerate_inputs():
    split = corpus_split(["shared a", "shared b", "shared c", "shared d"])
    stats = build_corpus_stats(split, frozenset())
    with pytest.raises(DataError):
        tfidf_weights([], stats)
    with pytest.raises(DataError):
        tfidf_weights(["shared"], stats)  # every weight zero


def test_embedding_weighted_sum_hand_values():
    split = corpus_split(["alpha alpha beta", "alpha gamma", "gamma delta", "delta epsilon"])
    stats = build_corpus_stats(split, frozenset())
    table = WordVectorTable({"alpha": np.array([1.0, 0.0]),
                             "beta": np.array([0.0, 1.0])}, 2)
    emb = embed_description(0, "alpha alpha beta", table, stats, frozenset())
    s = 1.0 / math.sqrt(2.0)
    np.testing.assert_allclose(emb.vector, [s, s], rtol=0, atol=1e-12)


def test_embedding_drops_out_of_vocabulary_words():
    split = corpus_split(["alpha beta", "alpha gamma", "gamma delta", "delta epsilon"])
    stats = build_corpus_stats(split, frozenset())
    table = WordVectorTable({"alpha": np.array([2.0, 0.0])}, 2)
    emb = embed_description(0, "alpha beta", table, stats, frozenset())
    # beta has no vector: weighting renormalizes over alpha alone
    np.testing.assert_allclose(emb.vector, [2.0, 0.0], rtol=0, atol=1e-12)
    with pytest.raises(DataError, match="no in-vocabulary"):
        embed_description(1, "unknownword", table, stats, frozenset())


def test_embed_all_relations_covers_all_roles(tiny_split, tiny_words):
    embs = embed_all_relations(tiny_split, tiny_words)
    assert set(embs) == {r.id for r in tiny_split.relations}
    dims = {e.vector.shape for e in embs.values()}
    assert dims == {(tiny_words.dimension,)}


def test_word_order_does_not_matter():
    split = corpus_split(["alpha beta", "alpha gamma", "gamma delta", "delta epsilon"])
    stats = build_corpus_stats(split, frozenset())
    table = WordVectorTable({"alpha": np.array([1.0, 0.0]),
                             "beta": np.array([0.0, 3.0])}, 2)
    a = embed_description(0, "alpha beta", table, stats, frozenset())
    b = embed_description(0, "beta alpha", table, stats, frozenset())
    np.testing.assert_array_equal(a.vector, b.vector)


# ---------------------------------------------------------------------------
# word-vector file parsing

def test_load_word_vectors_plain_and_header(tmp_path):
    plain = tmp_path / "plain.txt"
    plain.write_text("Apple 1.0 2.0\nbanana 3.0 4.0\n", encoding="utf-8")
    table = load_word_vectors(plain)
    assert len(table) == 2
    np.testing.assert_array_equal(table.get("APPLE"), [1.0, 2.0])  # lowercased lookup

    headed = tmp_path / "headed.txt"
    headed.write_text("2 2\napple 1.0 2.0\nbanana 3.0 4.0\n", encoding="utf-8")
    assert len(load_word_vectors(headed)) == 2


@pytest.mark.parametrize("body,fragment", [
    ("apple 1.0 oops\n", "malformed"),
    ("apple 1.0 2.0\nbanana 3.0\n", "expected 2"),
    ("", "no word vectors"),
])
def test_load_word_vectors_rejects_bad_files(tmp_path, body, fragment):
    p = tmp_path / "w.txt"
    p.write_text(body, encoding="utf-8")
    with pytest.raises(DataError, match=fragment):
        load_word_vectors(p)


def test_load_word_vectors_missing_file(tmp_path):
    with pytest.raises(DataError):
        load_word_vectors(tmp_path / "absent.txt")
