"""Relation descriptions -> fixed-dimension embeddings.

Pipeline: lowercase + strip punctuation, drop stop-words, weight the
remaining words by TF-IDF (tf = raw count, idf = ln(N/df), then L2
normalization over the description's distinct words), and sum the
pretrained word vectors under those weights. Bag of words throughout:
word order never matters.

The IDF corpus covers every relation description in the dataset,
including unseen relations — descriptions are metadata available at test
time, not labels.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .data import ZeroShotSplit
from .errors import DataError

_TOKEN = re.compile(r"[a-z]+")


def load_stopwords(path=None) -> frozenset[str]:
    """Stop-word set; the packaged list is used unless a file is given."""
    if path is None:
        text = resources.files("zskg").joinpath("stopwords.txt").read_text(encoding="utf-8")
    else:
        p = Path(path)
        if not p.exists():
            raise DataError(f"missing stop-word file: {p}")
        text = p.read_text(encoding="utf-8")
    return frozenset(w.strip().lower() for w in text.splitlines() if w.strip())


def tokenize_and_filter(description: str, stopwords: frozenset[str]) -> list[str]:
    """Lowercased alphabetic tokens with punctuation and stop-words removed."""
    return [t for t in _TOKEN.findall(description.lower()) if t not in stopwords]


class WordVectorTable:
    """Exact-match (lowercased) word -> vector lookup, one shared dimension."""

    def __init__(self, vectors: dict[str, np.ndarray], dimension: int):
        self.vectors = vectors
        self.dimension = dimension

    def get(self, word: str) -> np.ndarray | None:
        return self.vectors.get(word.lower())

    def __len__(self):
        return len(self.vectors)


def load_word_vectors(path) -> WordVectorTable:
    """Read `word v1 ... vd` lines; an optional `count dim` header is skipped."""
    p = Path(path)
    if not p.exists():
        raise DataError(f"missing word-vector file: {p}")
    vectors: dict[str, np.ndarray] = {}
    dim = None
    with open(p, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            if lineno == 1 and len(parts) == 2:
                try:
                    int(parts[0]), int(parts[1])
                    continue  # header line
                except ValueError:
                    pass
            word, values = parts[0].lower(), parts[1:]
            try:
                vec = np.array([float(v) for v in values], dtype=np.float64)
            except ValueError as exc:
                raise DataError(f"{p}:{lineno}: malformed vector entry") from exc
            if dim is None:
                dim = len(vec)
            elif len(vec) != dim:
                raise DataError(f"{p}:{lineno}: vector of length {len(vec)}, expected {dim}")
            vectors[word] = vec
    if not vectors:
        raise DataError(f"{p}: no word vectors")
    return WordVectorTable(vectors, dim)


@dataclass
class CorpusStats:
    document_count: int
    document_frequency: dict[str, int]

    def df(self, word: str) -> int:
        # words never seen in the corpus count as appearing once
        return self.document_frequency.get(word, 1)


def build_corpus_stats(split: ZeroShotSplit, stopwords: frozenset[str]) -> CorpusStats:
    df: dict[str, int] = {}
    for relation in split.relations:
        for word in set(tokenize_and_filter(relation.description, stopwords)):
            df[word] = df.get(word, 0) + 1
    return CorpusStats(document_count=len(split.relations), document_frequency=df)


def tfidf_weights(tokens: list[str], stats: CorpusStats) -> dict[str, float]:
    """L2-normalized tf*ln(N/df) weights over the description's words."""
    if not tokens:
        raise DataError("empty description after filtering")
    counts: dict[str, int] = {}
    for t in tokens:
        counts[t] = counts.get(t, 0) + 1
    raw = {w: c * math.log(stats.document_count / stats.df(w)) for w, c in counts.items()}
    norm = math.sqrt(sum(v * v for v in raw.values()))
    if norm == 0.0:
        raise DataError("all TF-IDF weights are zero; corpus has no discriminating words")
    return {w: v / norm for w, v in raw.items()}


@dataclass
class TextEmbedding:
    relation: int
    vector: np.ndarray
    weights: dict[str, float]


def embed_description(relation_id: int, description: str, table: WordVectorTable,
                      stats: CorpusStats, stopwords: frozenset[str]) -> TextEmbedding:
    """TF-IDF-weighted sum of word vectors; out-of-vocabulary words dropped."""
    tokens = [t for t in tokenize_and_filter(description, stopwords)
              if table.get(t) is not None]
    if not tokens:
        raise DataError(f"relation {relation_id}: no in-vocabulary words in description")
    weights = tfidf_weights(tokens, stats)
    vector = np.zeros(table.dimension)
    for word, weight in weights.items():
        vector += weight * table.get(word)
    return TextEmbedding(relation=relation_id, vector=vector, weights=weights)


def embed_all_relations(split: ZeroShotSplit, table: WordVectorTable,
                        stopwords: frozenset[str] | None = None) -> dict[int, TextEmbedding]:
    """Text embeddings for every relation, seen and unseen, in one pass."""
    stopwords = stopwords if stopwords is not None else load_stopwords()
    stats = build_corpus_stats(split, stopwords)
    return {r.id: embed_description(r.id, r.description, table, stats, stopwords)
            for r in split.relations}
