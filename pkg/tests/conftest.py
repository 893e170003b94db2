"""Shared fixtures: a desk-sized synthetic dataset kept small enough that
every consumer test runs in well under a second, written once per session.
"""

from __future__ import annotations

import numpy as np
import pytest

from zskg.config import SyntheticSpec
from zskg.data import build_neighbor_index, load_dataset
from zskg.encoder import KgEmbeddingTable, neighbor_mean_matrix
from zskg.synth import generate_synthetic, write_synthetic
from zskg.text import load_word_vectors
from zskg.utils import seed_stream


TINY_SEED = 7


def tiny_spec() -> SyntheticSpec:
    # 7 seen / 1 validation / 2 unseen relations over 7 entity types;
    # triples_per_relation matches the pool size (12), so head cycling
    # reaches every pooled entity
    return SyntheticSpec(relations=10, entities=105, triples_per_relation=12,
                         type_count=7, vocab=60, candidate_size=20,
                         inpool_candidates=3)


@pytest.fixture(scope="session")
def tiny_ds():
    return generate_synthetic(tiny_spec(), seed=TINY_SEED)


@pytest.fixture(scope="session")
def tiny_dir(tiny_ds, tmp_path_factory):
    root = tmp_path_factory.mktemp("tiny-data")
    write_synthetic(tiny_ds, root, tiny_spec(), TINY_SEED)
    return root


@pytest.fixture(scope="session")
def tiny_split(tiny_dir):
    # load from disk rather than using the in-memory split, so every test
    # downstream also exercises the parse path
    return load_dataset(tiny_dir)


@pytest.fixture(scope="session")
def tiny_words(tiny_dir):
    return load_word_vectors(tiny_dir / "word_vectors.txt")


@pytest.fixture(scope="session")
def tiny_table(tiny_split):
    """A random (untrained) KG embedding table of dimension 16."""
    rng = seed_stream(TINY_SEED, "tiny-table")
    bound = 6.0 / np.sqrt(16)
    ent = rng.uniform(-bound, bound, size=(tiny_split.num_entities, 16))
    rel = rng.uniform(-bound, bound, size=(len(tiny_split.relations), 16))
    return KgEmbeddingTable(entities=ent, relations=rel)


@pytest.fixture(scope="session")
def tiny_index(tiny_split):
    return build_neighbor_index(tiny_split, max_neighbors=50, seed=0)


@pytest.fixture(scope="session")
def tiny_nm(tiny_index, tiny_table):
    return neighbor_mean_matrix(tiny_index, tiny_table)
