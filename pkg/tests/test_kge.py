"""KG embedding models: scoring oracles, training on a learnable toy graph,
and the text-conditioned baseline."""

from __future__ import annotations

import numpy as np
import pytest

from zskg import autodiff as ad
from zskg.autodiff import Tensor
from zskg.config import KgeConfig
from zskg.data import CandidateSet, Relation, Triple, ZeroShotSplit
from zskg.errors import ConfigError, DataError
from zskg.kge import (KINDS, KgeModel, ZsBaselineModel, baseline_score_fn,
                      complex_trilinear, holdout_mrr, train_kge,
                      train_zs_baseline)
from zskg.utils import seed_stream


def model_of(kind: str, n_ent: int = 6, n_rel: int = 3, dim: int = 4,
             seed: int = 0) -> KgeModel:
    return KgeModel(kind, n_ent, n_rel, dim, np.random.default_rng(seed))


def test_distmult_score_hand_values():
    m = model_of("distmult", dim=2)
    m.entity_re.data[0] = [1.0, 2.0]
    m.entity_re.data[1] = [1.0, 1.0]
    m.relation_re.data[0] = [1.0, 1.0]
    # sum(h * r * t) = 1*1*1 + 2*1*1 = 3
    s = m.score_ids(np.array([0]), np.array([0]), np.array([1]))
    assert s.data[0] == pytest.approx(3.0, abs=1e-12)


def test_transe_score_hand_values():
    m = model_of("transe", dim=2)
    m.entity_re.data[0] = [0.0, 0.0]
    m.entity_re.data[1] = [3.0, 4.0]
    m.relation_re.data[0] = [0.0, 0.0]
    # -||h + r - t|| = -5 for the 3-4-5 triangle
    s = m.score_ids(np.array([0]), np.array([0]), np.array([1]))
    assert s.data[0] == pytest.approx(-5.0, abs=1e-12)


def test_complex_with_zero_imaginary_matches_distmult():
    m = model_of("complex", dim=3, seed=4)
    m.entity_im.data[:] = 0.0
    m.relation_im.data[:] = 0.0
    d = model_of("distmult", dim=3, seed=0)
    d.entity_re.data = m.entity_re.data.copy()
    d.relation_re.data = m.relation_re.data.copy()
    h, r, t = np.array([0, 2]), np.array([1, 0]), np.array([3, 5])
    np.testing.assert_allclose(m.score_ids(h, r, t).data,
                               d.score_ids(h, r, t).data, atol=1e-12)


def test_complex_trilinear_brute_force():
    rng = np.random.default_rng(5)
    hr, hi, rr, ri, tr, ti = (rng.standard_normal((3, 4)) for _ in range(6))
    got = complex_trilinear(*(Tensor(x) for x in (hr, hi, rr, ri, tr, ti))).data
    # Re(<h, r, conj(t)>) computed with actual complex numbers
    h = hr + 1j * hi
    r = rr + 1j * ri
    t = tr + 1j * ti
    want = np.real(np.sum(h * r * np.conj(t), axis=1))
    np.testing.assert_allclose(got, want, atol=1e-12)


@pytest.mark.parametrize("kind", KINDS)
def test_score_tails_np_matches_graph_scoring(kind):
    m = model_of(kind, n_ent=8, dim=5, seed=2)
    tails = np.arange(8)
    fast = m.score_tails_np(3, 1, tails)
    slow = m.score_ids(np.full(8, 3), np.full(8, 1), tails).data
    np.testing.assert_allclose(fast, slow, atol=1e-12)


def test_transe_entities_unit_ball_after_init():
    m = model_of("transe", dim=6, seed=3)
    assert np.all(np.linalg.norm(m.entity_re.data, axis=1) <= 1.0 + 1e-12)


def test_unknown_kind_rejected():
    with pytest.raises(ConfigError):
        model_of("rotate")


# ---------------------------------------------------------------------------
# training on a deliberately easy graph

def block_split(n_groups: int = 3, size: int = 5) -> ZeroShotSplit:
    """Relation g links group-g entities among themselves: block structure
    a tiny embedding model must be able to fit."""
    n = n_groups * size
    entity_names = [f"e{i}" for i in range(n)]
    relations = [Relation(g, f"r{g}", "seen", f"group {g} internal link")
                 for g in range(n_groups)]
    train = []
    for g in range(n_groups):
        base = g * size
        for i in range(size):
            for j in range(size):
                if i != j:
                    train.append(Triple(base + i, g, base + j))
    return ZeroShotSplit(entity_names=entity_names, relations=relations,
                         train=train, valid=[], test=[],
                         valid_candidates=[], test_candidates=[])


def test_train_kge_beats_random_on_block_graph():
    split = block_split()
    cfg = KgeConfig(dim=8, steps=150, batch_size=32, eval_every=50,
                    learning_rate=0.05)
    model, log = train_kge(split, cfg, seed=1)
    assert len(log) == 150
    assert all(np.isfinite(rec["loss"]) for rec in log)
    final = holdout_mrr(model, split.train[:60], split.num_entities)
    # random tail guessing over 15 entities gives MRR ~ H_15/15 ~ 0.22
    assert final > 0.45


def test_train_kge_deterministic():
    split = block_split(2, 4)
    cfg = KgeConfig(dim=4, steps=20, batch_size=8, eval_every=10)
    a, la = train_kge(split, cfg, seed=6)
    b, lb = train_kge(split, cfg, seed=6)
    for pa, pb in zip(a.params, b.params):
        np.testing.assert_array_equal(pa.data, pb.data)
    assert la == lb


def test_train_kge_rejects_degenerate_holdout():
    split = block_split(1, 2)           # only 2 train triples
    cfg = KgeConfig(steps=1, holdout_fraction=0.9)
    with pytest.raises(DataError, match="holdout"):
        train_kge(split, cfg, seed=0)


def test_holdout_mrr_perfect_model():
    m = model_of("distmult", n_ent=4, n_rel=1, dim=4, seed=0)
    m.entity_re.data = np.eye(4)
    m.relation_re.data[0] = np.ones(4)
    # h=0, t=1: score of tail j is e_0 . e_j = [j == 0]; make tail 0 the gt
    assert holdout_mrr(m, [Triple(0, 0, 0)], 4) == 1.0


# ---------------------------------------------------------------------------
# zero-shot baseline

def text_vectors_for(split: ZeroShotSplit, dim: int = 6) -> dict[int, np.ndarray]:
    rng = np.random.default_rng(0)
    return {r.id: rng.standard_normal(dim) for r in split.relations}


def baseline_split() -> ZeroShotSplit:
    split = block_split(3, 5)
    # recast relation 2 as validation with candidate sets over its block
    rels = list(split.relations)
    rels[2] = Relation(2, "r2", "validation", "group 2 internal link")
    train = [t for t in split.train if t.relation != 2]
    valid = [t for t in split.train if t.relation == 2][:6]
    cands = [CandidateSet(head=t.head, relation=2, ground_truth=t.tail,
                          candidates=tuple(range(8, 15)))
             for t in valid]
    return ZeroShotSplit(entity_names=split.entity_names, relations=rels,
                         train=train, valid=valid, test=[],
                         valid_candidates=cands, test_candidates=[])


def test_zs_baseline_trains_and_scores():
    split = baseline_split()
    tv = text_vectors_for(split)
    cfg = KgeConfig(dim=6, steps=40, batch_size=16, eval_every=20,
                    learning_rate=0.05)
    model, log = train_zs_baseline(split, tv, cfg, seed=2)
    assert len(log) == 40
    assert any("valid_mrr" in rec for rec in log)
    fn = baseline_score_fn(model, tv)
    cs = split.valid_candidates[0]
    scores = fn(cs, 0)
    assert scores.shape == (len(cs.candidates),)
    assert np.all(np.isfinite(scores))


def test_zs_baseline_relation_vector_is_text_deterministic():
    split = baseline_split()
    tv = text_vectors_for(split)
    model = ZsBaselineModel("distmult", split.num_entities, 6,
                            word_dim=6, rng=np.random.default_rng(0))
    a = model.relation_vector(tv[0])
    b = model.relation_vector(tv[0].copy())
    np.testing.assert_array_equal(a, b)
    # identical descriptions mean identical relation vectors, whatever the id
    c = model.relation_vector(tv[1])
    assert not np.array_equal(a, c)


def test_zs_baseline_complex_splits_rows():
    model = ZsBaselineModel("complex", n_entities=5, dim=3, word_dim=4,
                            rng=np.random.default_rng(1))
    assert model.entities.data.shape == (5, 6)
    vec = model.relation_vector(np.ones(4))
    fast = model.score_tails_np(0, vec, np.arange(5))
    rel_rows = Tensor(np.tile(vec, (5, 1)))
    slow = model.score_ids(np.zeros(5, dtype=np.int64), rel_rows, np.arange(5))
    np.testing.assert_allclose(fast, slow.data, atol=1e-12)


def test_zs_baseline_init_entities_shape_check():
    with pytest.raises(DataError, match="shape"):
        ZsBaselineModel("distmult", n_entities=5, dim=3, word_dim=4,
                        rng=np.random.default_rng(0),
                        init_entities=np.zeros((5, 7)))


def test_zs_baseline_warm_start_uses_given_entities():
    ent = np.full((5, 3), 0.25)
    model = ZsBaselineModel("distmult", 5, 3, word_dim=4,
                            rng=np.random.default_rng(0), init_entities=ent)
    np.testing.assert_array_equal(model.entities.data, ent)
