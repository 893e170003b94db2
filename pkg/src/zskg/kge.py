"""KG embedding pretraining (TransE, DistMult, ComplEx) and the
text-conditioned zero-shot baseline.

Pretraining runs on the background graph with an internal holdout for
model selection; the resulting entity/relation tables feed the feature
encoder. The baseline replaces the relation lookup with a small MLP over
relation-description embeddings so unseen relations can be scored from
text alone, trained with the same objectives.
"""

from __future__ import annotations

import numpy as np

from . import autodiff as ad
from .autodiff import Parameter, Tensor
from .config import KgeConfig
from .data import Triple, ZeroShotSplit
from .errors import ConfigError, DataError
from .layers import LayerNorm, Linear
from .optim import AdamState, adam_step
from .utils import seed_stream

KINDS = ("transe", "distmult", "complex")


class KgeModel:
    """Entity/relation embedding tables with kind-specific scoring.

    ComplEx keeps separate real and imaginary tables; the other kinds
    leave the imaginary parts as None.
    """

    def __init__(self, kind: str, n_entities: int, n_relations: int, dim: int,
                 rng: np.random.Generator):
        if kind not in KINDS:
            raise ConfigError(f"unknown KGE kind {kind!r}; expected one of {KINDS}")
        self.kind = kind
        self.dim = dim
        bound = 6.0 / np.sqrt(dim)
        def tbl(name, n):
            return Parameter(rng.uniform(-bound, bound, size=(n, dim)), name)
        self.entity_re = tbl("entities", n_entities)
        self.relation_re = tbl("relations", n_relations)
        self.entity_im = tbl("entities_im", n_entities) if kind == "complex" else None
        self.relation_im = tbl("relations_im", n_relations) if kind == "complex" else None
        if kind == "transe":
            self._renorm_entities()
            norms = np.linalg.norm(self.relation_re.data, axis=1, keepdims=True)
            self.relation_re.data /= np.maximum(norms, 1e-12)

    @property
    def params(self) -> list[Parameter]:
        out = [self.entity_re, self.relation_re]
        if self.kind == "complex":
            out += [self.entity_im, self.relation_im]
        return out

    def param_dict(self) -> dict[str, np.ndarray]:
        return {p.name: p.data.copy() for p in self.params}

    def load_param_dict(self, values: dict[str, np.ndarray]) -> None:
        for p in self.params:
            p.data = np.asarray(values[p.name], dtype=np.float64).reshape(p.data.shape).copy()

    def _renorm_entities(self) -> None:
        norms = np.linalg.norm(self.entity_re.data, axis=1, keepdims=True)
        np.divide(self.entity_re.data, np.maximum(norms, 1.0), out=self.entity_re.data)

    # -- differentiable scoring ----------------------------------------------
    def score_ids(self, heads: np.ndarray, rels: np.ndarray, tails: np.ndarray) -> Tensor:
        h = ad.take_rows(self.entity_re, heads)
        r = ad.take_rows(self.relation_re, rels)
        t = ad.take_rows(self.entity_re, tails)
        if self.kind == "transe":
            return -ad.l2norm(h + r - t, axis=1)
        if self.kind == "distmult":
            return ad.tsum(h * r * t, axis=1)
        hi = ad.take_rows(self.entity_im, heads)
        ri = ad.take_rows(self.relation_im, rels)
        ti = ad.take_rows(self.entity_im, tails)
        return complex_trilinear(h, hi, r, ri, t, ti)

    # -- numpy scoring of one (h, r) against many tails ----------------------
    def score_tails_np(self, head: int, rel: int, tails: np.ndarray) -> np.ndarray:
        h = self.entity_re.data[head]
        r = self.relation_re.data[rel]
        t = self.entity_re.data[tails]
        if self.kind == "transe":
            return -np.linalg.norm(h + r - t, axis=1)
        if self.kind == "distmult":
            return t @ (h * r)
        hi = self.entity_im.data[head]
        ri = self.relation_im.data[rel]
        ti = self.entity_im.data[tails]
        return t @ (h * r - hi * ri) + ti @ (h * ri + hi * r)


def complex_trilinear(hr: Tensor, hi: Tensor, rr: Tensor, ri: Tensor,
                      tr: Tensor, ti: Tensor) -> Tensor:
    """Re(<h, r, conj(t)>) summed over the embedding axis, rowwise."""
    return ad.tsum(hr * rr * tr + hi * rr * ti + hr * ri * ti - hi * ri * tr, axis=1)


def _corrupt(triples: list[Triple], split: ZeroShotSplit, n_entities: int,
             rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Head-or-tail pollution with rejection against the background graph."""
    heads = np.empty(len(triples), dtype=np.int64)
    rels = np.empty(len(triples), dtype=np.int64)
    tails = np.empty(len(triples), dtype=np.int64)
    for i, t in enumerate(triples):
        heads[i], rels[i], tails[i] = t.head, t.relation, t.tail
        side = int(rng.integers(2))
        for _ in range(1000):
            e = int(rng.integers(n_entities))
            cand = Triple(e, t.relation, t.tail) if side == 0 \
                else Triple(t.head, t.relation, e)
            if not split.in_train(cand):
                heads[i], rels[i], tails[i] = cand.head, cand.relation, cand.tail
                break
        else:
            raise DataError(f"could not sample a negative for relation {t.relation}")
    return heads, rels, tails


def _loss(model: KgeModel, pos: list[Triple], split: ZeroShotSplit,
          n_entities: int, margin: float, l2_coef: float,
          rng: np.random.Generator) -> Tensor:
    ph = np.array([t.head for t in pos], dtype=np.int64)
    pr = np.array([t.relation for t in pos], dtype=np.int64)
    pt = np.array([t.tail for t in pos], dtype=np.int64)
    nh, nr, nt = _corrupt(pos, split, n_entities, rng)
    s_pos = model.score_ids(ph, pr, pt)
    s_neg = model.score_ids(nh, nr, nt)
    if model.kind == "transe":
        loss = ad.mean(ad.relu(margin - s_pos + s_neg))
    else:
        loss = ad.mean(ad.softplus(-s_pos)) + ad.mean(ad.softplus(s_neg))
    if l2_coef > 0.0:
        reg = None
        for p in model.params:
            term = ad.tsum(p * p)
            reg = term if reg is None else reg + term
        loss = loss + l2_coef * reg
    return loss


def holdout_mrr(model: KgeModel, holdout: list[Triple], n_entities: int) -> float:
    """Raw MRR of the true tail against every entity, on held-out triples."""
    total = 0.0
    all_tails = np.arange(n_entities)
    for t in holdout:
        scores = model.score_tails_np(t.head, t.relation, all_tails)
        gt = scores[t.tail]
        rank = 1 + int(np.sum(scores > gt)) + (int(np.sum(scores == gt)) - 1)
        total += 1.0 / rank
    return total / len(holdout)


def train_kge(split: ZeroShotSplit, cfg: KgeConfig, seed: int
              ) -> tuple[KgeModel, list[dict]]:
    """Pretrain on the background graph; select by internal-holdout MRR."""
    rng_init = seed_stream(seed, "kge-init")
    rng_train = seed_stream(seed, "kge-train")
    n_entities = split.num_entities
    model = KgeModel(cfg.kind, n_entities, len(split.relations), cfg.dim, rng_init)

    triples = list(split.train)
    rng_hold = seed_stream(seed, "kge-holdout")
    order = rng_hold.permutation(len(triples))
    n_hold = max(1, int(round(len(triples) * cfg.holdout_fraction)))
    if n_hold >= len(triples):
        raise DataError("holdout would consume every background triple")
    holdout = [triples[i] for i in order[:n_hold]]
    pool = [triples[i] for i in order[n_hold:]]

    state = AdamState(alpha=cfg.learning_rate)
    log: list[dict] = []
    best = {"mrr": -1.0, "params": model.param_dict(), "step": 0}
    for step in range(1, cfg.steps + 1):
        idx = rng_train.integers(len(pool), size=min(cfg.batch_size, len(pool)))
        batch = [pool[i] for i in idx]
        loss = _loss(model, batch, split, n_entities, cfg.margin, cfg.l2_coef, rng_train)
        grads = [g.data for g in ad.grad(loss, model.params)]
        adam_step(model.params, grads, state)
        if model.kind == "transe":
            model._renorm_entities()
        record = {"step": step, "loss": loss.item()}
        if step % cfg.eval_every == 0 or step == cfg.steps:
            mrr = holdout_mrr(model, holdout, n_entities)
            record["holdout_mrr"] = mrr
            if mrr > best["mrr"]:
                best = {"mrr": mrr, "params": model.param_dict(), "step": step}
        log.append(record)
    if cfg.steps > 0:
        model.load_param_dict(best["params"])
    return model, log


# ---------------------------------------------------------------------------
# Text-conditioned zero-shot baseline
# ---------------------------------------------------------------------------

class TextRelationHead:
    """Two-layer MLP mapping a description embedding to a relation vector."""

    def __init__(self, word_dim: int, hidden: int, out_dim: int,
                 rng: np.random.Generator):
        self.fc1 = Linear(word_dim, hidden, "head_fc1", rng)
        self.ln = LayerNorm(hidden, "head_ln")
        self.fc2 = Linear(hidden, out_dim, "head_fc2", rng)

    def __call__(self, text: Tensor) -> Tensor:
        return self.fc2(self.ln(ad.leaky_relu(self.fc1(text))))

    @property
    def params(self) -> list[Parameter]:
        return self.fc1.params + self.ln.params + self.fc2.params


class ZsBaselineModel:
    """Entity table plus text head; relation vectors come from descriptions."""

    def __init__(self, kind: str, n_entities: int, dim: int, word_dim: int,
                 rng: np.random.Generator, init_entities: np.ndarray | None = None):
        if kind not in KINDS:
            raise ConfigError(f"unknown KGE kind {kind!r}; expected one of {KINDS}")
        self.kind = kind
        self.dim = dim
        out_dim = 2 * dim if kind == "complex" else dim
        bound = 6.0 / np.sqrt(dim)
        if init_entities is not None:
            ent = np.asarray(init_entities, dtype=np.float64)
            if ent.shape != (n_entities, out_dim):
                raise DataError(f"entity init shape {ent.shape} != {(n_entities, out_dim)}")
            self.entities = Parameter(ent.copy(), "entities")
        else:
            self.entities = Parameter(
                rng.uniform(-bound, bound, size=(n_entities, out_dim)), "entities")
        self.head = TextRelationHead(word_dim, 2 * out_dim, out_dim, rng)

    @property
    def params(self) -> list[Parameter]:
        return [self.entities] + self.head.params

    def param_dict(self) -> dict[str, np.ndarray]:
        return {p.name: p.data.copy() for p in self.params}

    def load_param_dict(self, values: dict[str, np.ndarray]) -> None:
        for p in self.params:
            p.data = np.asarray(values[p.name], dtype=np.float64).reshape(p.data.shape).copy()

    def _split_rows(self, rows: Tensor) -> tuple[Tensor, Tensor]:
        return (ad.narrow(rows, 1, 0, self.dim),
                ad.narrow(rows, 1, self.dim, self.dim))

    def score_ids(self, heads: np.ndarray, rel_rows: Tensor,
                  tails: np.ndarray) -> Tensor:
        """Score triples whose relation vectors are the given Tensor rows."""
        h = ad.take_rows(self.entities, heads)
        t = ad.take_rows(self.entities, tails)
        if self.kind == "transe":
            return -ad.l2norm(h + rel_rows - t, axis=1)
        if self.kind == "distmult":
            return ad.tsum(h * rel_rows * t, axis=1)
        hr, hi = self._split_rows(h)
        rr, ri = self._split_rows(rel_rows)
        tr, ti = self._split_rows(t)
        return complex_trilinear(hr, hi, rr, ri, tr, ti)

    def relation_vector(self, text_vec: np.ndarray) -> np.ndarray:
        with ad.no_grad():
            return self.head(Tensor(text_vec.reshape(1, -1))).data[0]

    def score_tails_np(self, head: int, rel_vec: np.ndarray,
                       tails: np.ndarray) -> np.ndarray:
        h = self.entities.data[head]
        t = self.entities.data[tails]
        if self.kind == "transe":
            return -np.linalg.norm(h + rel_vec - t, axis=1)
        if self.kind == "distmult":
            return t @ (h * rel_vec)
        d = self.dim
        hr, hi = h[:d], h[d:]
        rr, ri = rel_vec[:d], rel_vec[d:]
        tr, ti = t[:, :d], t[:, d:]
        return tr @ (hr * rr - hi * ri) + ti @ (hr * ri + hi * rr)


def _relation_text_matrix(relation_ids: list[int],
                          text_vectors: dict[int, np.ndarray]) -> np.ndarray:
    missing = [r for r in relation_ids if r not in text_vectors]
    if missing:
        raise DataError(f"no description embedding for relation ids {missing}")
    return np.stack([text_vectors[r] for r in relation_ids])


def baseline_validation_mrr(model: ZsBaselineModel, split: ZeroShotSplit,
                            text_vectors: dict[int, np.ndarray]) -> float:
    from .ranking import evaluate_queries

    vectors = {cs.relation: None for cs in split.valid_candidates}
    for rel in vectors:
        vectors[rel] = model.relation_vector(text_vectors[rel])

    def score_fn(cs, qidx):
        return model.score_tails_np(cs.head, vectors[cs.relation],
                                    np.array(cs.candidates, dtype=np.int64))

    return evaluate_queries(split.valid_candidates, score_fn).mrr


def train_zs_baseline(split: ZeroShotSplit, text_vectors: dict[int, np.ndarray],
                      cfg: KgeConfig, seed: int,
                      init_entities: np.ndarray | None = None
                      ) -> tuple[ZsBaselineModel, list[dict]]:
    """Joint entity + text-head training, selected by validation MRR."""
    rng_init = seed_stream(seed, "zs-baseline-init")
    rng_train = seed_stream(seed, "zs-baseline-train")
    word_dim = next(iter(text_vectors.values())).shape[0]
    model = ZsBaselineModel(cfg.kind, split.num_entities, cfg.dim, word_dim,
                            rng_init, init_entities)
    seen_ids = [r.id for r in split.relations_by_role("seen")]
    row_of = {rel: i for i, rel in enumerate(seen_ids)}
    text_matrix = Tensor(_relation_text_matrix(seen_ids, text_vectors))
    pool = list(split.train)
    n_entities = split.num_entities

    state = AdamState(alpha=cfg.learning_rate)
    log: list[dict] = []
    best = {"mrr": -1.0, "params": model.param_dict(), "step": 0}
    for step in range(1, cfg.steps + 1):
        idx = rng_train.integers(len(pool), size=min(cfg.batch_size, len(pool)))
        batch = [pool[i] for i in idx]
        rel_all = model.head(text_matrix)
        rows = np.array([row_of[t.relation] for t in batch], dtype=np.int64)
        rel_rows = ad.take_rows(rel_all, rows)
        ph = np.array([t.head for t in batch], dtype=np.int64)
        pt = np.array([t.tail for t in batch], dtype=np.int64)
        nh, _, nt = _corrupt(batch, split, n_entities, rng_train)
        s_pos = model.score_ids(ph, rel_rows, pt)
        s_neg = model.score_ids(nh, rel_rows, nt)
        if cfg.kind == "transe":
            loss = ad.mean(ad.relu(cfg.margin - s_pos + s_neg))
        else:
            loss = ad.mean(ad.softplus(-s_pos)) + ad.mean(ad.softplus(s_neg))
        grads = [g.data for g in ad.grad(loss, model.params)]
        adam_step(model.params, grads, state)
        record = {"step": step, "loss": loss.item()}
        if step % cfg.eval_every == 0 or step == cfg.steps:
            mrr = baseline_validation_mrr(model, split, text_vectors)
            record["valid_mrr"] = mrr
            if mrr > best["mrr"]:
                best = {"mrr": mrr, "params": model.param_dict(), "step": step}
        log.append(record)
    if cfg.steps > 0:
        model.load_param_dict(best["params"])
    return model, log


def baseline_score_fn(model: ZsBaselineModel,
                      text_vectors: dict[int, np.ndarray]):
    """Candidate-scoring closure for the shared evaluation protocol."""
    cache: dict[int, np.ndarray] = {}

    def score_fn(cs, qidx):
        if cs.relation not in cache:
            cache[cs.relation] = model.relation_vector(text_vectors[cs.relation])
        return model.score_tails_np(cs.head, cache[cs.relation],
                                    np.array(cs.candidates, dtype=np.int64))

    return score_fn
