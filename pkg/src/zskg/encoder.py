"""Feature encoder: one-hop neighbor encoder, entity-pair encoder, fact
embeddings, margin-ranking pretraining, and relation cluster centers.

A fact (e1, e2) maps to the concatenation u_e1 | u_ep | u_e2 of the two
neighbor encodings and the entity-pair encoding, dimension 4d for KG
embedding size d. The neighbor encoder averages an affine map of
(relation, neighbor) embedding pairs and squashes with tanh; because the
map is affine, the average over a fixed neighbor list can be precomputed
once per (index, table) as a mean-concat matrix. Entities with no
neighbors contribute tanh(b1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import Parameter, Tensor
from .config import EncoderConfig
from .data import NeighborIndex, Triple, ZeroShotSplit, sample_task_batch
from .errors import DataError
from .optim import AdamState, adam_step
from .ranking import evaluate_queries
from .utils import seed_stream


@dataclass
class KgEmbeddingTable:
    """Frozen KG embeddings feeding the encoder; never trained here."""

    entities: np.ndarray   # (num_entities, d)
    relations: np.ndarray  # (num_relations, d); only seen rows are meaningful
    source: str = "distmult"

    @property
    def dim(self) -> int:
        return self.entities.shape[1]


def neighbor_mean_matrix(index: NeighborIndex, table: KgEmbeddingTable) -> np.ndarray:
    """Per-entity mean of concat(v_rel, v_neighbor) over one-hop neighbors.

    Zero rows for isolated entities, so the downstream tanh(W1 m + b1)
    reduces to tanh(b1) exactly as the empty-mean convention demands.
    """
    n, d = table.entities.shape
    out = np.zeros((n, 2 * d))
    for entity, pairs in index.neighbors.items():
        if not pairs:
            continue
        rel_ids = np.array([r for r, _ in pairs])
        ent_ids = np.array([e for _, e in pairs])
        out[entity, :d] = table.relations[rel_ids].mean(axis=0)
        out[entity, d:] = table.entities[ent_ids].mean(axis=0)
    return out


class FeatureEncoder:
    """Trainable parameters (W1, b1, W2, b2) plus the frozen lookup tables."""

    def __init__(self, dim: int, rng: np.random.Generator):
        self.dim = dim
        b1 = 1.0 / np.sqrt(2 * dim)
        b2 = 1.0 / np.sqrt(dim)
        self.W1 = Parameter(rng.uniform(-b1, b1, size=(dim, 2 * dim)), "W1")
        self.b1 = Parameter(rng.uniform(-b1, b1, size=(dim,)), "b1")
        self.W2 = Parameter(rng.uniform(-b2, b2, size=(dim, dim)), "W2")
        self.b2 = Parameter(rng.uniform(-b2, b2, size=(dim,)), "b2")

    @property
    def params(self) -> list[Parameter]:
        return [self.W1, self.b1, self.W2, self.b2]

    @property
    def fact_dim(self) -> int:
        return 4 * self.dim

    def param_dict(self) -> dict[str, np.ndarray]:
        return {p.name: p.data.copy() for p in self.params}

    def load_param_dict(self, values: dict[str, np.ndarray]) -> None:
        for p in self.params:
            p.data = np.asarray(values[p.name], dtype=np.float64).reshape(p.data.shape).copy()

    # -- differentiable path -------------------------------------------------
    def encode_entities(self, entity_ids, neighbor_means: np.ndarray) -> Tensor:
        m = Tensor(neighbor_means[np.asarray(entity_ids, dtype=np.int64)])
        return ad.tanh(ad.linear(m, self.W1, self.b1))

    def encode_pairs(self, heads, tails, table: KgEmbeddingTable,
                     neighbor_means: np.ndarray) -> Tensor:
        heads = np.asarray(heads, dtype=np.int64)
        tails = np.asarray(tails, dtype=np.int64)
        u_head = self.encode_entities(heads, neighbor_means)
        u_tail = self.encode_entities(tails, neighbor_means)
        vh = Tensor(table.entities[heads])
        vt = Tensor(table.entities[tails])
        u_ep = ad.tanh(ad.concat([ad.linear(vh, self.W2, self.b2),
                                  ad.linear(vt, self.W2, self.b2)], axis=1))
        return ad.concat([u_head, u_ep, u_tail], axis=1)

    # -- inference fast path (identical math, no graph) ----------------------
    def encode_pairs_np(self, heads, tails, table: KgEmbeddingTable,
                        neighbor_means: np.ndarray) -> np.ndarray:
        heads = np.asarray(heads, dtype=np.int64)
        tails = np.asarray(tails, dtype=np.int64)
        u_head = np.tanh(neighbor_means[heads] @ self.W1.data.T + self.b1.data)
        u_tail = np.tanh(neighbor_means[tails] @ self.W1.data.T + self.b1.data)
        f2h = table.entities[heads] @ self.W2.data.T + self.b2.data
        f2t = table.entities[tails] @ self.W2.data.T + self.b2.data
        u_ep = np.tanh(np.concatenate([f2h, f2t], axis=1))
        return np.concatenate([u_head, u_ep, u_tail], axis=1)


def margin_rank_loss(ref: Tensor, positives: Tensor, negatives: Tensor,
                     margin: float) -> Tensor:
    """Hinge pushing cosine(ref, positive) above cosine(ref, negative).

    ``ref`` is a single (1, F) embedding broadcast against both batches;
    the loss is the mean over elementwise positive/negative pairs.
    """
    if margin <= 0:
        raise ValueError("margin must be positive")
    if not np.any(ref.data):
        raise ValueError("zero reference embedding")
    n = positives.data.shape[0]
    ref_rows = ad.broadcast_to(ref, (n, ref.data.shape[1]))
    s_pos = ad.row_cosine(ref_rows, positives)
    s_neg = ad.row_cosine(ref_rows, negatives)
    return ad.mean(ad.relu(margin - s_pos + s_neg))


def _triples_to_arrays(triples: list[Triple]) -> tuple[np.ndarray, np.ndarray]:
    return (np.array([t.head for t in triples], dtype=np.int64),
            np.array([t.tail for t in triples], dtype=np.int64))


def validation_hits10(split: ZeroShotSplit, encoder: FeatureEncoder,
                      table: KgEmbeddingTable, neighbor_means: np.ndarray) -> float:
    """Hits@10 on the validation queries with leave-one-out references.

    Validation relations have no training triples, so the reference
    embedding for each query is the mean fact embedding of the relation's
    other validation triples (all of them, if it has only one).
    """
    by_rel: dict[int, list[int]] = {}
    for i, t in enumerate(split.valid):
        by_rel.setdefault(t.relation, []).append(i)
    all_heads, all_tails = _triples_to_arrays(split.valid)
    fact = encoder.encode_pairs_np(all_heads, all_tails, table, neighbor_means)

    def score_fn(cand_set, qidx):
        rows = by_rel[cand_set.relation]
        others = [i for i in rows if i != qidx] or rows
        ref = fact[others].mean(axis=0)
        cand = np.array(cand_set.candidates, dtype=np.int64)
        cand_fact = encoder.encode_pairs_np(
            np.full(len(cand), cand_set.head, dtype=np.int64), cand, table, neighbor_means)
        num = cand_fact @ ref
        den = np.linalg.norm(cand_fact, axis=1) * np.linalg.norm(ref) + 1e-12
        return num / den

    report = evaluate_queries(split.valid_candidates, score_fn)
    return report.hits10


def pretrain_encoder(split: ZeroShotSplit, index: NeighborIndex,
                     table: KgEmbeddingTable, cfg: EncoderConfig, seed: int
                     ) -> tuple[FeatureEncoder, list[dict]]:
    """Margin-ranking pretraining with best-validation parameter selection."""
    rng_init = seed_stream(seed, "encoder-init")
    rng_train = seed_stream(seed, "encoder-train")
    encoder = FeatureEncoder(cfg.dim, rng_init)
    if table.dim != cfg.dim:
        raise DataError(f"KG embedding dim {table.dim} != configured dim {cfg.dim}")
    neighbor_means = neighbor_mean_matrix(index, table)

    eligible = [r.id for r in split.relations_by_role("seen")
                if len(split.train_triples_of(r.id)) >= cfg.k_ref + 1]
    if not eligible:
        raise DataError(f"no seen relation has the {cfg.k_ref + 1} triples needed "
                        f"for reference/positive sampling")

    state = AdamState(alpha=cfg.learning_rate, beta1=cfg.beta1, beta2=cfg.beta2)
    log: list[dict] = []
    best = {"hits10": -1.0, "params": encoder.param_dict(), "step": 0}

    for step in range(1, cfg.steps + 1):
        rel = eligible[int(rng_train.integers(len(eligible)))]
        refs, pos, neg = sample_task_batch(split, rel, cfg.k_ref, cfg.batch_size, rng_train)
        rh, rt = _triples_to_arrays(refs)
        ph, pt = _triples_to_arrays(pos)
        nh, nt = _triples_to_arrays(neg)
        ref_emb = ad.mean(encoder.encode_pairs(rh, rt, table, neighbor_means),
                          axis=0, keepdims=True)
        pos_emb = encoder.encode_pairs(ph, pt, table, neighbor_means)
        neg_emb = encoder.encode_pairs(nh, nt, table, neighbor_means)
        loss = margin_rank_loss(ref_emb, pos_emb, neg_emb, cfg.margin)
        grads = [g.data for g in ad.grad(loss, encoder.params)]
        adam_step(encoder.params, grads, state)

        record = {"step": step, "loss": loss.item()}
        if step % cfg.eval_every == 0 or step == cfg.steps:
            hits10 = validation_hits10(split, encoder, table, neighbor_means)
            record["valid_hits10"] = hits10
            if hits10 > best["hits10"]:
                best = {"hits10": hits10, "params": encoder.param_dict(), "step": step}
        log.append(record)

    if cfg.steps > 0:
        encoder.load_param_dict(best["params"])
    return encoder, log


def compute_relation_centers(triples: list[Triple], encoder: FeatureEncoder,
                             table: KgEmbeddingTable, neighbor_means: np.ndarray
                             ) -> dict[int, np.ndarray]:
    """Arithmetic mean of each relation's fact embeddings."""
    by_rel: dict[int, list[Triple]] = {}
    for t in triples:
        by_rel.setdefault(t.relation, []).append(t)
    centers = {}
    for rel in sorted(by_rel):
        heads, tails = _triples_to_arrays(by_rel[rel])
        centers[rel] = encoder.encode_pairs_np(heads, tails, table, neighbor_means).mean(axis=0)
    return centers
