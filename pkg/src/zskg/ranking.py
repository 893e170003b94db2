"""Ranking protocol and metrics: pessimistic tie handling, MRR/Hits@K,
and noise-averaged scoring of candidates with generated relation
embeddings.

The scoring rule for a query (e1, r?, ?) draws a fixed batch of noise
vectors once, generates one relation embedding per noise vector, and
scores every candidate tail by the average cosine similarity between the
generated embeddings and the candidate's fact embedding. Sharing the
noise batch across candidates keeps within-query comparisons paired.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .data import CandidateSet
from .utils import seed_stream


def rank_candidates(scores: np.ndarray, gt_index: int) -> int:
    """1-based rank of the ground truth, counting every tie as ahead of it."""
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim != 1 or not 0 <= gt_index < scores.shape[0]:
        raise ValueError("scores must be 1-D with gt_index in range")
    gt = scores[gt_index]
    greater = int(np.sum(scores > gt))
    ties = int(np.sum(scores == gt)) - 1
    return 1 + greater + ties


@dataclass
class QueryResult:
    relation: int
    rank: int
    n_candidates: int


@dataclass
class MetricsReport:
    mrr: float
    hits1: float
    hits5: float
    hits10: float
    query_count: int
    per_relation: dict[int, dict] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "mrr": self.mrr,
            "hits1": self.hits1,
            "hits5": self.hits5,
            "hits10": self.hits10,
            "query_count": self.query_count,
            "per_relation": {str(k): v for k, v in sorted(self.per_relation.items())},
        }


def compute_metrics(results: Sequence[QueryResult]) -> MetricsReport:
    if not results:
        raise ValueError("no query results to aggregate")
    ranks = np.array([r.rank for r in results], dtype=np.float64)
    report = MetricsReport(
        mrr=float(np.mean(1.0 / ranks)),
        hits1=float(np.mean(ranks <= 1)),
        hits5=float(np.mean(ranks <= 5)),
        hits10=float(np.mean(ranks <= 10)),
        query_count=len(results),
    )
    by_rel: dict[int, list[QueryResult]] = {}
    for r in results:
        by_rel.setdefault(r.relation, []).append(r)
    for rel, rows in by_rel.items():
        rr = np.array([q.rank for q in rows], dtype=np.float64)
        report.per_relation[rel] = {
            "mrr": float(np.mean(1.0 / rr)),
            "hits1": float(np.mean(rr <= 1)),
            "hits5": float(np.mean(rr <= 5)),
            "hits10": float(np.mean(rr <= 10)),
            "query_count": len(rows),
            "candidate_count_mean": float(np.mean([q.n_candidates for q in rows])),
        }
    return report


ScoreFn = Callable[[CandidateSet, int], np.ndarray]


def evaluate_queries(candidate_sets: Sequence[CandidateSet], score_fn: ScoreFn,
                     threads: int = 1) -> MetricsReport:
    """Run ``score_fn(cand_set, query_index)`` over every query and aggregate.

    The score function owns any randomness and must be pure in the query
    index, which makes the thread pool a pure throughput knob: results are
    identical for any ``threads`` value.
    """
    def one(i: int) -> QueryResult:
        cs = candidate_sets[i]
        scores = score_fn(cs, i)
        if len(scores) != len(cs.candidates):
            raise ValueError("score_fn returned wrong number of scores")
        gt_index = cs.candidates.index(cs.ground_truth)
        return QueryResult(cs.relation, rank_candidates(scores, gt_index),
                           len(cs.candidates))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, range(len(candidate_sets))))
    else:
        results = [one(i) for i in range(len(candidate_sets))]
    return compute_metrics(results)


def score_query(generate: Callable[[np.ndarray], np.ndarray],
                candidate_facts: np.ndarray, noise: np.ndarray) -> np.ndarray:
    """Average cosine between generated embeddings and each candidate fact.

    ``generate`` maps a noise batch (n_test, Z) to embeddings (n_test, F);
    ``candidate_facts`` is (C, F). Returns (C,) scores.
    """
    gen = generate(noise)
    gen_norm = gen / (np.linalg.norm(gen, axis=1, keepdims=True) + 1e-12)
    cand_norm = candidate_facts / (
        np.linalg.norm(candidate_facts, axis=1, keepdims=True) + 1e-12)
    return (cand_norm @ gen_norm.T).mean(axis=1)


def make_generator_score_fn(generate_for_relation: Callable[[int, np.ndarray], np.ndarray],
                            encode_pairs: Callable[[np.ndarray, np.ndarray], np.ndarray],
                            n_test: int, noise_dim: int, seed: int) -> ScoreFn:
    """Score function for generator evaluation, deterministic per query.

    Each query draws its noise from a stream keyed by (seed, query index),
    so evaluation order and threading cannot change the report.
    """
    def score_fn(cs: CandidateSet, qidx: int) -> np.ndarray:
        rng = seed_stream(seed, "eval-noise", qidx)
        noise = rng.standard_normal((n_test, noise_dim))
        cand = np.array(cs.candidates, dtype=np.int64)
        heads = np.full(len(cand), cs.head, dtype=np.int64)
        facts = encode_pairs(heads, cand)
        return score_query(lambda z: generate_for_relation(cs.relation, z), facts, noise)

    return score_fn


def random_ranking_mrr(candidate_sets: Sequence[CandidateSet], seed: int,
                       trials: int = 200) -> float:
    """Monte-Carlo MRR of uniformly random scoring on the same queries."""
    rng = seed_stream(seed, "random-ranking")
    total = 0.0
    count = 0
    for cs in candidate_sets:
        n = len(cs.candidates)
        gt_index = cs.candidates.index(cs.ground_truth)
        for _ in range(trials):
            scores = rng.standard_normal(n)
            total += 1.0 / rank_candidates(scores, gt_index)
            count += 1
    return total / count
