"""Desk-scale synthetic zero-shot KG datasets with a known ground truth.

Construction: entities are grouped into latent *types* (plus a block of
free entities used only as distractors); each relation, seen or unseen,
links heads to tails inside one type's pool, and heads cycle through a
pool permutation so every pooled entity has outgoing edges. Every unseen
relation's type also occurs among the seen relations, so the knowledge
needed to place an unseen relation is present in the background graph.
Each relation's description carries a few signal words whose vectors
encode its latent direction through a fixed linear map, plus shared
noise words that TF-IDF should down-weight.

Unseen relations are generated by the same recipe as seen ones, so the
two populations are exchangeable. A brute-force nearest-type-center
classifier is run at generation time as a sanity oracle.
"""

from __future__ import annotations

import string
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import SyntheticSpec
from .data import CandidateSet, Relation, Triple, ZeroShotSplit, write_dataset
from .errors import ConfigError
from .utils import seed_stream, write_json

_NOISE_STOPWORDS = ("the", "of", "and", "in")


@dataclass
class SyntheticDataset:
    split: ZeroShotSplit
    word_vectors: dict[str, np.ndarray]
    word_dim: int
    entity_type: np.ndarray          # type id per entity, -1 for free entities
    type_directions: np.ndarray      # (type_count, latent_dim)
    relation_latents: np.ndarray     # (relations, latent_dim)
    relation_type: list[int]
    signal_words: dict[str, list[str]]
    oracle_accuracy: float


def _unit_rows(x: np.ndarray) -> np.ndarray:
    return x / np.linalg.norm(x, axis=-1, keepdims=True)


def _check_feasible(spec: SyntheticSpec) -> tuple[int, int, int, int]:
    n_valid = max(1, round(spec.valid_fraction * spec.relations))
    n_unseen = max(1, round(spec.unseen_fraction * spec.relations))
    n_seen = spec.relations - n_valid - n_unseen
    pool_size = (spec.entities * 4 // 5) // spec.type_count
    if n_seen < spec.type_count:
        raise ConfigError(f"need at least {spec.type_count} seen relations to cover "
                          f"all entity types, got {n_seen}")
    if n_unseen > spec.type_count:
        raise ConfigError("more unseen relations than entity types; their clusters "
                          "would not be distinguishable")
    if pool_size < 2:
        raise ConfigError("too few entities per type; increase entities or reduce type_count")
    if spec.type_count > spec.latent_dim:
        raise ConfigError("type_count exceeds latent_dim; type directions could "
                          "not be orthogonal")
    if spec.triples_per_relation > pool_size * (pool_size - 1):
        raise ConfigError(f"{spec.triples_per_relation} triples per relation exceed the "
                          f"available in-pool head/tail pairs")
    if spec.inpool_candidates > pool_size - 1:
        raise ConfigError("inpool_candidates exceeds the type pool size")
    if spec.candidate_size > spec.entities:
        raise ConfigError("candidate_size exceeds the number of entities")
    if spec.vocab < spec.relations * spec.signal_words_per_relation + 4:
        raise ConfigError("vocabulary too small for per-relation signal words")
    if not 0.0 <= spec.noise_ratio < 1.0:
        raise ConfigError("noise_ratio must be in [0, 1)")
    return n_seen, n_valid, n_unseen, pool_size


def _random_words(rng: np.random.Generator, count: int, taken: set[str]) -> list[str]:
    words = []
    letters = np.array(list(string.ascii_lowercase))
    while len(words) < count:
        w = "".join(rng.choice(letters, size=6))
        if w not in taken:
            taken.add(w)
            words.append(w)
    return words


def generate_synthetic(spec: SyntheticSpec, seed: int = 0) -> SyntheticDataset:
    n_seen, n_valid, n_unseen, pool_size = _check_feasible(spec)
    rng = seed_stream(seed, "synth")

    # latent geometry: orthonormal type directions (so no two types are
    # accidentally aligned), per-relation offsets, entity latents
    basis, _ = np.linalg.qr(rng.standard_normal((spec.latent_dim, spec.latent_dim)))
    types = basis[:spec.type_count]
    relation_type = [i % spec.type_count for i in range(spec.relations)]
    rel_latents = _unit_rows(types[relation_type]
                             + 0.15 * rng.standard_normal((spec.relations, spec.latent_dim)))

    entity_type = np.full(spec.entities, -1, dtype=np.int64)
    pools: list[list[int]] = []
    next_id = 0
    for k in range(spec.type_count):
        pool = list(range(next_id, next_id + pool_size))
        entity_type[pool] = k
        pools.append(pool)
        next_id += pool_size
    latents = _unit_rows(rng.standard_normal((spec.entities, spec.latent_dim)))
    for k, pool in enumerate(pools):
        noise = spec.cluster_noise * rng.standard_normal((len(pool), spec.latent_dim))
        latents[pool] = _unit_rows(types[k] + noise)

    entity_names = [f"ent{e:04d}" for e in range(spec.entities)]

    # roles: the tail of the relation index range holds validation then unseen,
    # so the seen prefix covers every type
    roles = ["seen"] * n_seen + ["validation"] * n_valid + ["unseen"] * n_unseen

    # triples: heads cycle through a permutation of the relation's type pool
    # (so no pooled entity is left without outgoing edges), tails are uniform
    # draws from the same pool
    triples_by_rel: list[list[Triple]] = []
    for r in range(spec.relations):
        pool = pools[relation_type[r]]
        heads: list[int] = []
        while len(heads) < spec.triples_per_relation:
            heads.extend(pool[i] for i in rng.permutation(len(pool)))
        heads = heads[:spec.triples_per_relation]
        pairs: set[tuple[int, int]] = set()
        for head in heads:
            guard = 0
            while True:
                tail = int(pool[rng.integers(len(pool))])
                if head != tail and (head, tail) not in pairs:
                    pairs.add((head, tail))
                    break
                guard += 1
                if guard > 100 * len(pool):
                    raise ConfigError("could not place requested triples; spec too tight")
        triples_by_rel.append([Triple(h, r, t) for h, t in sorted(pairs)])

    # vocabulary: unique signal words per relation plus shared noise words
    taken = set(_NOISE_STOPWORDS)
    signal_flat = _random_words(rng, spec.relations * spec.signal_words_per_relation, taken)
    noise_words = _random_words(
        rng, spec.vocab - len(signal_flat), taken)
    word_map = np.sqrt(1.0 / spec.latent_dim) * rng.standard_normal(
        (spec.word_dim, spec.latent_dim))
    word_vectors: dict[str, np.ndarray] = {}
    signal_words: dict[str, list[str]] = {}
    descriptions = []
    for r in range(spec.relations):
        sig = signal_flat[r * spec.signal_words_per_relation:(r + 1) * spec.signal_words_per_relation]
        for w in sig:
            vec = word_map @ rel_latents[r] + 0.05 * rng.standard_normal(spec.word_dim)
            word_vectors[w] = vec / np.linalg.norm(vec)
        tokens = [w for w in sig for _ in range(spec.signal_repeats)]
        if spec.noise_ratio > 0:
            n_noise = round(spec.noise_ratio / (1.0 - spec.noise_ratio) * len(tokens))
            noise_pool = noise_words + list(_NOISE_STOPWORDS)
            tokens += [noise_pool[int(rng.integers(len(noise_pool)))] for _ in range(max(1, n_noise))]
        order = rng.permutation(len(tokens))
        descriptions.append(" ".join(tokens[i] for i in order))
        signal_words[f"rel{r:02d}"] = sig
    for w in noise_words:
        vec = rng.standard_normal(spec.word_dim)
        word_vectors[w] = vec / np.linalg.norm(vec)

    relations = [Relation(id=r, name=f"rel{r:02d}", role=roles[r], description=descriptions[r])
                 for r in range(spec.relations)]

    # candidate sets: ground truth, a few same-type distractors, rest out-of-type
    def make_candidates(triples: list[Triple]) -> list[CandidateSet]:
        out = []
        for t in triples:
            pool = pools[relation_type[t.relation]]
            in_pool = [e for e in pool if e != t.tail]
            picks = rng.choice(len(in_pool), size=spec.inpool_candidates, replace=False)
            cands = [t.tail] + [in_pool[i] for i in picks]
            outsiders = [e for e in range(spec.entities)
                         if entity_type[e] != relation_type[t.relation]]
            n_out = spec.candidate_size - len(cands)
            picks = rng.choice(len(outsiders), size=n_out, replace=False)
            cands += [outsiders[i] for i in picks]
            order = rng.permutation(len(cands))
            out.append(CandidateSet(head=t.head, relation=t.relation, ground_truth=t.tail,
                                    candidates=tuple(cands[i] for i in order)))
        return out

    train = [t for r in range(spec.relations) if roles[r] == "seen" for t in triples_by_rel[r]]
    valid = [t for r in range(spec.relations) if roles[r] == "validation" for t in triples_by_rel[r]]
    test = [t for r in range(spec.relations) if roles[r] == "unseen" for t in triples_by_rel[r]]

    split = ZeroShotSplit(entity_names=entity_names, relations=relations,
                          train=train, valid=valid, test=test,
                          valid_candidates=make_candidates(valid),
                          test_candidates=make_candidates(test))

    # generation-time oracle: classify each fact's tail by nearest type center
    all_triples = train + valid + test
    tails = np.array([t.tail for t in all_triples])
    rel_of = np.array([relation_type[t.relation] for t in all_triples])
    sims = latents[tails] @ types.T
    accuracy = float(np.mean(sims.argmax(axis=1) == rel_of))

    return SyntheticDataset(split=split, word_vectors=word_vectors, word_dim=spec.word_dim,
                            entity_type=entity_type, type_directions=types,
                            relation_latents=rel_latents, relation_type=relation_type,
                            signal_words=signal_words, oracle_accuracy=accuracy)


def write_synthetic(ds: SyntheticDataset, out_dir, spec: SyntheticSpec, seed: int) -> None:
    """Write the dataset directory, word vectors, and generation metadata."""
    out = Path(out_dir)
    write_dataset(ds.split, out)
    lines = []
    for word in sorted(ds.word_vectors):
        vec = ds.word_vectors[word]
        lines.append(word + " " + " ".join(repr(float(v)) for v in vec))
    (out / "word_vectors.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    write_json(out / "synth_meta.json", {
        "seed": seed,
        "oracle_accuracy": ds.oracle_accuracy,
        "signal_words": ds.signal_words,
        "spec": {k: getattr(spec, k) for k in spec.__dataclass_fields__},
    })
