"""Zero-shot KG dataset loading, validation, indexing, and task sampling.

On-disk layout (UTF-8, LF):
    entities.txt            one entity symbol per line
    relations.json          [{name, role: seen|validation|unseen, description}]
    triples.train.tsv       head<TAB>relation<TAB>tail   (seen relations only)
    triples.valid.tsv       validation relations only
    triples.test.tsv        unseen relations only
    candidates.valid.json   [{head, relation, tail, candidates: [entity...]}]
    candidates.test.json

Integer ids are assigned by first appearance in the listing files, so two
loads of the same directory agree byte for byte. Validation is loud:
duplicate triples, dangling symbols, role violations, and malformed lines
are rejected with the offending file and line number.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .config import DatasetConfig
from .errors import DataError
from .utils import seed_stream

ROLES = ("seen", "validation", "unseen")


@dataclass(frozen=True)
class Relation:
    id: int
    name: str
    role: str
    description: str


@dataclass(frozen=True)
class Triple:
    head: int
    relation: int
    tail: int


@dataclass(frozen=True)
class CandidateSet:
    head: int
    relation: int
    ground_truth: int
    candidates: tuple[int, ...]


@dataclass
class ZeroShotSplit:
    entity_names: list[str]
    relations: list[Relation]
    train: list[Triple]
    valid: list[Triple]
    test: list[Triple]
    valid_candidates: list[CandidateSet]
    test_candidates: list[CandidateSet]
    entity_ids: dict[str, int] = field(default_factory=dict)
    relation_ids: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if not self.entity_ids:
            self.entity_ids = {name: i for i, name in enumerate(self.entity_names)}
        if not self.relation_ids:
            self.relation_ids = {r.name: r.id for r in self.relations}
        self._train_set = set(self.train)
        self._by_relation: dict[int, list[Triple]] = {}
        for t in self.train:
            self._by_relation.setdefault(t.relation, []).append(t)

    @property
    def background_graph(self) -> list[Triple]:
        """The seen-relation triples double as the background graph."""
        return self.train

    @property
    def num_entities(self) -> int:
        return len(self.entity_names)

    def relations_by_role(self, role: str) -> list[Relation]:
        return [r for r in self.relations if r.role == role]

    def train_triples_of(self, relation_id: int) -> list[Triple]:
        return self._by_relation.get(relation_id, [])

    def in_train(self, triple: Triple) -> bool:
        return triple in self._train_set

    def counts(self) -> dict:
        roles = {role: len(self.relations_by_role(role)) for role in ROLES}
        return {
            "entities": self.num_entities,
            "triples": len(self.train) + len(self.valid) + len(self.test),
            "train_triples": len(self.train),
            "valid_triples": len(self.valid),
            "test_triples": len(self.test),
            "relations": roles,
        }


class NeighborIndex:
    """Per-entity one-hop outgoing neighbors from the background graph.

    Entities with more than ``max_neighbors`` edges keep a seeded uniform
    sample without replacement; rebuilding with the same seed reproduces
    the index exactly.
    """

    def __init__(self, neighbors: dict[int, list[tuple[int, int]]], max_neighbors: int):
        self.neighbors = neighbors
        self.max_neighbors = max_neighbors

    def of(self, entity: int) -> list[tuple[int, int]]:
        return self.neighbors.get(entity, [])


def build_neighbor_index(split: ZeroShotSplit, max_neighbors: int = 50,
                         seed: int = 0) -> NeighborIndex:
    full: dict[int, list[tuple[int, int]]] = {}
    for t in split.background_graph:
        full.setdefault(t.head, []).append((t.relation, t.tail))
    capped: dict[int, list[tuple[int, int]]] = {}
    for entity in sorted(full):
        pairs = full[entity]
        if len(pairs) > max_neighbors:
            rng = seed_stream(seed, "neighbors", entity)
            keep = rng.choice(len(pairs), size=max_neighbors, replace=False)
            pairs = [pairs[i] for i in sorted(keep)]
        capped[entity] = pairs
    return NeighborIndex(capped, max_neighbors)


# ---------------------------------------------------------------------------
# loading

def _read_lines(path: Path) -> list[str]:
    if not path.exists():
        raise DataError(f"missing file: {path}")
    return path.read_text(encoding="utf-8").splitlines()


def _load_entities(path: Path) -> list[str]:
    names, seen = [], set()
    for lineno, line in enumerate(_read_lines(path), start=1):
        name = line.strip()
        if not name:
            raise DataError(f"{path}:{lineno}: empty entity symbol")
        if name in seen:
            raise DataError(f"{path}:{lineno}: duplicate entity symbol {name!r}")
        seen.add(name)
        names.append(name)
    if not names:
        raise DataError(f"{path}: no entities")
    return names


def _load_relations(path: Path) -> list[Relation]:
    if not path.exists():
        raise DataError(f"missing file: {path}")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(raw, list) or not raw:
        raise DataError(f"{path}: expected a non-empty array of relations")
    relations, names = [], set()
    for i, entry in enumerate(raw):
        for key in ("name", "role", "description"):
            if key not in entry:
                raise DataError(f"{path}: relation #{i} missing {key!r}")
        if entry["role"] not in ROLES:
            raise DataError(f"{path}: relation {entry['name']!r} has unknown role {entry['role']!r}")
        if entry["name"] in names:
            raise DataError(f"{path}: duplicate relation name {entry['name']!r}")
        names.add(entry["name"])
        relations.append(Relation(id=i, name=entry["name"], role=entry["role"],
                                  description=entry["description"]))
    return relations


def _load_triples(path: Path, entity_ids: dict, relations: list[Relation],
                  relation_ids: dict, expected_role: str,
                  allow_empty: bool) -> list[Triple]:
    triples, seen = [], set()
    for lineno, line in enumerate(_read_lines(path), start=1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise DataError(f"{path}:{lineno}: expected head<TAB>relation<TAB>tail, got {line!r}")
        head, rel, tail = (p.strip() for p in parts)
        if head not in entity_ids:
            raise DataError(f"{path}:{lineno}: unknown entity symbol {head!r}")
        if tail not in entity_ids:
            raise DataError(f"{path}:{lineno}: unknown entity symbol {tail!r}")
        if rel not in relation_ids:
            raise DataError(f"{path}:{lineno}: unknown relation symbol {rel!r}")
        relation = relations[relation_ids[rel]]
        if relation.role != expected_role:
            raise DataError(
                f"{path}:{lineno}: relation {rel!r} has role {relation.role!r}, "
                f"expected {expected_role!r} in this split")
        t = Triple(entity_ids[head], relation.id, entity_ids[tail])
        if t in seen:
            raise DataError(f"{path}:{lineno}: duplicate triple {line!r}")
        seen.add(t)
        triples.append(t)
    if not triples and not allow_empty:
        raise DataError(f"{path}: no triples")
    return triples


def _load_candidates(path: Path, entity_ids: dict, relation_ids: dict,
                     triples: list[Triple]) -> list[CandidateSet]:
    if not path.exists():
        raise DataError(f"missing file: {path}")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON ({exc})") from exc
    out = []
    keyed = {}
    for i, entry in enumerate(raw):
        for key in ("head", "relation", "tail", "candidates"):
            if key not in entry:
                raise DataError(f"{path}: entry #{i} missing {key!r}")
        try:
            head = entity_ids[entry["head"]]
            tail = entity_ids[entry["tail"]]
            rel = relation_ids[entry["relation"]]
            cands = tuple(entity_ids[c] for c in entry["candidates"])
        except KeyError as exc:
            raise DataError(f"{path}: entry #{i}: unknown symbol {exc.args[0]!r}") from exc
        if not cands:
            raise DataError(f"{path}: entry #{i}: empty candidate set")
        if len(set(cands)) != len(cands):
            raise DataError(f"{path}: entry #{i}: duplicate candidates")
        if tail not in cands:
            raise DataError(f"{path}: entry #{i}: ground truth not among candidates")
        cs = CandidateSet(head=head, relation=rel, ground_truth=tail, candidates=cands)
        keyed[(head, rel, tail)] = cs
        out.append(cs)
    for t in triples:
        if (t.head, t.relation, t.tail) not in keyed:
            raise DataError(f"{path}: no candidate set for triple "
                            f"({t.head}, {t.relation}, {t.tail})")
    if len(raw) != len(triples):
        raise DataError(f"{path}: {len(raw)} candidate sets for {len(triples)} triples")
    return [keyed[(t.head, t.relation, t.tail)] for t in triples]


def load_dataset(root_path, config: DatasetConfig | None = None) -> ZeroShotSplit:
    """Load and validate a zero-shot dataset directory."""
    del config  # reserved; loading itself needs no knobs
    root = Path(root_path)
    if not root.is_dir():
        raise DataError(f"dataset directory not found: {root}")
    entity_names = _load_entities(root / "entities.txt")
    relations = _load_relations(root / "relations.json")
    entity_ids = {name: i for i, name in enumerate(entity_names)}
    relation_ids = {r.name: r.id for r in relations}

    has_valid = any(r.role == "validation" for r in relations)
    has_unseen = any(r.role == "unseen" for r in relations)
    train = _load_triples(root / "triples.train.tsv", entity_ids, relations,
                          relation_ids, "seen", allow_empty=False)
    valid = _load_triples(root / "triples.valid.tsv", entity_ids, relations,
                          relation_ids, "validation", allow_empty=not has_valid)
    test = _load_triples(root / "triples.test.tsv", entity_ids, relations,
                         relation_ids, "unseen", allow_empty=not has_unseen)
    valid_cands = _load_candidates(root / "candidates.valid.json", entity_ids,
                                   relation_ids, valid)
    test_cands = _load_candidates(root / "candidates.test.json", entity_ids,
                                  relation_ids, test)
    return ZeroShotSplit(entity_names=entity_names, relations=relations,
                         train=train, valid=valid, test=test,
                         valid_candidates=valid_cands, test_candidates=test_cands,
                         entity_ids=entity_ids, relation_ids=relation_ids)


def write_dataset(split: ZeroShotSplit, root_path) -> None:
    """Write a split back to the on-disk format (lossless round-trip)."""
    root = Path(root_path)
    root.mkdir(parents=True, exist_ok=True)
    (root / "entities.txt").write_text("\n".join(split.entity_names) + "\n", encoding="utf-8")
    rel_doc = [{"name": r.name, "role": r.role, "description": r.description}
               for r in split.relations]
    (root / "relations.json").write_text(json.dumps(rel_doc, indent=2) + "\n", encoding="utf-8")

    def triple_lines(triples):
        names = split.entity_names
        rels = split.relations
        return "".join(f"{names[t.head]}\t{rels[t.relation].name}\t{names[t.tail]}\n"
                       for t in triples)

    (root / "triples.train.tsv").write_text(triple_lines(split.train), encoding="utf-8")
    (root / "triples.valid.tsv").write_text(triple_lines(split.valid), encoding="utf-8")
    (root / "triples.test.tsv").write_text(triple_lines(split.test), encoding="utf-8")

    def cand_doc(cands):
        names = split.entity_names
        rels = split.relations
        return [{"head": names[c.head], "relation": rels[c.relation].name,
                 "tail": names[c.ground_truth],
                 "candidates": [names[e] for e in c.candidates]} for c in cands]

    (root / "candidates.valid.json").write_text(
        json.dumps(cand_doc(split.valid_candidates), indent=2) + "\n", encoding="utf-8")
    (root / "candidates.test.json").write_text(
        json.dumps(cand_doc(split.test_candidates), indent=2) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# task sampling

def sample_task_batch(split: ZeroShotSplit, relation: int, k_ref: int,
                      batch: int, rng: np.random.Generator
                      ) -> tuple[list[Triple], list[Triple], list[Triple]]:
    """Reference / positive / negative triples for one training relation.

    References and positives are disjoint subsets of the relation's
    training triples. Negatives pollute each positive's tail with an
    entity such that the polluted triple is absent from the training set.
    """
    pool = split.train_triples_of(relation)
    if len(pool) < k_ref + 1:
        name = split.relations[relation].name
        raise DataError(f"relation {name!r} has {len(pool)} training triples, "
                        f"needs at least {k_ref + 1}")
    order = rng.permutation(len(pool))
    refs = [pool[i] for i in order[:k_ref]]
    rest = order[k_ref:]
    pos_idx = rest[:batch] if len(rest) >= batch else rest
    positives = [pool[i] for i in pos_idx]
    negatives = pollute_tails(split, relation, [p.head for p in positives], rng)
    return refs, positives, negatives


def pollute_tails(split: ZeroShotSplit, relation: int, heads: Sequence[int],
                  rng: np.random.Generator) -> list[Triple]:
    """One negative triple per head: a uniformly sampled tail such that
    (head, relation, tail) is absent from the training set."""
    negatives = []
    n_entities = split.num_entities
    for head in heads:
        for _ in range(1000):
            tail = int(rng.integers(n_entities))
            if not split.in_train(Triple(head, relation, tail)):
                negatives.append(Triple(head, relation, tail))
                break
        else:
            name = split.relations[relation].name
            raise DataError(f"cannot pollute tails for relation {name!r}: "
                            f"head {head} is linked to almost every entity")
    return negatives
