"""Seed-stream management, file digests, and small JSON helpers.

All randomness in the toolkit flows from one root seed through named
sub-streams, so each stage (sampling, init, noise, evaluation) is
independently reproducible.
"""

from __future__ import annotations

import hashlib
import json
import zlib
from pathlib import Path

import numpy as np


def seed_stream(root_seed: int, *parts) -> np.random.Generator:
    """Deterministic generator for (root seed, named sub-stream) pairs.

    Parts may be strings or ints; strings are folded in via crc32 so the
    derivation is stable across platforms and runs.
    """
    entropy = [int(root_seed) & 0xFFFFFFFF]
    for part in parts:
        if isinstance(part, str):
            entropy.append(zlib.crc32(part.encode("utf-8")))
        else:
            entropy.append(int(part) & 0xFFFFFFFF)
    return np.random.default_rng(np.random.SeedSequence(entropy))


def sha256_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_json(path: str | Path, obj) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=False)
        fh.write("\n")


def read_json(path: str | Path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def append_jsonl(path: str | Path, record: dict) -> None:
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(json.dumps(record) + "\n")
