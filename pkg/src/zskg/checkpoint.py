"""Single-document JSON checkpoints.

Layout: {format_version, parameters: {name: {shape, values}}, optimizer,
rng, config}. Values are flat float lists; Python float repr round-trips
IEEE doubles exactly, so loading restores training bit-exactly.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import DataError
from .utils import read_json, write_json

FORMAT_VERSION = 1


def save_checkpoint(path, parameters: dict[str, np.ndarray],
                    optimizer: dict | None = None,
                    rng: dict | None = None,
                    config: dict | None = None,
                    extra: dict | None = None) -> None:
    doc = {
        "format_version": FORMAT_VERSION,
        "parameters": {
            name: {"shape": list(arr.shape), "values": np.asarray(arr, dtype=np.float64).ravel().tolist()}
            for name, arr in parameters.items()
        },
        "optimizer": optimizer or {},
        "rng": rng or {},
        "config": config or {},
    }
    if extra:
        doc["extra"] = extra
    write_json(path, doc)


def load_checkpoint(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise DataError(f"checkpoint not found: {path}")
    doc = read_json(path)
    if doc.get("format_version") != FORMAT_VERSION:
        raise DataError(f"unsupported checkpoint format_version in {path}")
    params = {}
    for name, entry in doc["parameters"].items():
        params[name] = np.asarray(entry["values"], dtype=np.float64).reshape(entry["shape"])
    doc["parameters"] = params
    return doc
