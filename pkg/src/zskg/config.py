"""Experiment configuration: dataclasses with the published defaults and a
flat ``key = value`` file format (dotted keys select sections).

Unknown keys are rejected loudly. parse -> serialize -> parse is identity.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field, fields
from pathlib import Path

from .errors import ConfigError


@dataclass
class DatasetConfig:
    max_neighbors: int = 50          # one-hop neighbor cap
    index_seed: int = 0              # seed for capped-neighbor subsampling


@dataclass
class SyntheticSpec:
    """Knobs for the desk-scale synthetic dataset generator."""

    relations: int = 20
    entities: int = 500
    triples_per_relation: int = 40
    vocab: int = 150
    noise_ratio: float = 0.3
    valid_fraction: float = 0.1
    unseen_fraction: float = 0.2
    type_count: int = 14             # entity types; one seen relation per type
                                     # at the default sizes, so unseen relations
                                     # share a type with exactly one seen twin
    latent_dim: int = 16
    word_dim: int = 24
    cluster_noise: float = 0.25
    candidate_size: int = 50
    inpool_candidates: int = 4       # same-type distractors per candidate set
    signal_words_per_relation: int = 3
    signal_repeats: int = 3


@dataclass
class EncoderConfig:
    dim: int = 100                   # KG embedding size (100 NELL-ZS, 50 Wiki-ZS)
    margin: float = 10.0
    k_ref: int = 30                  # reference triples per step
    learning_rate: float = 5e-4
    beta1: float = 0.9
    beta2: float = 0.999
    batch_size: int = 64
    steps: int = 2000
    eval_every: int = 200


@dataclass
class GanConfig:
    noise_dim: int = 15
    n_d: int = 5                     # discriminator iterations per generator step
    learning_rate: float = 1e-4
    beta1: float = 0.5
    beta2: float = 0.9
    margin: float = 10.0
    gp_coef: float = 10.0
    pivot_coef: float = 1.0
    steps: int = 2000
    batch_size: int = 64
    relations_per_batch: int = 8
    gen_hidden: int = 0              # 0 -> 2x fact dimension
    disc_hidden: int = 0             # 0 -> fact dimension
    eval_every: int = 200
    eval_n_test: int = 20


@dataclass
class KgeConfig:
    kind: str = "distmult"           # transe | distmult | complex
    dim: int = 100
    l2_coef: float = 0.0             # full-table L2 penalty (DistMult/ComplEx)
    learning_rate: float = 1e-2
    batch_size: int = 128
    steps: int = 2000
    margin: float = 1.0              # TransE ranking margin
    holdout_fraction: float = 0.05   # internal validation holdout
    eval_every: int = 200


@dataclass
class EvalConfig:
    n_test: int = 20                 # generated embeddings averaged per query
    threads: int = 1


@dataclass
class ExperimentConfig:
    data_dir: str = ""
    word_vectors: str = ""           # defaults to <data_dir>/word_vectors.txt
    out_dir: str = "runs/experiment"
    seed: int = 0
    dataset: DatasetConfig = field(default_factory=DatasetConfig)
    kge: KgeConfig = field(default_factory=KgeConfig)
    encoder: EncoderConfig = field(default_factory=EncoderConfig)
    gan: GanConfig = field(default_factory=GanConfig)
    eval: EvalConfig = field(default_factory=EvalConfig)


_SECTIONS = {"dataset", "kge", "encoder", "gan", "eval"}


def _coerce(value: str, target_type):
    value = value.strip()
    try:
        if target_type is bool:
            if value.lower() in ("true", "1", "yes"):
                return True
            if value.lower() in ("false", "0", "no"):
                return False
            raise ValueError(value)
        return target_type(value)
    except ValueError as exc:
        raise ConfigError(f"cannot parse {value!r} as {target_type.__name__}") from exc


def _set_key(cfg, dotted: str, value: str) -> None:
    parts = dotted.split(".")
    target = cfg
    if len(parts) == 2:
        section, key = parts
        if section not in _SECTIONS or not hasattr(cfg, section):
            raise ConfigError(f"unknown config section {section!r}")
        target = getattr(cfg, section)
    elif len(parts) == 1:
        key = parts[0]
    else:
        raise ConfigError(f"unknown config key {dotted!r}")
    if key not in {f.name for f in fields(target)}:
        raise ConfigError(f"unknown config key {dotted!r}")
    current = getattr(target, key)
    if dataclasses.is_dataclass(current):
        raise ConfigError(f"config key {dotted!r} names a section, not a value")
    setattr(target, key, _coerce(value, type(current)))


def parse_kv_text(text: str, cfg=None):
    """Apply ``key = value`` lines to a config (ExperimentConfig by default)."""
    cfg = cfg if cfg is not None else ExperimentConfig()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        _set_key(cfg, key.strip(), value)
    return cfg


def load_config_file(path, cfg=None):
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    return parse_kv_text(path.read_text(encoding="utf-8"), cfg)


def serialize_config(cfg) -> str:
    """Render a config back to the flat key = value format."""
    lines = []

    def emit(obj, prefix=""):
        for f in fields(obj):
            val = getattr(obj, f.name)
            if dataclasses.is_dataclass(val):
                emit(val, prefix=f"{f.name}.")
            else:
                lines.append(f"{prefix}{f.name} = {val}")

    emit(cfg)
    return "\n".join(lines) + "\n"


def config_to_dict(cfg) -> dict:
    return dataclasses.asdict(cfg)
