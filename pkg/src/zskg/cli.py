"""Command-line entry point: dataset synthesis, staged training, zero-shot
evaluation, baselines, the end-to-end pipeline, and report comparison.

Every command takes a root seed and emits a run manifest (config echo,
input digests, artifact paths, timings). Manifests hold the only
wall-clock data; all other artifacts are bit-reproducible for a fixed
seed. Exit codes: 0 ok, 2 config error, 3 data validation error,
4 numerical divergence.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, text as textmod
from .config import (DatasetConfig, ExperimentConfig, SyntheticSpec,
                     config_to_dict, load_config_file, serialize_config)
from .checkpoint import load_checkpoint, save_checkpoint
from .data import ZeroShotSplit, build_neighbor_index, load_dataset
from .encoder import (FeatureEncoder, KgEmbeddingTable, compute_relation_centers,
                      neighbor_mean_matrix, pretrain_encoder)
from .errors import ConfigError, DataError, ZskgError
from .gan import Discriminator, Generator, generation_score_fn, train_gan
from .kge import (KgeModel, ZsBaselineModel, baseline_score_fn, train_kge,
                  train_zs_baseline)
from .ranking import MetricsReport, evaluate_queries
from .synth import generate_synthetic, write_synthetic
from .utils import append_jsonl, read_json, sha256_file, write_json


# ---------------------------------------------------------------------------
# Shared plumbing
# ---------------------------------------------------------------------------

def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def _write_manifest(path: Path, command: str, seed: int | None, cfg_dict: dict,
                    inputs: dict[str, Path], artifacts: dict[str, Path],
                    timings: dict[str, float]) -> None:
    doc = {
        "command": command,
        "version": __version__,
        "seed": seed,
        "config": cfg_dict,
        "inputs": {name: {"path": str(p), "sha256": sha256_file(p)}
                   for name, p in inputs.items() if Path(p).is_file()},
        "artifacts": {name: str(p) for name, p in artifacts.items()},
        "timings_s": {k: round(v, 3) for k, v in timings.items()},
        "finished": _now(),
    }
    write_json(path, doc)


def _experiment_config(args) -> ExperimentConfig:
    cfg = ExperimentConfig()
    if getattr(args, "config", None):
        load_config_file(args.config, cfg)
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    if getattr(args, "data", None):
        cfg.data_dir = args.data
    if getattr(args, "out", None):
        cfg.out_dir = str(args.out)
    if getattr(args, "kind", None):
        cfg.kge.kind = args.kind
    if getattr(args, "word_vectors", None):
        cfg.word_vectors = args.word_vectors
    if getattr(args, "dim", None) is not None:
        cfg.encoder.dim = args.dim
        cfg.kge.dim = args.dim
    if getattr(args, "steps", None) is not None:
        cfg.encoder.steps = args.steps
    if getattr(args, "threads", None) is not None:
        cfg.eval.threads = args.threads
    return cfg


def _word_vector_path(cfg: ExperimentConfig) -> Path:
    if cfg.word_vectors:
        return Path(cfg.word_vectors)
    return Path(cfg.data_dir) / "word_vectors.txt"


def _text_vectors(split: ZeroShotSplit, wv_path: Path) -> dict[int, np.ndarray]:
    table = textmod.load_word_vectors(wv_path)
    embeddings = textmod.embed_all_relations(split, table)
    return {rid: emb.vector for rid, emb in embeddings.items()}


def _table_from_checkpoint(path) -> tuple[KgEmbeddingTable, dict]:
    doc = load_checkpoint(path)
    params = doc["parameters"]
    if "entities" not in params or "relations" not in params:
        raise DataError(f"{path}: not a KG embedding checkpoint "
                        f"(needs 'entities' and 'relations' tables)")
    kind = doc.get("extra", {}).get("kind", "distmult")
    return KgEmbeddingTable(params["entities"], params["relations"], kind), doc


def _encoder_from_checkpoint(path, table: KgEmbeddingTable) -> FeatureEncoder:
    doc = load_checkpoint(path)
    params = doc["parameters"]
    dim = params["W2"].shape[0]
    if table.dim != dim:
        raise DataError(f"encoder dim {dim} does not match KG table dim {table.dim}")
    enc = FeatureEncoder(dim, np.random.default_rng(0))
    enc.load_param_dict(params)
    return enc


def _generator_from_checkpoint(path) -> tuple[Generator, Discriminator, dict, dict[int, np.ndarray]]:
    doc = load_checkpoint(path)
    extra = doc.get("extra", {})
    need = {"word_dim", "noise_dim", "fact_dim", "gen_hidden", "disc_hidden", "text_vectors"}
    if not need.issubset(extra):
        raise DataError(f"{path}: not a generator checkpoint (missing {sorted(need - set(extra))})")
    rng = np.random.default_rng(0)
    gen = Generator(extra["word_dim"], extra["noise_dim"], extra["fact_dim"],
                    extra["gen_hidden"], rng)
    disc = Discriminator(extra["fact_dim"], extra["disc_hidden"], rng)
    params = doc["parameters"]
    for p in gen.params + disc.params:
        p.data = np.asarray(params[p.name], dtype=np.float64).reshape(p.data.shape).copy()
    gen.refresh()
    disc.refresh()
    tvecs = {int(k): np.asarray(v, dtype=np.float64)
             for k, v in extra["text_vectors"].items()}
    return gen, disc, doc, tvecs


def _report_doc(report: MetricsReport, split: ZeroShotSplit) -> dict:
    per_relation = []
    for rel_id in sorted(report.per_relation):
        row = report.per_relation[rel_id]
        per_relation.append({
            "relation": split.relations[rel_id].name,
            "mrr": row["mrr"],
            "hits10": row["hits10"],
            "query_count": row["query_count"],
            "candidate_count_mean": row["candidate_count_mean"],
        })
    return {"mrr": report.mrr, "hits1": report.hits1, "hits5": report.hits5,
            "hits10": report.hits10, "per_relation": per_relation}


def _write_log(path: Path, records: list[dict]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("", encoding="utf-8")
    for record in records:
        append_jsonl(path, record)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _cmd_synth(args) -> int:
    spec = SyntheticSpec()
    for flag in ("relations", "entities", "triples_per_relation", "vocab",
                 "type_count"):
        value = getattr(args, flag)
        if value is not None:
            setattr(spec, flag, value)
    if args.noise_ratio is not None:
        spec.noise_ratio = args.noise_ratio
    t0 = time.perf_counter()
    ds = generate_synthetic(spec, args.seed)
    out = Path(args.out)
    write_synthetic(ds, out, spec, args.seed)
    _write_manifest(out / "manifest.json", "synth", args.seed,
                    {"synth": vars(spec)}, {}, {
                        "dataset": out, "word_vectors": out / "word_vectors.txt",
                        "meta": out / "synth_meta.json"},
                    {"synth": time.perf_counter() - t0})
    print(f"wrote synthetic dataset to {out} "
          f"(oracle accuracy {ds.oracle_accuracy:.3f})")
    return 0


def _out_paths(out_arg: str, stem: str) -> tuple[Path, Path, Path]:
    """Resolve (checkpoint, log, manifest) for either a file or dir --out."""
    out = Path(out_arg)
    if out.suffix == ".json":
        base = out.parent
        base.mkdir(parents=True, exist_ok=True)
        return out, base / f"{out.stem}_log.jsonl", base / f"{out.stem}_manifest.json"
    out.mkdir(parents=True, exist_ok=True)
    return out / f"{stem}.json", out / f"{stem}_log.jsonl", out / "manifest.json"


def _cmd_train_kge(args) -> int:
    cfg = _experiment_config(args)
    split = load_dataset(cfg.data_dir)
    t0 = time.perf_counter()
    model, log = train_kge(split, cfg.kge, cfg.seed)
    elapsed = time.perf_counter() - t0
    ckpt, log_path, manifest = _out_paths(args.out, "kge")
    save_checkpoint(ckpt, model.param_dict(), config=config_to_dict(cfg.kge),
                    extra={"kind": cfg.kge.kind, "seed": cfg.seed})
    _write_log(log_path, log)
    _write_manifest(manifest, "train-kge", cfg.seed, config_to_dict(cfg),
                    {"dataset": Path(cfg.data_dir) / "triples.train.tsv"},
                    {"checkpoint": ckpt, "log": log_path}, {"train_kge": elapsed})
    print(f"trained {cfg.kge.kind} for {cfg.kge.steps} steps -> {ckpt}")
    return 0


def _cmd_pretrain_encoder(args) -> int:
    cfg = _experiment_config(args)
    split = load_dataset(cfg.data_dir)
    table, _ = _table_from_checkpoint(args.kge)
    cfg.encoder.dim = table.dim
    index = build_neighbor_index(split, cfg.dataset.max_neighbors, cfg.dataset.index_seed)
    t0 = time.perf_counter()
    enc, log = pretrain_encoder(split, index, table, cfg.encoder, cfg.seed)
    elapsed = time.perf_counter() - t0
    ckpt, log_path, manifest = _out_paths(args.out, "encoder")
    save_checkpoint(ckpt, enc.param_dict(), config=config_to_dict(cfg.encoder),
                    extra={"seed": cfg.seed})
    _write_log(log_path, log)
    _write_manifest(manifest, "pretrain-encoder", cfg.seed, config_to_dict(cfg),
                    {"kge": Path(args.kge)}, {"checkpoint": ckpt, "log": log_path},
                    {"pretrain_encoder": elapsed})
    best = max((r.get("valid_hits10", 0.0) for r in log), default=0.0)
    print(f"pretrained encoder ({cfg.encoder.steps} steps, "
          f"best valid Hits@10 {best:.3f}) -> {ckpt}")
    return 0


def _cmd_train_gan(args) -> int:
    cfg = _experiment_config(args)
    split = load_dataset(cfg.data_dir)
    table, _ = _table_from_checkpoint(args.kge)
    enc = _encoder_from_checkpoint(args.encoder, table)
    index = build_neighbor_index(split, cfg.dataset.max_neighbors, cfg.dataset.index_seed)
    nm = neighbor_mean_matrix(index, table)
    tvecs = _text_vectors(split, _word_vector_path(cfg))

    def encode(heads, tails):
        return enc.encode_pairs_np(heads, tails, table, nm)

    centers = compute_relation_centers(split.train, enc, table, nm)
    t0 = time.perf_counter()
    gen, disc, log = train_gan(split, centers, encode, enc.fact_dim, tvecs,
                               cfg.gan, cfg.seed)
    elapsed = time.perf_counter() - t0
    ckpt, log_path, manifest = _out_paths(args.out, "gan")
    params = {p.name: p.data for p in gen.params + disc.params}
    save_checkpoint(ckpt, params, config=config_to_dict(cfg.gan), extra={
        "seed": cfg.seed,
        "word_dim": gen.word_dim, "noise_dim": gen.noise_dim,
        "fact_dim": gen.fact_dim,
        "gen_hidden": gen.fc1.weight.data.shape[0],
        "disc_hidden": disc.fc.weight.data.shape[0],
        "text_vectors": {str(r): v.tolist() for r, v in sorted(tvecs.items())},
    })
    _write_log(log_path, log)
    _write_manifest(manifest, "train-gan", cfg.seed, config_to_dict(cfg),
                    {"kge": Path(args.kge), "encoder": Path(args.encoder),
                     "word_vectors": _word_vector_path(cfg)},
                    {"checkpoint": ckpt, "log": log_path}, {"train_gan": elapsed})
    best = max((r.get("valid_mrr", 0.0) for r in log), default=0.0)
    print(f"adversarial training done ({cfg.gan.steps} steps, "
          f"best valid MRR {best:.3f}) -> {ckpt}")
    return 0


def _eval_gan_report(split: ZeroShotSplit, model_dir: Path, which: str,
                     n_test: int, seed: int, threads: int,
                     dataset_cfg: DatasetConfig) -> MetricsReport:
    table, _ = _table_from_checkpoint(model_dir / "kge.json")
    enc = _encoder_from_checkpoint(model_dir / "encoder.json", table)
    gen, _, gan_doc, tvecs = _generator_from_checkpoint(model_dir / "gan.json")
    index = build_neighbor_index(split, dataset_cfg.max_neighbors, dataset_cfg.index_seed)
    nm = neighbor_mean_matrix(index, table)

    def encode(heads, tails):
        return enc.encode_pairs_np(heads, tails, table, nm)

    gan_cfg = ExperimentConfig().gan
    for key, value in gan_doc.get("config", {}).items():
        setattr(gan_cfg, key, value)
    gan_cfg.eval_n_test = n_test
    score_fn = generation_score_fn(gen, tvecs, encode, gan_cfg, seed)
    queries = split.test_candidates if which == "test" else split.valid_candidates
    return evaluate_queries(queries, score_fn, threads=threads)


def _cmd_eval(args) -> int:
    cfg = _experiment_config(args)
    split = load_dataset(cfg.data_dir)
    t0 = time.perf_counter()
    report = _eval_gan_report(split, Path(args.model), args.split,
                              args.n_test, cfg.seed, cfg.eval.threads, cfg.dataset)
    elapsed = time.perf_counter() - t0
    report_path = Path(args.report)
    write_json(report_path, _report_doc(report, split))
    _write_manifest(report_path.with_suffix(".manifest.json"), "eval", cfg.seed,
                    config_to_dict(cfg),
                    {"gan": Path(args.model) / "gan.json"},
                    {"report": report_path}, {"eval": elapsed})
    print(f"{args.split} MRR {report.mrr:.4f}  Hits@10 {report.hits10:.4f} "
          f"-> {report_path}")
    return 0


def _cmd_zs_baseline(args) -> int:
    cfg = _experiment_config(args)
    split = load_dataset(cfg.data_dir)
    tvecs = _text_vectors(split, _word_vector_path(cfg))
    init_entities = None
    if args.init_entities:
        doc = load_checkpoint(args.init_entities)
        init_entities = doc["parameters"].get("entities")
    t0 = time.perf_counter()
    model, log = train_zs_baseline(split, tvecs, cfg.kge, cfg.seed, init_entities)
    report = evaluate_queries(split.test_candidates, baseline_score_fn(model, tvecs),
                              threads=cfg.eval.threads)
    elapsed = time.perf_counter() - t0
    ckpt, log_path, manifest = _out_paths(args.out, "baseline")
    save_checkpoint(ckpt, model.param_dict(), config=config_to_dict(cfg.kge),
                    extra={"kind": cfg.kge.kind, "seed": cfg.seed})
    _write_log(log_path, log)
    report_path = ckpt.parent / "baseline_report.json"
    write_json(report_path, _report_doc(report, split))
    _write_manifest(manifest, "zs-baseline", cfg.seed, config_to_dict(cfg),
                    {"word_vectors": _word_vector_path(cfg)},
                    {"checkpoint": ckpt, "log": log_path, "report": report_path},
                    {"zs_baseline": elapsed})
    print(f"ZS-{cfg.kge.kind} test MRR {report.mrr:.4f}  "
          f"Hits@10 {report.hits10:.4f} -> {report_path}")
    return 0


def _cmd_pipeline(args) -> int:
    cfg = _experiment_config(args)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    split = load_dataset(cfg.data_dir)
    wv_path = _word_vector_path(cfg)
    if not wv_path.is_file():
        raise DataError(f"word-vector file not found for text stage: {wv_path}")
    timings: dict[str, float] = {}
    artifacts: dict[str, Path] = {}

    kge_path = out / "kge.json"
    if kge_path.exists():
        print(f"stage train-kge: reusing {kge_path}")
    else:
        t0 = time.perf_counter()
        model, log = train_kge(split, cfg.kge, cfg.seed)
        save_checkpoint(kge_path, model.param_dict(), config=config_to_dict(cfg.kge),
                        extra={"kind": cfg.kge.kind, "seed": cfg.seed})
        _write_log(out / "kge_log.jsonl", log)
        timings["train_kge"] = time.perf_counter() - t0
        print(f"stage train-kge: done in {timings['train_kge']:.1f}s")
    artifacts["kge"] = kge_path

    table, _ = _table_from_checkpoint(kge_path)
    cfg.encoder.dim = table.dim
    index = build_neighbor_index(split, cfg.dataset.max_neighbors, cfg.dataset.index_seed)
    nm = neighbor_mean_matrix(index, table)

    encoder_path = out / "encoder.json"
    if encoder_path.exists():
        print(f"stage pretrain-encoder: reusing {encoder_path}")
    else:
        t0 = time.perf_counter()
        enc, log = pretrain_encoder(split, index, table, cfg.encoder, cfg.seed)
        save_checkpoint(encoder_path, enc.param_dict(),
                        config=config_to_dict(cfg.encoder),
                        extra={"seed": cfg.seed})
        _write_log(out / "encoder_log.jsonl", log)
        timings["pretrain_encoder"] = time.perf_counter() - t0
        print(f"stage pretrain-encoder: done in {timings['pretrain_encoder']:.1f}s")
    artifacts["encoder"] = encoder_path
    enc = _encoder_from_checkpoint(encoder_path, table)

    def encode(heads, tails):
        return enc.encode_pairs_np(heads, tails, table, nm)

    gan_path = out / "gan.json"
    tvecs = _text_vectors(split, wv_path)
    if gan_path.exists():
        print(f"stage train-gan: reusing {gan_path}")
    else:
        centers = compute_relation_centers(split.train, enc, table, nm)
        t0 = time.perf_counter()
        gen, disc, log = train_gan(split, centers, encode, enc.fact_dim, tvecs,
                                   cfg.gan, cfg.seed)
        params = {p.name: p.data for p in gen.params + disc.params}
        save_checkpoint(gan_path, params, config=config_to_dict(cfg.gan), extra={
            "seed": cfg.seed,
            "word_dim": gen.word_dim, "noise_dim": gen.noise_dim,
            "fact_dim": gen.fact_dim,
            "gen_hidden": gen.fc1.weight.data.shape[0],
            "disc_hidden": disc.fc.weight.data.shape[0],
            "text_vectors": {str(r): v.tolist() for r, v in sorted(tvecs.items())},
        })
        _write_log(out / "gan_log.jsonl", log)
        timings["train_gan"] = time.perf_counter() - t0
        print(f"stage train-gan: done in {timings['train_gan']:.1f}s")
    artifacts["gan"] = gan_path

    t0 = time.perf_counter()
    report = _eval_gan_report(split, out, "test", cfg.eval.n_test, cfg.seed,
                              cfg.eval.threads, cfg.dataset)
    report_path = out / "report.json"
    write_json(report_path, _report_doc(report, split))
    timings["eval"] = time.perf_counter() - t0
    artifacts["report"] = report_path

    (out / "config.resolved.txt").write_text(serialize_config(cfg), encoding="utf-8")
    _write_manifest(out / "manifest.json", "pipeline", cfg.seed, config_to_dict(cfg),
                    {"word_vectors": wv_path}, artifacts, timings)
    print(f"pipeline done: test MRR {report.mrr:.4f}  Hits@10 {report.hits10:.4f} "
          f"-> {report_path}")
    return 0


_REPORT_COLUMNS = ("mrr", "hits10", "hits5", "hits1")


def _cmd_report(args) -> int:
    rows = []
    for path in args.reports:
        p = Path(path)
        doc = read_json(p)
        missing = [c for c in _REPORT_COLUMNS if c not in doc]
        if missing:
            raise DataError(f"{p}: report missing keys {missing}")
        name = p.parent.name if p.stem in ("report", "baseline_report") else p.stem
        rows.append({"name": name, **{c: float(doc[c]) for c in _REPORT_COLUMNS}})
    best = {c: max(r[c] for r in rows) for c in _REPORT_COLUMNS}
    for r in rows:
        r["best_in"] = [c for c in _REPORT_COLUMNS if r[c] == best[c]]

    width = max(len(r["name"]) for r in rows)
    header = "model".ljust(width) + "".join(c.upper().rjust(10) for c in _REPORT_COLUMNS)
    lines = [header, "-" * len(header)]
    for r in rows:
        cells = []
        for c in _REPORT_COLUMNS:
            mark = "*" if c in r["best_in"] else " "
            cells.append(f"{r[c]:9.4f}{mark}")
        lines.append(r["name"].ljust(width) + "".join(cells))
    table_text = "\n".join(lines)
    print(table_text)
    if args.out:
        write_json(Path(args.out), {"columns": list(_REPORT_COLUMNS),
                                    "rows": rows, "table": table_text})
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zskg",
        description="Zero-shot knowledge-graph relational learning toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic zero-shot dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--relations", type=int)
    p.add_argument("--entities", type=int)
    p.add_argument("--triples-per-relation", dest="triples_per_relation", type=int)
    p.add_argument("--type-count", dest="type_count", type=int,
                   help="entity type pools; must not exceed the seen-relation count")
    p.add_argument("--vocab", type=int)
    p.add_argument("--noise-ratio", dest="noise_ratio", type=float)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("train-kge", help="pretrain KG embeddings on the background graph")
    p.add_argument("--data", required=True)
    p.add_argument("--kind", choices=("transe", "distmult", "complex"))
    p.add_argument("--config")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_train_kge)

    p = sub.add_parser("pretrain-encoder", help="train the fact feature encoder")
    p.add_argument("--data", required=True)
    p.add_argument("--kge", required=True)
    p.add_argument("--config")
    p.add_argument("--dim", type=int)
    p.add_argument("--steps", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_pretrain_encoder)

    p = sub.add_parser("train-gan", help="adversarially train the relation generator")
    p.add_argument("--data", required=True)
    p.add_argument("--encoder", required=True)
    p.add_argument("--kge", required=True)
    p.add_argument("--word-vectors", dest="word_vectors")
    p.add_argument("--config")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_train_gan)

    p = sub.add_parser("eval", help="rank candidates for validation/test queries")
    p.add_argument("--data", required=True)
    p.add_argument("--model", required=True, help="directory with kge/encoder/gan checkpoints")
    p.add_argument("--split", choices=("test", "valid"), default="test")
    p.add_argument("--n-test", dest="n_test", type=int, default=20)
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int)
    p.add_argument("--report", required=True)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("zs-baseline", help="text-conditioned KGE baseline (train + eval)")
    p.add_argument("--data", required=True)
    p.add_argument("--kind", choices=("transe", "distmult", "complex"))
    p.add_argument("--word-vectors", dest="word_vectors")
    p.add_argument("--init-entities", dest="init_entities",
                   help="KGE checkpoint whose entity table seeds the baseline")
    p.add_argument("--config")
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_zs_baseline)

    p = sub.add_parser("pipeline", help="train-kge -> encoder -> gan -> eval, resumable")
    p.add_argument("--data", required=True)
    p.add_argument("--word-vectors", dest="word_vectors")
    p.add_argument("--config")
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_pipeline)

    p = sub.add_parser("report", help="compare metric reports side by side")
    p.add_argument("reports", nargs="+")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ZskgError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
