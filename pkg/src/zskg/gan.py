"""Adversarial training of a text-conditioned relation-embedding
generator against a Wasserstein discriminator with a classification
branch and gradient penalty.

The generator maps (description embedding, Gaussian noise) to a vector
in fact-embedding space. The discriminator shares one hidden layer
between a scalar Wasserstein branch and a projection branch used for
classification against per-relation cluster centers. All FC weights are
spectrally normalized; the penalty keeps the score's input gradient near
unit norm on real/fake interpolates.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from . import autodiff as ad
from .autodiff import Parameter, Tensor
from .config import GanConfig
from .data import Triple, ZeroShotSplit, pollute_tails
from .errors import DataError, DivergenceError
from .layers import LayerNorm, Linear
from .optim import AdamState, adam_step
from .ranking import evaluate_queries, make_generator_score_fn
from .utils import seed_stream


class Generator:
    """FC -> LeakyReLU -> LayerNorm -> FC over concat(text, noise)."""

    def __init__(self, word_dim: int, noise_dim: int, fact_dim: int,
                 hidden: int, rng: np.random.Generator):
        self.word_dim = word_dim
        self.noise_dim = noise_dim
        self.fact_dim = fact_dim
        self.fc1 = Linear(word_dim + noise_dim, hidden, "gen_fc1", rng, spectral=True)
        self.ln = LayerNorm(hidden, "gen_ln")
        self.fc2 = Linear(hidden, fact_dim, "gen_fc2", rng, spectral=True)

    def __call__(self, text: Tensor, noise: Tensor) -> Tensor:
        h = ad.leaky_relu(self.fc1(ad.concat([text, noise], axis=1)))
        return self.fc2(self.ln(h))

    def generate_np(self, text_vec: np.ndarray, noise: np.ndarray) -> np.ndarray:
        """Inference on one relation: rows of noise against a fixed text."""
        text = np.broadcast_to(text_vec, (noise.shape[0], text_vec.shape[0]))
        with ad.no_grad():
            return self(Tensor(np.ascontiguousarray(text)), Tensor(noise)).data

    def refresh(self, n_iter: int = 0) -> None:
        self.fc1.refresh(n_iter)
        self.fc2.refresh(n_iter)

    @property
    def params(self) -> list[Parameter]:
        return self.fc1.params + self.ln.params + self.fc2.params

    @property
    def spectral_layers(self) -> list[Linear]:
        return [self.fc1, self.fc2]


class Discriminator:
    """Shared FC + LeakyReLU trunk, scalar branch and projection branch."""

    def __init__(self, fact_dim: int, hidden: int, rng: np.random.Generator):
        self.fact_dim = fact_dim
        self.fc = Linear(fact_dim, hidden, "disc_fc", rng, spectral=True)
        self.adv = Linear(hidden, 1, "disc_adv", rng, spectral=True)
        self.cls = Linear(hidden, fact_dim, "disc_cls", rng, spectral=True)

    def features(self, x: Tensor) -> Tensor:
        return ad.leaky_relu(self.fc(x))

    def score(self, x: Tensor) -> Tensor:
        return self.adv(self.features(x))

    def score_and_projection(self, x: Tensor) -> tuple[Tensor, Tensor]:
        h = self.features(x)
        return self.adv(h), self.cls(h)

    def refresh(self, n_iter: int = 0) -> None:
        for layer in self.spectral_layers:
            layer.refresh(n_iter)

    @property
    def params(self) -> list[Parameter]:
        return self.fc.params + self.adv.params + self.cls.params

    @property
    def spectral_layers(self) -> list[Linear]:
        return [self.fc, self.adv, self.cls]


def classification_loss(candidates: Tensor, centers: np.ndarray,
                        negatives: Tensor, margin: float) -> Tensor:
    """Margin hinge: cosine(center, candidate) vs cosine(center, negative).

    ``candidates`` may be (n, F) paired rowwise with ``negatives`` (n, F),
    or a single (1, F) candidate scored against every negative row. The
    center array broadcasts the same way. Negatives are always raw fact
    embeddings of tail-polluted triples.
    """
    if margin <= 0:
        raise ValueError("margin must be positive")
    c = np.broadcast_to(centers, (max(candidates.data.shape[0], negatives.data.shape[0]),
                                  candidates.data.shape[1]))
    center_rows = Tensor(np.ascontiguousarray(c))
    n = center_rows.data.shape[0]
    if candidates.data.shape[0] != n:
        candidates = ad.broadcast_to(candidates, (n, candidates.data.shape[1]))
    if negatives.data.shape[0] != n:
        negatives = ad.broadcast_to(negatives, (n, negatives.data.shape[1]))
    s_pos = ad.row_cosine(center_rows, candidates)
    s_neg = ad.row_cosine(center_rows, negatives)
    return ad.mean(ad.relu(margin - s_pos + s_neg))


def gradient_penalty(real: Tensor, fake: Tensor, disc: Discriminator,
                     rng: np.random.Generator, gp_coef: float) -> Tensor:
    """Penalize the score's input-gradient norm away from 1 on interpolates."""
    if real.data.shape != fake.data.shape:
        raise ValueError(f"real {real.data.shape} and fake {fake.data.shape} "
                         f"batches must match")
    eps = rng.uniform(size=(real.data.shape[0], 1))
    xhat = Tensor(eps * real.data + (1.0 - eps) * fake.data, requires_grad=True)
    score = disc.score(xhat)
    (g,) = ad.grad(ad.tsum(score), [xhat], create_graph=True)
    norms = ad.l2norm(g, axis=1)
    return gp_coef * ad.mean((norms - 1.0) * (norms - 1.0))


def pivot_regularizer(generated: Tensor, center: np.ndarray) -> Tensor:
    """Squared distance between the generated-batch mean and the center."""
    mean_gen = ad.mean(generated, axis=0, keepdims=True)
    diff = mean_gen - Tensor(center.reshape(1, -1))
    return ad.tsum(diff * diff)


class _BatchSampler:
    """Draws per-step training batches: relations, real facts, negatives.

    Batch rows are laid out as contiguous per-relation blocks so the
    pivot term can slice them without index bookkeeping.
    """

    def __init__(self, split: ZeroShotSplit, cfg: GanConfig,
                 encode_pairs: Callable[[np.ndarray, np.ndarray], np.ndarray],
                 text_vectors: dict[int, np.ndarray], rng: np.random.Generator):
        self.split = split
        self.cfg = cfg
        self.encode_pairs = encode_pairs
        self.rng = rng
        self.relations = [r.id for r in split.relations_by_role("seen")
                          if split.train_triples_of(r.id) and r.id in text_vectors]
        if not self.relations:
            raise DataError("no seen relation has both training triples and "
                            "a description embedding")
        self.per_rel = max(1, cfg.batch_size // cfg.relations_per_batch)
        self.text_vectors = text_vectors

    def draw(self) -> dict:
        k = min(self.cfg.relations_per_batch, len(self.relations))
        rel_ids = [self.relations[i]
                   for i in self.rng.choice(len(self.relations), size=k, replace=False)]
        rows_rel, heads, tails, neg_heads, neg_tails, texts = [], [], [], [], [], []
        for rel in rel_ids:
            pool = self.split.train_triples_of(rel)
            idx = self.rng.integers(len(pool), size=self.per_rel)
            batch = [pool[i] for i in idx]
            negs = pollute_tails(self.split, rel, [t.head for t in batch], self.rng)
            for t, n in zip(batch, negs):
                rows_rel.append(rel)
                heads.append(t.head)
                tails.append(t.tail)
                neg_heads.append(n.head)
                neg_tails.append(n.tail)
                texts.append(self.text_vectors[rel])
        real = self.encode_pairs(np.array(heads, dtype=np.int64),
                                 np.array(tails, dtype=np.int64))
        neg = self.encode_pairs(np.array(neg_heads, dtype=np.int64),
                                np.array(neg_tails, dtype=np.int64))
        return {"relations": rel_ids, "row_relations": rows_rel,
                "real": real, "negatives": neg, "text": np.stack(texts)}


def _center_rows(centers: dict[int, np.ndarray], row_relations: Sequence[int]) -> np.ndarray:
    missing = sorted({r for r in row_relations if r not in centers})
    if missing:
        raise DataError(f"no cluster center for relation ids {missing}")
    return np.stack([centers[r] for r in row_relations])


def _check_finite(step: int, **losses: float) -> None:
    for name, value in losses.items():
        if not np.isfinite(value):
            raise DivergenceError(f"{name} became {value} at step {step}")


def train_gan(split: ZeroShotSplit, centers: dict[int, np.ndarray],
              encode_pairs: Callable[[np.ndarray, np.ndarray], np.ndarray],
              fact_dim: int, text_vectors: dict[int, np.ndarray],
              cfg: GanConfig, seed: int
              ) -> tuple[Generator, Discriminator, list[dict]]:
    """Alternating n_d discriminator updates and one generator update.

    The fact encoder is frozen: real embeddings enter as constants via
    ``encode_pairs``. Model selection keeps the generator parameters with
    the best validation MRR.
    """
    word_dim = next(iter(text_vectors.values())).shape[0]
    rng_init = seed_stream(seed, "gan-init")
    rng_batch = seed_stream(seed, "gan-batch")
    rng_noise = seed_stream(seed, "gan-noise")
    rng_gp = seed_stream(seed, "gan-gp")
    gen_hidden = cfg.gen_hidden or 2 * fact_dim
    disc_hidden = cfg.disc_hidden or fact_dim
    gen = Generator(word_dim, cfg.noise_dim, fact_dim, gen_hidden, rng_init)
    disc = Discriminator(fact_dim, disc_hidden, rng_init)
    sampler = _BatchSampler(split, cfg, encode_pairs, text_vectors, rng_batch)

    d_state = AdamState(alpha=cfg.learning_rate, beta1=cfg.beta1, beta2=cfg.beta2)
    g_state = AdamState(alpha=cfg.learning_rate, beta1=cfg.beta1, beta2=cfg.beta2)
    log: list[dict] = []
    best = {"mrr": -1.0, "gen": _params_copy(gen.params),
            "disc": _params_copy(disc.params), "step": 0}

    def d_update() -> tuple[float, float]:
        batch = sampler.draw()
        n = batch["real"].shape[0]
        noise = rng_noise.standard_normal((n, cfg.noise_dim))
        with ad.no_grad():
            fake_np = gen(Tensor(batch["text"]), Tensor(noise)).data
        disc.refresh()
        real = Tensor(batch["real"])
        fake = Tensor(fake_np)
        neg = Tensor(batch["negatives"])
        crows = _center_rows(centers, batch["row_relations"])
        s_fake, p_fake = disc.score_and_projection(fake)
        s_real, p_real = disc.score_and_projection(real)
        w_gap = ad.mean(s_fake) - ad.mean(s_real)
        l_cls = 0.5 * classification_loss(p_fake, crows, neg, cfg.margin) \
            + 0.5 * classification_loss(p_real, crows, neg, cfg.margin)
        gp = gradient_penalty(real, fake, disc, rng_gp, cfg.gp_coef)
        loss = w_gap + l_cls + gp
        grads = [g.data for g in ad.grad(loss, disc.params)]
        adam_step(disc.params, grads, d_state)
        return loss.item(), gp.item()

    def g_update() -> tuple[float, float, float]:
        batch = sampler.draw()
        n = batch["real"].shape[0]
        noise = rng_noise.standard_normal((n, cfg.noise_dim))
        gen.refresh()
        disc.refresh()
        fake = gen(Tensor(batch["text"]), Tensor(noise))
        crows = _center_rows(centers, batch["row_relations"])
        adv = -ad.mean(disc.score(fake))
        l_cls = classification_loss(fake, crows, Tensor(batch["negatives"]), cfg.margin)
        per_rel = []
        block = sampler.per_rel
        for j, rel in enumerate(batch["relations"]):
            rows = ad.narrow(fake, 0, j * block, block)
            per_rel.append(pivot_regularizer(rows, centers[rel]))
        l_p = cfg.pivot_coef * _mean_scalars(per_rel)
        loss = adv + l_cls + l_p
        grads = [g.data for g in ad.grad(loss, gen.params)]
        adam_step(gen.params, grads, g_state)
        return loss.item(), l_cls.item(), l_p.item()

    for step in range(1, cfg.steps + 1):
        d_loss = gp_val = 0.0
        for _ in range(cfg.n_d):
            d_loss, gp_val = d_update()
        g_loss, l_cls_val, l_p_val = g_update()
        _check_finite(step, d_loss=d_loss, g_loss=g_loss)
        record = {"step": step, "d_loss": d_loss, "g_loss": g_loss,
                  "gp": gp_val, "l_cls": l_cls_val, "l_p": l_p_val}
        if step % cfg.eval_every == 0 or step == cfg.steps:
            mrr = validation_mrr(split, gen, text_vectors, encode_pairs, cfg, seed)
            record["valid_mrr"] = mrr
            if mrr > best["mrr"]:
                best = {"mrr": mrr, "gen": _params_copy(gen.params),
                        "disc": _params_copy(disc.params), "step": step}
        log.append(record)

    if cfg.steps > 0:
        _params_restore(gen.params, best["gen"])
        _params_restore(disc.params, best["disc"])
        gen.refresh()
        disc.refresh()
    return gen, disc, log


def _params_copy(params: list[Parameter]) -> dict[str, np.ndarray]:
    return {p.name: p.data.copy() for p in params}


def _params_restore(params: list[Parameter], values: dict[str, np.ndarray]) -> None:
    for p in params:
        p.data = values[p.name].copy()


def _mean_scalars(values: list[Tensor]) -> Tensor:
    total = values[0]
    for v in values[1:]:
        total = total + v
    return total * (1.0 / len(values))


def generation_score_fn(gen: Generator, text_vectors: dict[int, np.ndarray],
                        encode_pairs, cfg: GanConfig, seed: int):
    def generate_for_relation(rel: int, noise: np.ndarray) -> np.ndarray:
        if rel not in text_vectors:
            raise DataError(f"no description embedding for relation {rel}")
        return gen.generate_np(text_vectors[rel], noise)

    return make_generator_score_fn(generate_for_relation, encode_pairs,
                                   cfg.eval_n_test, cfg.noise_dim, seed)


def validation_mrr(split: ZeroShotSplit, gen: Generator,
                   text_vectors: dict[int, np.ndarray], encode_pairs,
                   cfg: GanConfig, seed: int) -> float:
    score_fn = generation_score_fn(gen, text_vectors, encode_pairs, cfg, seed)
    return evaluate_queries(split.valid_candidates, score_fn).mrr


def mean_generated_embeddings(gen: Generator, text_vectors: dict[int, np.ndarray],
                              relation_ids: Sequence[int], n_samples: int,
                              noise_dim: int, seed: int) -> dict[int, np.ndarray]:
    """Noise-averaged generator output per relation, for embedding-quality
    diagnostics against cluster centers."""
    out = {}
    for rel in relation_ids:
        rng = seed_stream(seed, "gen-mean", rel)
        noise = rng.standard_normal((n_samples, noise_dim))
        out[rel] = gen.generate_np(text_vectors[rel], noise).mean(axis=0)
    return out
