"""Adam updates and spectral normalization with persistent power iteration."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from .autodiff import Parameter, Tensor


@dataclass
class AdamState:
    """Per-parameter first/second moments plus the shared step counter."""

    alpha: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha, "beta1": self.beta1, "beta2": self.beta2,
            "eps": self.eps, "t": self.t,
            "m": {k: v.tolist() for k, v in self.m.items()},
            "v": {k: v.tolist() for k, v in self.v.items()},
        }

    @classmethod
    def from_dict(cls, d: dict, params: list[Parameter]) -> "AdamState":
        shapes = {p.name: p.data.shape for p in params}
        state = cls(alpha=d["alpha"], beta1=d["beta1"], beta2=d["beta2"],
                    eps=d["eps"], t=d["t"])
        state.m = {k: np.asarray(v, dtype=np.float64).reshape(shapes[k]) for k, v in d["m"].items()}
        state.v = {k: np.asarray(v, dtype=np.float64).reshape(shapes[k]) for k, v in d["v"].items()}
        return state


def adam_step(params: list[Parameter], grads: list[np.ndarray], state: AdamState) -> None:
    """One bias-corrected Adam update, in place. Deterministic."""
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    bc1 = 1.0 - b1 ** state.t
    bc2 = 1.0 - b2 ** state.t
    for p, g in zip(params, grads):
        if g.shape != p.data.shape:
            raise ValueError(f"gradient shape {g.shape} != parameter shape {p.data.shape} for {p.name}")
        m = state.m.get(p.name)
        if m is None:
            m = np.zeros_like(p.data)
            state.v[p.name] = np.zeros_like(p.data)
        v = state.v[p.name]
        m = b1 * m + (1.0 - b1) * g
        v = b2 * v + (1.0 - b2) * g * g
        state.m[p.name], state.v[p.name] = m, v
        p.data = p.data - state.alpha * (m / bc1) / (np.sqrt(v / bc2) + state.eps)


class PowerIterState:
    """Persistent left/right singular-vector estimates for one weight matrix."""

    def __init__(self, shape: tuple[int, int], rng: np.random.Generator):
        self.u = _unit(rng.standard_normal(shape[0]))
        self.v = _unit(rng.standard_normal(shape[1]))

    def to_dict(self) -> dict:
        return {"u": self.u.tolist(), "v": self.v.tolist()}

    def load(self, d: dict) -> None:
        self.u = np.asarray(d["u"], dtype=np.float64)
        self.v = np.asarray(d["v"], dtype=np.float64)


def _unit(x: np.ndarray, eps: float = 1e-12) -> np.ndarray:
    return x / (np.linalg.norm(x) + eps)


def power_iterate(weight: np.ndarray, state: PowerIterState, n_iter: int = 1) -> float:
    """Update u/v in place and return the top-singular-value estimate.

    ``n_iter=0`` iterates adaptively until the estimate stops moving
    (relative change below 1e-7, capped at 200 rounds), which keeps the
    estimate tight while the weight drifts under optimization.
    """
    if n_iter == 0:
        sigma = float(state.u @ weight @ state.v)
        for _ in range(200):
            state.v = _unit(weight.T @ state.u)
            state.u = _unit(weight @ state.v)
            new_sigma = float(state.u @ weight @ state.v)
            if abs(new_sigma - sigma) <= 1e-7 * max(1.0, abs(new_sigma)):
                return new_sigma
            sigma = new_sigma
        return sigma
    for _ in range(n_iter):
        state.v = _unit(weight.T @ state.u)
        state.u = _unit(weight @ state.v)
    return float(state.u @ weight @ state.v)


def spectral_normalize(weight: Parameter | Tensor, state: PowerIterState, n_iter: int = 1) -> Tensor:
    """Divide a 2-D weight by its estimated top singular value.

    The estimate sigma = u^T W v is built from tensor ops with u, v held
    constant, so gradients flow through sigma as well as through W. A zero
    matrix is returned unchanged (sigma treated as 1).
    """
    if weight.data.ndim != 2:
        raise ValueError("spectral normalization expects a 2-D weight")
    sigma_probe = power_iterate(weight.data, state, n_iter)
    if abs(sigma_probe) < 1e-12:
        return weight if isinstance(weight, Tensor) else Tensor(weight)
    u = Tensor(state.u.reshape(1, -1))
    v = Tensor(state.v.reshape(-1, 1))
    sigma = ad.matmul(ad.matmul(u, weight), v)  # (1, 1)
    return ad.div(weight, sigma)
