"""Fully-connected layers and layer norm built on the autodiff core.

Initialization is uniform in +/- 1/sqrt(fan_in), seeded. Layers with
spectral normalization keep persistent power-iteration vectors; the
normalized weight is refreshed once per optimizer phase via
``normalized_weight`` so every forward inside one update sees the same
effective weight.
"""

from __future__ import annotations

import numpy as np

from . import autodiff as ad
from .autodiff import Parameter, Tensor
from .optim import PowerIterState, power_iterate, spectral_normalize


class Linear:
    """Affine layer, weight stored (out_dim, in_dim), optional spectral norm."""

    def __init__(self, in_dim: int, out_dim: int, name: str,
                 rng: np.random.Generator, spectral: bool = False):
        bound = 1.0 / np.sqrt(in_dim)
        self.weight = Parameter(rng.uniform(-bound, bound, size=(out_dim, in_dim)), f"{name}.weight")
        self.bias = Parameter(rng.uniform(-bound, bound, size=(out_dim,)), f"{name}.bias")
        self.spectral_state = PowerIterState((out_dim, in_dim), rng) if spectral else None
        if self.spectral_state is not None:
            power_iterate(self.weight.data, self.spectral_state, n_iter=50)  # warm start
        self._effective_weight: Tensor = self.weight

    def refresh(self, n_iter: int = 0) -> None:
        """Advance the power iteration (adaptively, by default) and rebuild
        the normalized weight."""
        if self.spectral_state is not None:
            self._effective_weight = spectral_normalize(self.weight, self.spectral_state, n_iter)
        else:
            self._effective_weight = self.weight

    def __call__(self, x: Tensor) -> Tensor:
        return ad.linear(x, self._effective_weight, self.bias)

    @property
    def params(self) -> list[Parameter]:
        return [self.weight, self.bias]


class LayerNorm:
    """Learnable gain/bias layer normalization (gain 1, bias 0 at init)."""

    def __init__(self, dim: int, name: str, eps: float = 1e-5):
        self.gain = Parameter(np.ones(dim), f"{name}.gain")
        self.bias = Parameter(np.zeros(dim), f"{name}.bias")
        self.eps = eps

    def __call__(self, x: Tensor) -> Tensor:
        return ad.layer_norm(x, self.gain, self.bias, eps=self.eps)

    @property
    def params(self) -> list[Parameter]:
        return [self.gain, self.bias]


def params_to_dict(params: list[Parameter]) -> dict[str, np.ndarray]:
    return {p.name: p.data for p in params}


def load_params(params: list[Parameter], values: dict[str, np.ndarray]) -> None:
    for p in params:
        arr = np.asarray(values[p.name], dtype=np.float64).reshape(p.data.shape)
        p.data = arr.copy()
