"""Minimal reverse-mode autodiff on dense float64 arrays.

A ``Tensor`` wraps a numpy array and remembers the primitives that produced
it, so a scalar output can be differentiated with respect to any upstream
``Parameter``. Backward rules are themselves written in terms of tensor
primitives, which is what makes the engine support gradient-of-gradient:
``grad(..., create_graph=True)`` returns gradients that can be
differentiated again. That second-order path is exactly what the
discriminator's input-gradient-norm penalty needs.

Supported primitives are deliberately the small set the models here use:
add / mul / div with limited broadcasting (equal shapes, scalars, trailing
vectors, column vectors), 2-D matmul, transpose, reshape, concat/narrow,
sum/broadcast, row gather/scatter, tanh, leaky-relu, relu, sigmoid,
softplus, sqrt. Everything else (cosine, layer norm, norms, means) is a
composite of these, so its gradient is correct by construction.
"""

from __future__ import annotations

import numpy as np

from .errors import NonFiniteError

_grad_enabled = True


class no_grad:
    """Context manager that suspends graph recording."""

    def __enter__(self):
        global _grad_enabled
        self._prev = _grad_enabled
        _grad_enabled = False
        return self

    def __exit__(self, *exc):
        global _grad_enabled
        _grad_enabled = self._prev
        return False


class Tensor:
    """Dense float64 array plus the recorded operation that produced it.

    All entries must be finite; construction raises ``NonFiniteError``
    otherwise, which is how training divergence is detected.
    """

    __slots__ = ("data", "parents", "vjps", "requires_grad")

    def __init__(self, data, requires_grad=False, parents=(), vjps=()):
        arr = np.asarray(data, dtype=np.float64)
        if not np.all(np.isfinite(arr)):
            raise NonFiniteError("non-finite values in tensor")
        self.data = arr
        self.requires_grad = requires_grad
        self.parents = parents
        self.vjps = vjps

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    def item(self) -> float:
        return float(self.data)

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad})"

    # operator sugar; all routed through the module-level primitives
    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __neg__(self):
        return mul(self, -1.0)

    def __sub__(self, other):
        return add(self, mul(other, -1.0) if isinstance(other, Tensor) else -np.asarray(other, dtype=np.float64))

    def __rsub__(self, other):
        return add(mul(self, -1.0), other)

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(_as_tensor(other), self)

    def __matmul__(self, other):
        return matmul(self, other)

    def __pow__(self, exponent):
        if exponent == 2:
            return mul(self, self)
        raise ValueError("only squaring is supported")


class Parameter(Tensor):
    """Named trainable tensor with a gradient accumulator."""

    __slots__ = ("name", "grad")

    def __init__(self, data, name: str):
        super().__init__(data, requires_grad=True)
        self.name = name
        self.grad = np.zeros_like(self.data)

    def zero_grad(self):
        self.grad = np.zeros_like(self.data)


def _as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _node(data, parents, vjps) -> Tensor:
    """Create an op output, recording the graph only when it matters."""
    if _grad_enabled and any(p.requires_grad for p in parents):
        return Tensor(data, requires_grad=True, parents=parents, vjps=vjps)
    return Tensor(data)


def _reduce_to(g: Tensor, shape: tuple) -> Tensor:
    """Sum out broadcast axes so ``g`` matches ``shape`` (vjp helper)."""
    if g.data.shape == shape:
        return g
    extra = g.data.ndim - len(shape)
    if extra > 0:
        g = tsum(g, axis=tuple(range(extra)), keepdims=False)
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and g.data.shape[i] != 1)
    if axes:
        g = tsum(g, axis=axes, keepdims=True)
    return g


# ---------------------------------------------------------------------------
# primitives

def add(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    out = a.data + b.data
    return _node(out, (a, b), (
        lambda g: _reduce_to(g, a.data.shape),
        lambda g: _reduce_to(g, b.data.shape),
    ))


def mul(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    out = a.data * b.data
    return _node(out, (a, b), (
        lambda g: _reduce_to(mul(g, b), a.data.shape),
        lambda g: _reduce_to(mul(g, a), b.data.shape),
    ))


def div(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    out = a.data / b.data
    return _node(out, (a, b), (
        lambda g: _reduce_to(div(g, b), a.data.shape),
        lambda g: _reduce_to(mul(mul(g, -1.0), div(a, mul(b, b))), b.data.shape),
    ))


def matmul(a: Tensor, b: Tensor) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    if a.ndim != 2 or b.ndim != 2:
        raise ValueError(f"matmul expects 2-D operands, got {a.shape} @ {b.shape}")
    out = a.data @ b.data
    return _node(out, (a, b), (
        lambda g: matmul(g, transpose(b)),
        lambda g: matmul(transpose(a), g),
    ))


def transpose(a: Tensor) -> Tensor:
    a = _as_tensor(a)
    return _node(a.data.T.copy(), (a,), (lambda g: transpose(g),))


def reshape(a: Tensor, shape) -> Tensor:
    a = _as_tensor(a)
    orig = a.data.shape
    return _node(a.data.reshape(shape).copy(), (a,), (lambda g: reshape(g, orig),))


def concat(parts, axis: int = 0) -> Tensor:
    parts = [_as_tensor(p) for p in parts]
    out = np.concatenate([p.data for p in parts], axis=axis)
    offsets = np.cumsum([0] + [p.data.shape[axis] for p in parts])

    def make_vjp(i):
        start, length = int(offsets[i]), int(offsets[i + 1] - offsets[i])
        return lambda g: narrow(g, axis, start, length)

    return _node(out, tuple(parts), tuple(make_vjp(i) for i in range(len(parts))))


def narrow(a: Tensor, axis: int, start: int, length: int) -> Tensor:
    a = _as_tensor(a)
    index = [slice(None)] * a.ndim
    index[axis] = slice(start, start + length)
    index = tuple(index)
    full_shape = a.data.shape
    return _node(a.data[index].copy(), (a,),
                 (lambda g: _pad_narrow(g, axis, start, full_shape),))


def _pad_narrow(g: Tensor, axis: int, start: int, full_shape: tuple) -> Tensor:
    g = _as_tensor(g)
    out = np.zeros(full_shape)
    index = [slice(None)] * len(full_shape)
    index[axis] = slice(start, start + g.data.shape[axis])
    out[tuple(index)] = g.data
    length = g.data.shape[axis]
    return _node(out, (g,), (lambda gg: narrow(gg, axis, start, length),))


def tsum(a: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    a = _as_tensor(a)
    in_shape = a.data.shape
    out = a.data.sum(axis=axis, keepdims=keepdims)

    def vjp(g):
        gd = g
        if not keepdims and axis is not None:
            axes = (axis,) if isinstance(axis, int) else tuple(axis)
            kshape = list(in_shape)
            for ax in axes:
                kshape[ax] = 1
            gd = reshape(gd, tuple(kshape))
        elif not keepdims and axis is None:
            gd = reshape(gd, (1,) * len(in_shape))
        return broadcast_to(gd, in_shape)

    return _node(out, (a,), (vjp,))


def broadcast_to(a: Tensor, shape) -> Tensor:
    a = _as_tensor(a)
    orig = a.data.shape
    out = np.broadcast_to(a.data, shape).copy()
    return _node(out, (a,), (lambda g: _reduce_to(g, orig),))


def take_rows(a: Tensor, idx) -> Tensor:
    """Gather rows; the adjoint scatter-adds into a zero tensor."""
    a = _as_tensor(a)
    idx = np.asarray(idx, dtype=np.int64)
    n_rows = a.data.shape[0]
    return _node(a.data[idx].copy(), (a,), (lambda g: _scatter_rows(g, idx, n_rows),))


def _scatter_rows(g: Tensor, idx, n_rows: int) -> Tensor:
    g = _as_tensor(g)
    out = np.zeros((n_rows,) + g.data.shape[1:])
    np.add.at(out, idx, g.data)
    return _node(out, (g,), (lambda gg: take_rows(gg, idx),))


def tanh(a: Tensor) -> Tensor:
    a = _as_tensor(a)
    out_data = np.tanh(a.data)
    out = _node(out_data, (a,), ())
    if out.requires_grad:
        out.vjps = (lambda g: mul(g, add(1.0, mul(mul(out, out), -1.0))),)
    return out


def sigmoid(a: Tensor) -> Tensor:
    a = _as_tensor(a)
    out_data = 1.0 / (1.0 + np.exp(-np.abs(a.data)))
    out_data = np.where(a.data >= 0, out_data, 1.0 - out_data)
    out = _node(out_data, (a,), ())
    if out.requires_grad:
        out.vjps = (lambda g: mul(g, mul(out, add(1.0, mul(out, -1.0)))),)
    return out


def softplus(a: Tensor) -> Tensor:
    a = _as_tensor(a)
    out = np.logaddexp(0.0, a.data)
    return _node(out, (a,), (lambda g: mul(g, sigmoid(a)),))


def relu(a: Tensor) -> Tensor:
    a = _as_tensor(a)
    mask = (a.data > 0).astype(np.float64)
    return _node(a.data * mask, (a,), (lambda g: mul(g, Tensor(mask)),))


def leaky_relu(a: Tensor, slope: float = 0.2) -> Tensor:
    a = _as_tensor(a)
    scale = np.where(a.data > 0, 1.0, slope)
    return _node(a.data * scale, (a,), (lambda g: mul(g, Tensor(scale)),))


def sqrt(a: Tensor) -> Tensor:
    a = _as_tensor(a)
    out_data = np.sqrt(a.data)
    out = _node(out_data, (a,), ())
    if out.requires_grad:
        out.vjps = (lambda g: div(mul(g, 0.5), out),)
    return out


# ---------------------------------------------------------------------------
# composites

def mean(a: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    a = _as_tensor(a)
    if axis is None:
        count = a.data.size
    else:
        axes = (axis,) if isinstance(axis, int) else tuple(axis)
        count = int(np.prod([a.data.shape[ax] for ax in axes]))
    return mul(tsum(a, axis=axis, keepdims=keepdims), 1.0 / count)


def dot(a: Tensor, b: Tensor) -> Tensor:
    return tsum(mul(a, b))


def l2norm(a: Tensor, axis=None, keepdims: bool = False, eps: float = 0.0) -> Tensor:
    sq = tsum(mul(a, a), axis=axis, keepdims=keepdims)
    return sqrt(add(sq, eps)) if eps else sqrt(sq)


def cosine(a: Tensor, b: Tensor) -> Tensor:
    """Cosine similarity of two vectors; rejects zero vectors."""
    a, b = _as_tensor(a), _as_tensor(b)
    if not np.any(a.data) or not np.any(b.data):
        raise ValueError("cosine similarity of a zero vector is undefined")
    return div(dot(a, b), mul(l2norm(a), l2norm(b)))


def row_cosine(a: Tensor, b: Tensor, eps: float = 1e-12) -> Tensor:
    """Row-wise cosine similarity for two (n, d) tensors; returns (n,)."""
    num = tsum(mul(a, b), axis=1)
    den = mul(l2norm(a, axis=1, eps=eps), l2norm(b, axis=1, eps=eps))
    return div(num, den)


def layer_norm(x: Tensor, gain: Tensor, bias: Tensor, eps: float = 1e-5) -> Tensor:
    """Per-row layer normalization over the last axis of a 2-D tensor."""
    x = _as_tensor(x)
    if x.ndim != 2 or x.data.shape[1] < 2:
        raise ValueError("layer_norm expects (n, d) input with d >= 2")
    m = mean(x, axis=1, keepdims=True)
    centered = add(x, mul(m, -1.0))
    var = mean(mul(centered, centered), axis=1, keepdims=True)
    normed = div(centered, sqrt(add(var, eps)))
    return add(mul(normed, gain), bias)


def linear(x: Tensor, weight: Tensor, bias: Tensor | None = None) -> Tensor:
    """Affine map for row-major batches: x (n, in) with weight (out, in)."""
    out = matmul(x, transpose(weight))
    if bias is not None:
        out = add(out, bias)
    return out


# ---------------------------------------------------------------------------
# differentiation

def _topo_order(root: Tensor) -> list[Tensor]:
    order, seen, stack = [], set(), [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen or not node.requires_grad:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node.parents:
            stack.append((p, False))
    return order


def grad(output: Tensor, wrt, create_graph: bool = False) -> list[Tensor]:
    """Gradients of a scalar output with respect to each tensor in ``wrt``.

    With ``create_graph=True`` the returned gradients are themselves graph
    nodes, so expressions built from them (e.g. a gradient norm) can be
    differentiated again.
    """
    if output.data.size != 1:
        raise ValueError("grad expects a scalar output")
    wanted = {id(w) for w in wrt}
    grads: dict[int, Tensor] = {id(output): Tensor(np.ones_like(output.data))}

    def run():
        for node in reversed(_topo_order(output)):
            g = grads.pop(id(node), None)
            if g is None:
                continue
            if id(node) in wanted:
                grads[id(node)] = g
            for parent, vjp in zip(node.parents, node.vjps):
                if not parent.requires_grad:
                    continue
                contrib = vjp(g)
                held = grads.get(id(parent))
                grads[id(parent)] = contrib if held is None else add(held, contrib)

    if create_graph:
        run()
    else:
        with no_grad():
            run()
    return [grads.get(id(w), Tensor(np.zeros_like(w.data))) for w in wrt]


def backward(output: Tensor, params: list[Parameter]) -> dict[str, np.ndarray]:
    """Accumulate gradients of a scalar output into ``param.grad``."""
    gs = grad(output, params)
    out = {}
    for p, g in zip(params, gs):
        p.grad = p.grad + g.data
        out[p.name] = g.data
    return out


def input_gradient_norm(output: Tensor, probe: Tensor, eps: float = 0.0) -> Tensor:
    """L2 norm of d(output)/d(probe), differentiable w.r.t. parameters."""
    if not probe.requires_grad:
        raise ValueError("probe does not participate in the recorded computation")
    (g,) = grad(output, [probe], create_graph=True)
    return l2norm(g, eps=eps)
