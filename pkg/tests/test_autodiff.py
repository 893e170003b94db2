"""Gradient correctness for the autodiff core.

Every primitive and every composite used by the models is checked against
central finite differences; a handful of gradients with known closed
forms are additionally pinned to exact values. Second-order (gradient of
gradient) is checked against analytic second derivatives, since the
gradient-norm penalty in the adversarial loss depends on it.
"""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from zskg import autodiff as ad
from zskg.autodiff import Parameter, Tensor
from zskg.errors import NonFiniteError


def fd_grad(f, x, eps: float = 1e-6) -> np.ndarray:
    """Central finite-difference gradient of scalar f at x (any shape)."""
    x = np.array(x, dtype=np.float64)
    g = np.zeros_like(x)
    it = np.nditer(x, flags=["multi_index"], op_flags=["readwrite"])
    for _ in it:
        idx = it.multi_index
        orig = x[idx]
        x[idx] = orig + eps
        hi = f(x)
        x[idx] = orig - eps
        lo = f(x)
        x[idx] = orig
        g[idx] = (hi - lo) / (2.0 * eps)
    return g


def check_param_grads(build, arrays: dict[str, np.ndarray],
                      rtol: float = 1e-5, atol: float = 1e-7) -> None:
    """Compare autodiff and FD gradients of ``build(params) -> scalar Tensor``
    for every array in ``arrays``."""
    arrays = {k: np.array(v, dtype=np.float64) for k, v in arrays.items()}
    params = {k: Parameter(v.copy(), k) for k, v in arrays.items()}
    out = build(params)
    grads = ad.grad(out, list(params.values()))
    for (name, p), g in zip(params.items(), grads):
        def f(x, name=name):
            trial = {k: Parameter(v.data.copy(), k) for k, v in params.items()}
            trial[name].data = x
            return float(build(trial).data)
        np.testing.assert_allclose(g.data, fd_grad(f, arrays[name].copy()),
                                   rtol=rtol, atol=atol, err_msg=name)


# ---------------------------------------------------------------------------
# exact closed forms

def test_square_grad_exact():
    x = Parameter(np.array(3.0), "x")
    (g,) = ad.grad(x ** 2, [x])
    assert g.data == pytest.approx(6.0, abs=1e-12)


def test_matmul_grad_exact():
    a = Parameter(np.array([[1.0, 2.0], [3.0, 4.0]]), "a")
    b = Parameter(np.array([[5.0], [6.0]]), "b")
    out = ad.tsum(a @ b)
    ga, gb = ad.grad(out, [a, b])
    np.testing.assert_array_equal(ga.data, [[5.0, 6.0], [5.0, 6.0]])
    np.testing.assert_array_equal(gb.data, [[4.0], [6.0]])


def test_cosine_grad_exact():
    # d cos(a,b)/da = b/(|a||b|) - cos * a/|a|^2, here with a=(3,4), b=(5,12)
    a = Parameter(np.array([3.0, 4.0]), "a")
    b = Tensor(np.array([5.0, 12.0]))
    (g,) = ad.grad(ad.cosine(a, b), [a])
    np.testing.assert_allclose(g.data, [-64.0 / 1625.0, 48.0 / 1625.0],
                               rtol=0, atol=1e-12)


def test_take_rows_scatter_adds_repeats():
    x = Parameter(np.arange(6, dtype=np.float64).reshape(3, 2), "x")
    (g,) = ad.grad(ad.tsum(ad.take_rows(x, [0, 0, 2])), [x])
    np.testing.assert_array_equal(g.data, [[2.0, 2.0], [0.0, 0.0], [1.0, 1.0]])


def test_sigmoid_softplus_values():
    assert ad.sigmoid(Tensor(0.0)).data == pytest.approx(0.5)
    assert ad.softplus(Tensor(0.0)).data == pytest.approx(np.log(2.0), abs=1e-15)
    # large negative input must not overflow
    assert ad.softplus(Tensor(-745.0)).data == pytest.approx(0.0, abs=1e-300)
    assert np.isfinite(ad.sigmoid(Tensor(-745.0)).data)


def test_layer_norm_unit_gain_row():
    x = Tensor(np.array([[1.0, 3.0]]))
    gain = Tensor(np.ones(2))
    bias = Tensor(np.zeros(2))
    out = ad.layer_norm(x, gain, bias, eps=1e-5)
    expect = (np.array([1.0, 3.0]) - 2.0) / np.sqrt(1.0 + 1e-5)
    np.testing.assert_allclose(out.data[0], expect, rtol=0, atol=1e-15)


# ---------------------------------------------------------------------------
# finite-difference checks per primitive

def _rng():
    return np.random.default_rng(11)


@pytest.mark.parametrize("shape_a,shape_b", [
    ((3, 4), (3, 4)),     # equal shapes
    ((3, 4), (4,)),       # trailing vector broadcast
    ((3, 4), (3, 1)),     # column broadcast
    ((3, 4), ()),         # scalar broadcast
])
@pytest.mark.parametrize("op", [ad.add, ad.mul, ad.div])
def test_elementwise_broadcast_grads(op, shape_a, shape_b):
    rng = _rng()
    a = rng.standard_normal(shape_a)
    b = rng.standard_normal(shape_b) + 3.0  # keep divisors away from zero
    probe = Tensor(rng.standard_normal(shape_a))
    check_param_grads(lambda p: ad.tsum(ad.mul(op(p["a"], p["b"]), probe)),
                      {"a": a, "b": b})


def test_matmul_transpose_reshape_grads():
    rng = _rng()
    arrays = {"a": rng.standard_normal((3, 5)), "b": rng.standard_normal((5, 2))}
    probe = Tensor(rng.standard_normal((2, 3)))

    def build(p):
        prod = ad.matmul(p["a"], p["b"])            # (3, 2)
        back = ad.transpose(prod)                   # (2, 3)
        return ad.tsum(ad.mul(ad.reshape(back, (3, 2)), ad.transpose(probe)))

    check_param_grads(build, arrays)


def test_concat_narrow_grads():
    rng = _rng()
    arrays = {"a": rng.standard_normal((2, 3)), "b": rng.standard_normal((2, 2))}
    probe = Tensor(rng.standard_normal((2, 4)))

    def build(p):
        joined = ad.concat([p["a"], p["b"]], axis=1)     # (2, 5)
        clipped = ad.narrow(joined, 1, 1, 4)             # drops first column
        return ad.tsum(ad.mul(clipped, probe))

    check_param_grads(build, arrays)


@pytest.mark.parametrize("axis,keepdims", [(None, False), (0, False), (1, True), ((0, 1), False)])
def test_sum_axes_grads(axis, keepdims):
    rng = _rng()
    x = rng.standard_normal((4, 3))

    def build(p):
        s = ad.tsum(p["x"], axis=axis, keepdims=keepdims)
        return ad.tsum(ad.mul(s, s))

    check_param_grads(build, {"x": x})


def test_broadcast_to_grad():
    rng = _rng()
    probe = Tensor(rng.standard_normal((4, 3)))
    check_param_grads(
        lambda p: ad.tsum(ad.mul(ad.broadcast_to(p["x"], (4, 3)), probe)),
        {"x": rng.standard_normal((1, 3))})


@pytest.mark.parametrize("fn", [ad.tanh, ad.sigmoid, ad.softplus, ad.sqrt])
def test_smooth_unary_grads(fn):
    rng = _rng()
    x = rng.uniform(0.5, 2.5, size=(3, 4))  # positive domain also suits sqrt
    probe = Tensor(rng.standard_normal((3, 4)))
    check_param_grads(lambda p: ad.tsum(ad.mul(fn(p["x"]), probe)), {"x": x})


@pytest.mark.parametrize("fn", [ad.relu, ad.leaky_relu])
def test_piecewise_unary_grads(fn):
    rng = _rng()
    x = rng.standard_normal((3, 4))
    x[np.abs(x) < 0.05] = 0.1  # keep FD probes away from the kink
    probe = Tensor(rng.standard_normal((3, 4)))
    check_param_grads(lambda p: ad.tsum(ad.mul(fn(p["x"]), probe)), {"x": x})


def test_take_rows_grads():
    rng = _rng()
    x = rng.standard_normal((5, 3))
    idx = np.array([4, 0, 0, 2])
    probe = Tensor(rng.standard_normal((4, 3)))
    check_param_grads(lambda p: ad.tsum(ad.mul(ad.take_rows(p["x"], idx), probe)),
                      {"x": x})


# ---------------------------------------------------------------------------
# composite expressions

def test_mlp_composite_grads():
    """One forward pass shaped like the models here: linear -> layer norm ->
    leaky-relu -> linear -> row cosine against a reference."""
    rng = _rng()
    arrays = {
        "w1": rng.standard_normal((6, 4)) * 0.5,
        "b1": rng.standard_normal(6) * 0.1,
        "gain": rng.uniform(0.5, 1.5, size=6),
        "bias": rng.standard_normal(6) * 0.1,
        "w2": rng.standard_normal((3, 6)) * 0.5,
        "b2": rng.standard_normal(3) * 0.1,
    }
    x = Tensor(rng.standard_normal((5, 4)))
    ref = Tensor(rng.standard_normal((5, 3)))

    def build(p):
        h = ad.linear(x, p["w1"], p["b1"])
        h = ad.layer_norm(h, p["gain"], p["bias"])
        h = ad.leaky_relu(h)
        out = ad.linear(h, p["w2"], p["b2"])
        return ad.mean(ad.row_cosine(out, ref))

    check_param_grads(build, arrays, rtol=1e-4, atol=1e-6)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 31 - 1))
def test_random_composite_grads(seed):
    rng = np.random.default_rng(seed)
    arrays = {"w": rng.standard_normal((4, 3)) * 0.7,
              "v": rng.standard_normal((4,)) * 0.7}
    x = Tensor(rng.standard_normal((2, 3)))

    def build(p):
        h = ad.tanh(ad.matmul(x, ad.transpose(p["w"])))
        num = ad.tsum(ad.mul(h, p["v"]), axis=1)
        den = ad.l2norm(h, axis=1, eps=1e-12)
        return ad.mean(ad.div(num, den)) + ad.tsum(ad.mul(p["w"], p["w"])) * 0.05

    check_param_grads(build, arrays, rtol=1e-4, atol=1e-6)


# ---------------------------------------------------------------------------
# second order

def test_grad_of_grad_cubic():
    # f = sum(x^3): grad 3x^2, grad of sum(grad) is 6x exactly
    x = Parameter(np.array([1.5, -2.0, 0.5]), "x")
    f = ad.tsum(ad.mul(ad.mul(x, x), x))
    (g,) = ad.grad(f, [x], create_graph=True)
    np.testing.assert_allclose(g.data, 3.0 * x.data ** 2, rtol=0, atol=1e-12)
    (gg,) = ad.grad(ad.tsum(g), [x])
    np.testing.assert_allclose(gg.data, 6.0 * x.data, rtol=0, atol=1e-12)


def test_grad_of_grad_tanh():
    # second derivative of tanh is -2 t (1 - t^2)
    x = Parameter(np.array([0.3, -0.7, 1.1]), "x")
    (g,) = ad.grad(ad.tsum(ad.tanh(x)), [x], create_graph=True)
    (gg,) = ad.grad(ad.tsum(g), [x])
    t = np.tanh(x.data)
    np.testing.assert_allclose(gg.data, -2.0 * t * (1.0 - t * t), rtol=1e-12, atol=1e-12)


def test_input_gradient_norm_second_order_fd():
    """The adversarial gradient penalty differentiates ||d out/d probe||
    with respect to the weights; check that path against FD."""
    rng = _rng()
    arrays = {"w": rng.standard_normal((4, 3)) * 0.6}
    x_data = rng.standard_normal((1, 3))

    def build(p):
        probe = Tensor(x_data.copy(), requires_grad=True)
        out = ad.tsum(ad.tanh(ad.matmul(probe, ad.transpose(p["w"]))))
        gn = ad.input_gradient_norm(out, probe, eps=1e-12)
        return (gn - 1.0) ** 2

    check_param_grads(build, arrays, rtol=1e-4, atol=1e-6)


def test_input_gradient_norm_linear_map_exact():
    # for out = sum(W x), the probe gradient is the column sums of W
    w = Tensor(np.array([[1.0, 2.0], [3.0, 4.0]]))
    probe = Tensor(np.array([[0.5, -0.5]]), requires_grad=True)
    out = ad.tsum(ad.matmul(probe, ad.transpose(w)))
    gn = ad.input_gradient_norm(out, probe)
    np.testing.assert_allclose(gn.data, np.hypot(4.0, 6.0), rtol=0, atol=1e-12)


# ---------------------------------------------------------------------------
# machinery

def test_unused_parameter_gets_zero_grad():
    x = Parameter(np.ones(3), "x")
    y = Parameter(np.ones(3), "y")
    (gy,) = ad.grad(ad.tsum(ad.mul(x, x)), [y])
    np.testing.assert_array_equal(gy.data, np.zeros(3))


def test_grad_rejects_vector_output():
    x = Parameter(np.ones(3), "x")
    with pytest.raises(ValueError):
        ad.grad(ad.mul(x, 2.0), [x])


def test_non_finite_rejected():
    with pytest.raises(NonFiniteError):
        Tensor(np.array([1.0, np.inf]))
    with np.errstate(divide="ignore"), pytest.raises(NonFiniteError):
        ad.div(Tensor(1.0), Tensor(0.0))


def test_no_grad_suppresses_graph():
    x = Parameter(np.ones(3), "x")
    with ad.no_grad():
        out = ad.tsum(ad.mul(x, x))
    assert not out.requires_grad and out.parents == ()


def test_detach_cuts_graph():
    x = Parameter(np.ones(3), "x")
    (g,) = ad.grad(ad.tsum(ad.mul(ad.tanh(x).detach(), x)), [x])
    np.testing.assert_allclose(g.data, np.tanh(1.0) * np.ones(3))


def test_pow_only_supports_square():
    x = Parameter(np.ones(3), "x")
    with pytest.raises(ValueError):
        x ** 3


def test_matmul_rejects_non_2d():
    with pytest.raises(ValueError):
        ad.matmul(Tensor(np.ones(3)), Tensor(np.ones((3, 2))))


def test_layer_norm_rejects_single_column():
    with pytest.raises(ValueError):
        ad.layer_norm(Tensor(np.ones((2, 1))), Tensor(np.ones(1)), Tensor(np.zeros(1)))


def test_cosine_rejects_zero_vector():
    with pytest.raises(ValueError):
        ad.cosine(Tensor(np.zeros(3)), Tensor(np.ones(3)))
