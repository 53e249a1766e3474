"""Layer-level behavior: shapes, hand-computed values, and error paths."""

import math

import numpy as np
import pytest

from aclab.errors import ShapeError, SpecError, StateError
from aclab.nn.layers import (
    Conv2d,
    Dense,
    Identity,
    Relu,
    Scale,
    Sigmoid,
    Tanh,
    glorot_init,
)


def test_glorot_bounds():
    rng = np.random.default_rng(0)
    w = glorot_init(40, 60, rng)
    limit = math.sqrt(6.0 / 100.0)
    assert w.shape == (40, 60)
    assert np.all(np.abs(w) < limit)


def test_glorot_custom_shape():
    rng = np.random.default_rng(1)
    w = glorot_init(2 * 9, 4 * 9, rng, shape=(4, 2, 3, 3))
    assert w.shape == (4, 2, 3, 3)
    assert np.all(np.abs(w) < math.sqrt(6.0 / 54.0))


def test_glorot_seeded_reproducible():
    a = glorot_init(5, 7, np.random.default_rng(42))
    b = glorot_init(5, 7, np.random.default_rng(42))
    assert np.array_equal(a, b)


def test_glorot_rejects_bad_fans():
    with pytest.raises(SpecError):
        glorot_init(0, 5, np.random.default_rng(0))


def test_dense_forward_matches_matmul():
    rng = np.random.default_rng(2)
    layer = Dense(4, 3, rng=rng)
    x = rng.normal(size=(5, 4))
    assert np.array_equal(layer.forward(x), x @ layer.weights + layer.bias)


def test_dense_flattens_trailing_dims():
    rng = np.random.default_rng(3)
    layer = Dense(2 * 3 * 3, 4, rng=rng)
    x = rng.normal(size=(6, 2, 3, 3))
    out = layer.forward(x)
    assert out.shape == (6, 4)
    assert np.array_equal(out, x.reshape(6, -1) @ layer.weights + layer.bias)


def test_dense_backward_gradients():
    rng = np.random.default_rng(4)
    layer = Dense(3, 2, rng=rng)
    x = rng.normal(size=(7, 3))
    layer.forward(x)
    g = rng.normal(size=(7, 2))
    grad_in = layer.backward(g)
    assert np.array_equal(layer.grad_weights, x.T @ g)
    assert np.array_equal(layer.grad_bias, g.sum(axis=0))
    assert np.array_equal(grad_in, g @ layer.weights.T)


def test_dense_backward_restores_input_shape():
    rng = np.random.default_rng(5)
    layer = Dense(8, 2, rng=rng)
    x = rng.normal(size=(3, 2, 2, 2))
    layer.forward(x)
    assert layer.backward(rng.normal(size=(3, 2))).shape == (3, 2, 2, 2)


def test_dense_rejects_wrong_width():
    layer = Dense(3, 2, rng=np.random.default_rng(0))
    with pytest.raises(ShapeError):
        layer.forward(np.zeros((4, 5)))


def test_dense_backward_before_forward():
    layer = Dense(3, 2, rng=np.random.default_rng(0))
    with pytest.raises(StateError):
        layer.backward(np.zeros((1, 2)))


def test_dense_rejects_bad_units():
    with pytest.raises(SpecError):
        Dense(0, 2, rng=np.random.default_rng(0))


def _conv_reference(x, weights, bias, stride):
    """Direct nested-loop convolution used as an oracle."""
    batch, _, in_side, _ = x.shape
    out_ch, in_ch, k, _ = weights.shape
    out_side = (in_side - k) // stride + 1
    out = np.zeros((batch, out_ch, out_side, out_side))
    for b in range(batch):
        for o in range(out_ch):
            for i in range(out_side):
                for j in range(out_side):
                    patch = x[b, :, i * stride : i * stride + k, j * stride : j * stride + k]
                    out[b, o, i, j] = np.sum(patch * weights[o]) + bias[o]
    return out


def test_conv_forward_matches_reference():
    rng = np.random.default_rng(6)
    layer = Conv2d(2, 3, kernel=3, stride=2, rng=rng)
    x = rng.normal(size=(4, 2, 9, 9))
    out = layer.forward(x)
    assert out.shape == (4, 3, 4, 4)
    assert np.allclose(out, _conv_reference(x, layer.weights, layer.bias, 2), atol=1e-12)


def test_conv_output_side():
    layer = Conv2d(1, 32, kernel=8, stride=4, rng=np.random.default_rng(0))
    assert layer.output_side(42) == 9
    second = Conv2d(32, 64, kernel=4, stride=2, rng=np.random.default_rng(0))
    assert second.output_side(9) == 3


def test_conv_backward_shapes():
    rng = np.random.default_rng(7)
    layer = Conv2d(2, 3, kernel=3, stride=2, rng=rng)
    x = rng.normal(size=(4, 2, 9, 9))
    out = layer.forward(x)
    grad_in = layer.backward(np.ones_like(out))
    assert grad_in.shape == x.shape
    assert layer.grad_weights.shape == layer.weights.shape
    assert layer.grad_bias.shape == layer.bias.shape
    # every output pixel contributes its bias gradient once
    assert np.allclose(layer.grad_bias, 4 * 4 * 4)


def test_conv_rejects_bad_params():
    with pytest.raises(SpecError):
        Conv2d(1, 1, kernel=0, stride=1, rng=np.random.default_rng(0))


def test_conv_glorot_uses_receptive_field_fans():
    rng = np.random.default_rng(8)
    layer = Conv2d(1, 32, kernel=8, stride=4, rng=rng)
    limit = math.sqrt(6.0 / (1 * 64 + 32 * 64))
    assert np.all(np.abs(layer.weights) < limit)
    # and the draw actually fills the range expected from these fans
    assert np.max(np.abs(layer.weights)) > 0.8 * limit


@pytest.mark.parametrize(
    "layer,fn,deriv",
    [
        (Relu(), lambda x: np.maximum(x, 0.0), lambda x: (x > 0).astype(float)),
        (Sigmoid(), lambda x: 1 / (1 + np.exp(-x)), None),
        (Tanh(), np.tanh, lambda x: 1 - np.tanh(x) ** 2),
        (Identity(), lambda x: x, lambda x: np.ones_like(x)),
    ],
)
def test_activation_values_and_derivatives(layer, fn, deriv):
    rng = np.random.default_rng(9)
    x = rng.normal(size=(5, 4))
    out = layer.forward(x)
    assert np.allclose(out, fn(x), atol=1e-12)
    g = rng.normal(size=(5, 4))
    grad_in = layer.backward(g)
    if deriv is None:
        s = fn(x)
        expected = g * s * (1 - s)
    else:
        expected = g * deriv(x)
    assert np.allclose(grad_in, expected, atol=1e-12)


def test_activations_have_no_params():
    for layer in (Relu(), Sigmoid(), Tanh(), Identity(), Scale(np.ones(3))):
        assert layer.params() == []
        assert layer.grads() == []


def test_identity_kind_is_linear():
    assert Identity().kind == "linear"


def test_scale_forward_and_backward():
    factors = np.array([0.5, 2.0, 0.0])
    layer = Scale(factors)
    x = np.array([[2.0, 3.0, 7.0], [-4.0, 1.0, 9.0]])
    assert np.array_equal(layer.forward(x), x * factors)
    g = np.array([[1.0, 1.0, 1.0], [2.0, 2.0, 2.0]])
    assert np.array_equal(layer.backward(g), g * factors)


def test_scale_rejects_wrong_width():
    layer = Scale(np.ones(3))
    with pytest.raises(ShapeError):
        layer.forward(np.zeros((2, 4)))


def test_scale_clone_is_independent():
    layer = Scale(np.array([1.0, 2.0]))
    copy = layer.clone()
    layer.factors[0] = 99.0
    assert copy.factors[0] == 1.0
