"""Layer primitives: dense, valid-padding conv2d, and elementwise activations.

Every layer follows the same small protocol: ``forward`` takes a batch-first
array and caches what ``backward`` needs, ``backward`` takes the gradient of
the loss with respect to the layer output and returns the gradient with
respect to the layer input, storing parameter gradients on the layer.
All parameters and activations are float64.
"""

import math

import numpy as np

from aclab.errors import ShapeError, SpecError, StateError
from aclab.nn import backend


def glorot_init(fan_in, fan_out, rng, shape=None):
    """Glorot-uniform draw: U(-L, L) with L = sqrt(6 / (fan_in + fan_out)).

    ``shape`` defaults to (fan_in, fan_out); conv layers pass their own
    kernel shape together with receptive-field fan values.
    """
    if fan_in < 1 or fan_out < 1:
        raise SpecError(f"glorot fan values must be >= 1, got ({fan_in}, {fan_out})")
    limit = math.sqrt(6.0 / (fan_in + fan_out))
    if shape is None:
        shape = (fan_in, fan_out)
    return rng.uniform(-limit, limit, size=shape)


class Dense:
    """Fully connected layer y = x @ W + b.

    Accepts any batch-first input and flattens trailing dimensions, so it can
    sit directly after a conv layer.
    """

    kind = "dense"

    def __init__(self, in_units, out_units, rng=None, weights=None, bias=None):
        if in_units < 1 or out_units < 1:
            raise SpecError(f"dense units must be >= 1, got ({in_units}, {out_units})")
        self.in_units = in_units
        self.out_units = out_units
        if weights is None:
            weights = glorot_init(in_units, out_units, rng)
        self.weights = np.array(weights, dtype=np.float64)
        self.bias = np.zeros(out_units) if bias is None else np.array(bias, dtype=np.float64)
        if self.weights.shape != (in_units, out_units) or self.bias.shape != (out_units,):
            raise ShapeError(
                f"dense({in_units}, {out_units}) got weights {self.weights.shape}, "
                f"bias {self.bias.shape}"
            )
        self.grad_weights = None
        self.grad_bias = None
        self._x = None
        self._input_shape = None

    def params(self):
        return [self.weights, self.bias]

    def grads(self):
        return [self.grad_weights, self.grad_bias]

    def forward(self, x):
        flat = x.reshape(x.shape[0], -1)
        if flat.shape[1] != self.in_units:
            raise ShapeError(
                f"dense expects {(x.shape[0], self.in_units)} input, got {x.shape}"
            )
        self._x = flat
        self._input_shape = x.shape
        return flat @ self.weights + self.bias

    def backward(self, grad_out):
        if self._x is None:
            raise StateError("dense backward called before forward")
        self.grad_weights = self._x.T @ grad_out
        self.grad_bias = grad_out.sum(axis=0)
        return (grad_out @ self.weights.T).reshape(self._input_shape)

    def clone(self):
        return Dense(self.in_units, self.out_units, weights=self.weights, bias=self.bias)


class Conv2d:
    """Valid-padding convolution with square kernel and stride.

    Input is (B, C, H, W); output side is floor((side - kernel) / stride) + 1.
    """

    kind = "conv2d"

    def __init__(self, in_channels, out_channels, kernel, stride, rng=None, weights=None, bias=None):
        if min(in_channels, out_channels, kernel, stride) < 1:
            raise SpecError(
                "conv2d parameters must be >= 1, got "
                f"({in_channels}, {out_channels}, k={kernel}, s={stride})"
            )
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.kernel = kernel
        self.stride = stride
        if weights is None:
            field = kernel * kernel
            weights = glorot_init(
                in_channels * field,
                out_channels * field,
                rng,
                shape=(out_channels, in_channels, kernel, kernel),
            )
        self.weights = np.array(weights, dtype=np.float64)
        self.bias = np.zeros(out_channels) if bias is None else np.array(bias, dtype=np.float64)
        expected = (out_channels, in_channels, kernel, kernel)
        if self.weights.shape != expected or self.bias.shape != (out_channels,):
            raise ShapeError(f"conv2d expects weights {expected}, got {self.weights.shape}")
        self.grad_weights = None
        self.grad_bias = None
        self._cols = None
        self._input_shape = None

    def params(self):
        return [self.weights, self.bias]

    def grads(self):
        return [self.grad_weights, self.grad_bias]

    def output_side(self, in_side):
        side = (in_side - self.kernel) // self.stride + 1
        if side < 1:
            raise ShapeError(
                f"conv2d(k={self.kernel}, s={self.stride}) on side {in_side} "
                f"gives output side {side}"
            )
        return side

    def forward(self, x):
        if x.ndim != 4 or x.shape[1] != self.in_channels:
            raise ShapeError(
                f"conv2d expects (B, {self.in_channels}, H, W) input, got {x.shape}"
            )
        out_h = self.output_side(x.shape[2])
        out_w = self.output_side(x.shape[3])
        cols = backend.im2col(np.ascontiguousarray(x, dtype=np.float64), self.kernel, self.stride)
        self._cols = cols
        self._input_shape = x.shape
        wmat = self.weights.reshape(self.out_channels, -1)
        out = cols @ wmat.T + self.bias  # (B, P, O)
        return np.ascontiguousarray(
            out.transpose(0, 2, 1).reshape(x.shape[0], self.out_channels, out_h, out_w)
        )

    def backward(self, grad_out):
        if self._cols is None:
            raise StateError("conv2d backward called before forward")
        b = grad_out.shape[0]
        flat = grad_out.reshape(b, self.out_channels, -1).transpose(0, 2, 1)  # (B, P, O)
        wmat = self.weights.reshape(self.out_channels, -1)
        self.grad_weights = np.einsum("bpo,bpf->of", flat, self._cols).reshape(self.weights.shape)
        self.grad_bias = flat.sum(axis=(0, 1))
        grad_cols = np.ascontiguousarray(flat @ wmat)
        return backend.col2im(grad_cols, self._input_shape, self.kernel, self.stride)

    def clone(self):
        return Conv2d(
            self.in_channels,
            self.out_channels,
            self.kernel,
            self.stride,
            weights=self.weights,
            bias=self.bias,
        )


class _Activation:
    """Parameterless elementwise layer."""

    def params(self):
        return []

    def grads(self):
        return []

    def clone(self):
        return type(self)()


class Relu(_Activation):
    kind = "relu"

    def __init__(self):
        self._mask = None

    def forward(self, x):
        self._mask = x > 0.0
        return np.where(self._mask, x, 0.0)

    def backward(self, grad_out):
        if self._mask is None:
            raise StateError("relu backward called before forward")
        return np.where(self._mask, grad_out, 0.0)


class Sigmoid(_Activation):
    kind = "sigmoid"

    def __init__(self):
        self._y = None

    def forward(self, x):
        self._y = 1.0 / (1.0 + np.exp(-x))
        return self._y

    def backward(self, grad_out):
        if self._y is None:
            raise StateError("sigmoid backward called before forward")
        return grad_out * self._y * (1.0 - self._y)


class Tanh(_Activation):
    kind = "tanh"

    def __init__(self):
        self._y = None

    def forward(self, x):
        self._y = np.tanh(x)
        return self._y

    def backward(self, grad_out):
        if self._y is None:
            raise StateError("tanh backward called before forward")
        return grad_out * (1.0 - self._y * self._y)


class Identity(_Activation):
    """Explicit linear output marker, so critic heads serialize their own kind."""

    kind = "linear"

    def __init__(self):
        self._seen = False

    def forward(self, x):
        self._seen = True
        return x

    def backward(self, grad_out):
        if not self._seen:
            raise StateError("linear backward called before forward")
        return grad_out


class Scale:
    """Fixed elementwise input scaling with no trainable parameters.

    Multiplies the last input dimension by a constant factor vector; used to
    bring raw observation features (masses, distances) to unit order before
    the first dense layer.
    """

    kind = "scale"

    def __init__(self, factors):
        self.factors = np.asarray(factors, dtype=np.float64)
        if self.factors.ndim != 1 or self.factors.size < 1:
            raise ShapeError("scale factors must be a non-empty 1-d vector")
        self._seen = False

    def params(self):
        return []

    def grads(self):
        return []

    def forward(self, x):
        if x.shape[-1] != self.factors.size:
            raise ShapeError(
                f"scale layer expects width {self.factors.size}, got {x.shape[-1]}"
            )
        self._seen = True
        return x * self.factors

    def backward(self, grad_out):
        if not self._seen:
            raise StateError("scale backward called before forward")
        return grad_out * self.factors

    def clone(self):
        return Scale(self.factors.copy())


LAYER_KINDS = {
    cls.kind: cls for cls in (Dense, Conv2d, Relu, Sigmoid, Tanh, Identity, Scale)
}
