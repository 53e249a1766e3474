"""Binary network serialization.

Layout (all integers little-endian unsigned, all floats little-endian
IEEE-754 doubles):

    magic   4 bytes  b"ACNN"
    version u32      currently 1
    nlayers u32
    then per layer:
        kind    u8   1=dense 2=conv2d 3=relu 4=sigmoid 5=tanh 6=linear 7=scale
        dims    u32s dense: in, out; conv2d: in_ch, out_ch, kernel, stride;
                     scale: width
        payload f64s dense: weights row-major then bias
                     conv2d: weights (out, in, k, k) row-major then bias
                     scale: factor vector

Optimizer state is deliberately excluded: a reloaded network behaves
identically under forward/backward, and resumed training restarts Adam's
moment estimates from zero.
"""

import struct

import numpy as np

from aclab.errors import CheckpointError
from aclab.nn.layers import Conv2d, Dense, Identity, Relu, Scale, Sigmoid, Tanh
from aclab.nn.network import Network

MAGIC = b"ACNN"
VERSION = 1

_KIND_TAGS = {
    "dense": 1,
    "conv2d": 2,
    "relu": 3,
    "sigmoid": 4,
    "tanh": 5,
    "linear": 6,
    "scale": 7,
}
_TAG_KINDS = {v: k for k, v in _KIND_TAGS.items()}
_ACTIVATIONS = {"relu": Relu, "sigmoid": Sigmoid, "tanh": Tanh, "linear": Identity}


def _write_u32(f, value):
    f.write(struct.pack("<I", value))


def _read_exact(f, n):
    data = f.read(n)
    if len(data) != n:
        raise CheckpointError(f"truncated checkpoint: wanted {n} bytes, got {len(data)}")
    return data


def _read_u32(f):
    return struct.unpack("<I", _read_exact(f, 4))[0]


def _write_f64(f, array):
    f.write(np.ascontiguousarray(array, dtype="<f8").tobytes())


def _read_f64(f, shape):
    count = int(np.prod(shape))
    data = _read_exact(f, 8 * count)
    return np.frombuffer(data, dtype="<f8").astype(np.float64).reshape(shape)


def write_layers(f, layers):
    _write_u32(f, len(layers))
    for layer in layers:
        tag = _KIND_TAGS.get(layer.kind)
        if tag is None:
            raise CheckpointError(f"cannot serialize layer kind {layer.kind!r}")
        f.write(struct.pack("<B", tag))
        if layer.kind == "dense":
            _write_u32(f, layer.in_units)
            _write_u32(f, layer.out_units)
            _write_f64(f, layer.weights)
            _write_f64(f, layer.bias)
        elif layer.kind == "conv2d":
            _write_u32(f, layer.in_channels)
            _write_u32(f, layer.out_channels)
            _write_u32(f, layer.kernel)
            _write_u32(f, layer.stride)
            _write_f64(f, layer.weights)
            _write_f64(f, layer.bias)
        elif layer.kind == "scale":
            _write_u32(f, layer.factors.size)
            _write_f64(f, layer.factors)


def read_layers(f):
    nlayers = _read_u32(f)
    layers = []
    for _ in range(nlayers):
        tag = struct.unpack("<B", _read_exact(f, 1))[0]
        kind = _TAG_KINDS.get(tag)
        if kind is None:
            raise CheckpointError(f"unknown layer tag {tag}")
        if kind == "dense":
            n_in, n_out = _read_u32(f), _read_u32(f)
            weights = _read_f64(f, (n_in, n_out))
            bias = _read_f64(f, (n_out,))
            layers.append(Dense(n_in, n_out, weights=weights, bias=bias))
        elif kind == "conv2d":
            in_ch, out_ch = _read_u32(f), _read_u32(f)
            kernel, stride = _read_u32(f), _read_u32(f)
            weights = _read_f64(f, (out_ch, in_ch, kernel, kernel))
            bias = _read_f64(f, (out_ch,))
            layers.append(Conv2d(in_ch, out_ch, kernel, stride, weights=weights, bias=bias))
        elif kind == "scale":
            width = _read_u32(f)
            layers.append(Scale(_read_f64(f, (width,))))
        else:
            layers.append(_ACTIVATIONS[kind]())
    return layers


def write_network(f, net):
    f.write(MAGIC)
    _write_u32(f, VERSION)
    write_layers(f, net.layers)


def read_network(f):
    magic = _read_exact(f, 4)
    if magic != MAGIC:
        raise CheckpointError(f"bad magic {magic!r}, expected {MAGIC!r}")
    version = _read_u32(f)
    if version != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    return Network(read_layers(f))


def save_network(path, net):
    with open(path, "wb") as f:
        write_network(f, net)


def load_network(path):
    with open(path, "rb") as f:
        net = read_network(f)
        if f.read(1):
            raise CheckpointError("trailing bytes after network payload")
    return net
