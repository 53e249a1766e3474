"""From-scratch neural network core: layers, networks, Adam, serialization."""

from aclab.nn.backend import COMPILED, backend_name, col2im, im2col
from aclab.nn.checkpoint import load_network, read_network, save_network, write_network
from aclab.nn.layers import Conv2d, Dense, Identity, Relu, Scale, Sigmoid, Tanh, glorot_init
from aclab.nn.network import (
    AdamState,
    Network,
    TrunkHeadNetwork,
    clone_shared_pair,
    distinct_param_count,
    mse_loss,
    param_count,
)

__all__ = [
    "AdamState",
    "COMPILED",
    "Conv2d",
    "Dense",
    "Identity",
    "Network",
    "Relu",
    "Scale",
    "Sigmoid",
    "Tanh",
    "TrunkHeadNetwork",
    "backend_name",
    "clone_shared_pair",
    "col2im",
    "distinct_param_count",
    "glorot_init",
    "im2col",
    "load_network",
    "mse_loss",
    "param_count",
    "read_network",
    "save_network",
    "write_network",
]
