"""Sequential networks with explicit backprop and per-network Adam state.

Two container types cover every architecture in the lab:

* ``Network`` is a plain stack of layers (all the MLP actors and critics).
* ``TrunkHeadNetwork`` is a conv trunk plus a dense head whose trunk layer
  objects may be shared with a sibling network; the head consumes the
  flattened trunk output, optionally with an extra vector (the critic's
  action input) appended.

Both expose forward / backward / adam_step / param_count / copy_params_from,
which is all the agents and harness need.
"""

import numpy as np

from aclab.errors import NumericError, ShapeError, SpecError
from aclab.nn.layers import Conv2d, Dense

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


def mse_loss(prediction, target):
    """Mean squared error and its gradient with respect to the prediction.

    Returns (loss, grad) with grad = 2 * (prediction - target) / n where n is
    the total element count.
    """
    prediction = np.asarray(prediction, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if prediction.shape != target.shape:
        raise ShapeError(f"mse shapes differ: {prediction.shape} vs {target.shape}")
    diff = prediction - target
    n = diff.size
    loss = float(np.sum(diff * diff)) / n
    return loss, 2.0 * diff / n


class AdamState:
    """First/second moment arrays plus step counter for one parameter list."""

    def __init__(self, params):
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def apply(self, params, grads, lr):
        self.t += 1
        correct1 = 1.0 - ADAM_BETA1 ** self.t
        correct2 = 1.0 - ADAM_BETA2 ** self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= ADAM_BETA1
            m += (1.0 - ADAM_BETA1) * g
            v *= ADAM_BETA2
            v += (1.0 - ADAM_BETA2) * (g * g)
            p -= lr * (m / correct1) / (np.sqrt(v / correct2) + ADAM_EPS)


def _check_finite(layers):
    for i, layer in enumerate(layers):
        for g in layer.grads():
            if g is None:
                raise NumericError(f"layer {i} ({layer.kind}) has no gradient; run backward first")
            if not np.all(np.isfinite(g)):
                raise NumericError(f"non-finite gradient in layer {i} ({layer.kind})")


class Network:
    """Ordered layer stack. Single-writer: training updates are serialized by the caller."""

    def __init__(self, layers):
        self.layers = list(layers)
        if not self.layers:
            raise SpecError("network needs at least one layer")
        self.adam = AdamState(self.parameters())
        self._single = False

    def parameters(self):
        return [p for layer in self.layers for p in layer.params()]

    def gradients(self):
        return [g for layer in self.layers for g in layer.grads()]

    def param_count(self):
        return sum(p.size for p in self.parameters())

    def _promote(self, x):
        x = np.asarray(x, dtype=np.float64)
        if isinstance(self.layers[0], Conv2d):
            if x.ndim == 2:
                return x[None, None], True
            if x.ndim == 3:
                return x[None], True
            return x, False
        if x.ndim == 1:
            return x[None], True
        return x, False

    def forward(self, x):
        x, self._single = self._promote(x)
        for layer in self.layers:
            x = layer.forward(x)
        return x[0] if self._single else x

    def backward(self, grad_out):
        grad = np.asarray(grad_out, dtype=np.float64)
        if self._single:
            grad = grad[None]
        for layer in reversed(self.layers):
            grad = layer.backward(grad)
        return grad[0] if self._single else grad

    def adam_step(self, lr):
        _check_finite(self.layers)
        self.adam.apply(self.parameters(), self.gradients(), lr)

    def clone(self):
        """Deep copy of parameters only; the clone starts with fresh Adam state."""
        return Network([layer.clone() for layer in self.layers])

    def copy_params_from(self, other):
        for mine, theirs in zip(self.parameters(), other.parameters()):
            np.copyto(mine, theirs)


class TrunkHeadNetwork:
    """Conv trunk + dense head, with the trunk layer objects shareable.

    ``extra_inputs`` components are appended to the flattened trunk output
    before the head (the pixel Q-critic appends the 2-d action there). Each
    TrunkHeadNetwork owns its own Adam moments, including for shared trunk
    parameters, so the two heads optimize the trunk independently while
    mutating the same arrays.
    """

    def __init__(self, trunk, head, extra_inputs=0):
        self.trunk = list(trunk)
        self.head = list(head)
        self.extra_inputs = extra_inputs
        self.adam = AdamState(self.parameters())
        self._trunk_shape = None
        self._single = False

    @property
    def layers(self):
        return self.trunk + self.head

    def parameters(self):
        return [p for layer in self.layers for p in layer.params()]

    def gradients(self):
        return [g for layer in self.layers for g in layer.grads()]

    def param_count(self):
        return sum(p.size for p in self.parameters())

    def forward(self, x, extra=None):
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 2:
            x, self._single = x[None, None], True
        elif x.ndim == 3:
            x, self._single = x[None], True
        else:
            self._single = False
        if (extra is None) != (self.extra_inputs == 0):
            raise ShapeError(
                f"network takes {self.extra_inputs} extra inputs, "
                f"extra={'none' if extra is None else 'given'}"
            )
        h = x
        for layer in self.trunk:
            h = layer.forward(h)
        self._trunk_shape = h.shape
        flat = h.reshape(h.shape[0], -1)
        if extra is not None:
            extra = np.asarray(extra, dtype=np.float64)
            if extra.ndim == 1:
                extra = extra[None]
            if extra.shape != (flat.shape[0], self.extra_inputs):
                raise ShapeError(
                    f"extra input shape {extra.shape}, "
                    f"expected {(flat.shape[0], self.extra_inputs)}"
                )
            flat = np.concatenate([flat, extra], axis=1)
        for layer in self.head:
            flat = layer.forward(flat)
        return flat[0] if self._single else flat

    def backward(self, grad_out):
        """Returns (input_gradient, extra_gradient); the latter is None without extra inputs."""
        grad = np.asarray(grad_out, dtype=np.float64)
        if self._single:
            grad = grad[None]
        for layer in reversed(self.head):
            grad = layer.backward(grad)
        trunk_width = int(np.prod(self._trunk_shape[1:]))
        grad_extra = grad[:, trunk_width:] if self.extra_inputs else None
        grad = grad[:, :trunk_width].reshape(self._trunk_shape)
        for layer in reversed(self.trunk):
            grad = layer.backward(grad)
        if self._single:
            return grad[0], None if grad_extra is None else grad_extra[0]
        return grad, grad_extra

    def adam_step(self, lr):
        _check_finite(self.layers)
        self.adam.apply(self.parameters(), self.gradients(), lr)

    def clone(self):
        """Standalone deep copy; the clone's trunk is not shared with anything."""
        return TrunkHeadNetwork(
            [layer.clone() for layer in self.trunk],
            [layer.clone() for layer in self.head],
            self.extra_inputs,
        )

    def copy_params_from(self, other):
        for mine, theirs in zip(self.parameters(), other.parameters()):
            np.copyto(mine, theirs)


def clone_shared_pair(actor, critic):
    """Clone a trunk-sharing (actor, critic) pair into a new pair sharing one new trunk."""
    trunk = [layer.clone() for layer in actor.trunk]
    actor_copy = TrunkHeadNetwork(trunk, [layer.clone() for layer in actor.head], actor.extra_inputs)
    critic_copy = TrunkHeadNetwork(trunk, [layer.clone() for layer in critic.head], critic.extra_inputs)
    return actor_copy, critic_copy


def param_count(net):
    return net.param_count()


def distinct_param_count(*nets):
    """Total parameters across networks, counting shared arrays once."""
    seen = {}
    for net in nets:
        for p in net.parameters():
            seen[id(p)] = p.size
    return sum(seen.values())
