"""Fixed-capacity FIFO experience buffer with uniform mini-batch sampling."""

from dataclasses import dataclass

import numpy as np

from aclab.errors import ConfigError, InsufficientData, NumericError


@dataclass
class Transition:
    """One environment transition: (s, a, r, s', done)."""

    obs: np.ndarray
    action: np.ndarray
    reward: float
    next_obs: np.ndarray
    done: bool


def _require_finite(name, value):
    if not np.all(np.isfinite(value)):
        raise NumericError(f"transition field {name} contains non-finite values")


class ReplayBuffer:
    """Ring buffer: oldest transition is evicted once capacity is reached.

    Sampling draws uniformly with replacement and requires at least ``n``
    stored transitions.
    """

    def __init__(self, capacity):
        if capacity < 1:
            raise ConfigError("replay capacity must be >= 1")
        self.capacity = capacity
        self._storage = []
        self._next = 0

    def __len__(self):
        return len(self._storage)

    def push(self, transition):
        _require_finite("obs", transition.obs)
        _require_finite("action", transition.action)
        _require_finite("reward", transition.reward)
        _require_finite("next_obs", transition.next_obs)
        if len(self._storage) < self.capacity:
            self._storage.append(transition)
        else:
            self._storage[self._next] = transition
            self._next = (self._next + 1) % self.capacity

    def sample(self, n, rng):
        if len(self._storage) < n:
            raise InsufficientData(
                f"buffer holds {len(self._storage)} transitions, need {n}"
            )
        indices = rng.integers(0, len(self._storage), size=n)
        return [self._storage[i] for i in indices]

    def snapshot(self):
        """Current contents as a list, oldest first."""
        return self._storage[self._next:] + self._storage[: self._next]
