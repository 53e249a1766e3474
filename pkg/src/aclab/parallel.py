"""Synchronized multi-worker stepping for on-policy training.

Workers each own an environment, a policy snapshot, and a noise generator.
Every synchronized step advances each worker by exactly one transition under
identical policy parameters; the resulting batch (in worker-id order) trains
the global agent once and is then discarded. A broadcast copies the global
actor back into every snapshot before the next step.

Execution is sequential by design: the contract is the synchronization
schedule and deterministic replay, not wall-clock parallelism.
"""

import hashlib

import numpy as np

from aclab.agents import clamp_action
from aclab.errors import ConfigError, StateError, WorkerError
from aclab.replay import Transition


def warmup_offset(worker_id, episode_length, n_workers):
    """Transitions worker_id discards before training starts: floor(id*L/n)."""
    if not 0 <= worker_id < n_workers:
        raise ConfigError(
            f"worker_id {worker_id} out of range for {n_workers} workers"
        )
    return (worker_id * episode_length) // n_workers


def params_digest(net):
    """Hex digest of a network's parameters, for cheap equality checks."""
    h = hashlib.sha256()
    for p in net.parameters():
        h.update(np.ascontiguousarray(p).tobytes())
    return h.hexdigest()


class _Worker:
    def __init__(self, worker_id, env, actor, base_seed):
        self.id = worker_id
        self.env = env
        self.actor = actor
        self.noise_rng = np.random.default_rng(base_seed + worker_id)
        self._env_seed_rng = np.random.default_rng(
            np.random.SeedSequence([base_seed, worker_id])
        )
        self.obs = self._reset_env()

    def _reset_env(self):
        seed = int(self._env_seed_rng.integers(2**63))
        return self.env.reset(seed)

    def act(self, sd, squash):
        action = self.actor.forward(self.obs)
        if sd > 0:
            action = action + self.noise_rng.normal(0.0, sd, size=action.shape)
        return clamp_action(action, squash)

    def step(self, sd, squash):
        obs = self.obs
        action = self.act(sd, squash)
        try:
            next_obs, reward, done = self.env.step(action)
        except Exception as exc:
            raise WorkerError(f"worker {self.id} environment fault: {exc}") from exc
        transition = Transition(obs, action, float(reward), next_obs, bool(done))
        self.obs = self._reset_env() if done else next_obs
        return transition


class WorkerPool:
    """n_workers lock-step workers around one global AgentBundle."""

    def __init__(self, bundle, env_factory, n_workers, base_seed):
        if n_workers < 1:
            raise ConfigError("n_workers must be >= 1")
        self.bundle = bundle
        self.n_workers = n_workers
        self.workers = [
            _Worker(i, env_factory(), bundle.actor.clone(), base_seed)
            for i in range(n_workers)
        ]
        lengths = {w.env.episode_transitions for w in self.workers}
        if len(lengths) != 1:
            raise ConfigError(f"workers disagree on episode length: {sorted(lengths)}")
        self.episode_length = lengths.pop()
        self._warmed_up = False

    def warmup(self, sd):
        """Stagger workers through their offsets; the transitions are discarded."""
        for worker in self.workers:
            for _ in range(warmup_offset(worker.id, self.episode_length, self.n_workers)):
                worker.step(sd, self.bundle.action_squash)
        self._warmed_up = True

    def synced_step(self, sd):
        """One transition per worker; returns the batch in worker-id order."""
        if not self._warmed_up:
            raise StateError("run warmup before synced stepping")
        return [w.step(sd, self.bundle.action_squash) for w in self.workers]

    def broadcast(self):
        for worker in self.workers:
            worker.actor.copy_params_from(self.bundle.actor)

    def worker_digests(self):
        return [params_digest(w.actor) for w in self.workers]

    def in_sync(self):
        digests = set(self.worker_digests())
        return len(digests) == 1 and digests.pop() == params_digest(self.bundle.actor)
