"""n-dimensional point mass with force control and a goal-progress reward.

A light analytic control task: the agent applies a bounded force each step,
velocity integrates with linear drag, and the reward is the decrease in
distance to a fixed goal. It exercises the multi-dimensional tanh-bounded
action path end to end without any physics engine.

Update order per step, with action a in [-1, 1]^n:

    v <- v + (max_force * a - drag * v) * dt
    x <- x + v * dt
    reward = |goal - x_before| - |goal - x_after|

Episode returns therefore telescope to initial distance minus final distance.
"""

from dataclasses import dataclass

import numpy as np

from aclab.errors import ConfigError, EpisodeFinished, StateError


@dataclass
class PointMassConfig:
    dims: int = 6
    dt: float = 0.05
    drag: float = 0.5
    max_force: float = 1.0
    episode_steps: int = 1000
    start_range: float = 5.0
    goal: tuple = None

    def __post_init__(self):
        if self.dims < 1:
            raise ConfigError("dims must be >= 1")
        if self.dt <= 0:
            raise ConfigError("dt must be positive")
        if self.drag < 0:
            raise ConfigError("drag must be >= 0")
        if self.episode_steps < 1:
            raise ConfigError("episode_steps must be >= 1")
        if self.goal is None:
            self.goal = tuple(0.0 for _ in range(self.dims))
        elif len(self.goal) != self.dims:
            raise ConfigError(f"goal must have {self.dims} components")

    @property
    def episode_transitions(self):
        return self.episode_steps

    def goal_array(self):
        return np.asarray(self.goal, dtype=np.float64)


class PointMassEnv:
    """Reset/step wrapper; observation is [position; velocity; goal - position]."""

    action_squash = "tanh"

    def __init__(self, config=None):
        self.config = config if config is not None else PointMassConfig()
        self.position = None
        self.velocity = None
        self.step_count = 0
        self.trace = []

    @property
    def action_dim(self):
        return self.config.dims

    @property
    def episode_transitions(self):
        return self.config.episode_steps

    def observe(self):
        if self.position is None:
            raise StateError("reset before observing")
        goal = self.config.goal_array()
        return np.concatenate([self.position, self.velocity, goal - self.position])

    def reset(self, seed):
        c = self.config
        rng = np.random.default_rng(seed)
        self.position = rng.uniform(-c.start_range, c.start_range, size=c.dims)
        self.velocity = np.zeros(c.dims)
        self.step_count = 0
        self.trace = []
        return self.observe()

    def step(self, action):
        c = self.config
        if self.position is None:
            raise StateError("reset before stepping")
        if self.step_count >= c.episode_steps:
            raise EpisodeFinished(f"episode over at step {self.step_count}")
        action = np.clip(np.asarray(action, dtype=np.float64), -1.0, 1.0)
        if action.shape != (c.dims,):
            raise ConfigError(f"action must have shape ({c.dims},), got {action.shape}")
        goal = c.goal_array()
        dist_before = float(np.linalg.norm(goal - self.position))
        self.velocity = self.velocity + (c.max_force * action - c.drag * self.velocity) * c.dt
        self.position = self.position + self.velocity * c.dt
        reward = dist_before - float(np.linalg.norm(goal - self.position))
        self.step_count += 1
        done = self.step_count >= c.episode_steps
        self.trace.append(
            (self.step_count, *self.position, *action, reward)
        )
        return self.observe(), reward, done

    def trace_columns(self):
        n = self.config.dims
        return (
            ["step"]
            + [f"x{i}" for i in range(n)]
            + [f"action{i}" for i in range(n)]
            + ["reward"]
        )
