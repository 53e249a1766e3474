"""Point-mass dynamics: recurrence, telescoping returns, and bounds."""

import numpy as np
import pytest

from aclab.envs.pointmass import PointMassConfig, PointMassEnv
from aclab.errors import ConfigError, EpisodeFinished, StateError


def test_default_dimensions():
    env = PointMassEnv()
    assert env.action_dim == 6
    assert env.reset(seed=0).shape == (18,)
    assert env.episode_transitions == 1000


def test_config_validation():
    with pytest.raises(ConfigError):
        PointMassConfig(dims=0)
    with pytest.raises(ConfigError):
        PointMassConfig(dt=0.0)
    with pytest.raises(ConfigError):
        PointMassConfig(dims=3, goal=(1.0, 2.0))


def test_observation_layout():
    env = PointMassEnv(PointMassConfig(dims=2, goal=(3.0, -1.0)))
    env.reset(seed=1)
    obs = env.observe()
    assert np.array_equal(obs[:2], env.position)
    assert np.array_equal(obs[2:4], env.velocity)
    assert np.array_equal(obs[4:], np.array([3.0, -1.0]) - env.position)


def test_reset_starts_at_rest_within_range():
    config = PointMassConfig(dims=4, start_range=2.5)
    env = PointMassEnv(config)
    for seed in range(10):
        env.reset(seed=seed)
        assert np.all(np.abs(env.position) <= 2.5)
        assert np.array_equal(env.velocity, np.zeros(4))


def test_same_seed_same_trajectory():
    a = PointMassEnv()
    b = PointMassEnv()
    a.reset(seed=5)
    b.reset(seed=5)
    rng = np.random.default_rng(0)
    for _ in range(20):
        action = rng.uniform(-1, 1, size=6)
        oa, ra, _ = a.step(action)
        ob, rb, _ = b.step(action)
        assert np.array_equal(oa, ob)
        assert ra == rb


def test_dynamics_match_reference_recurrence():
    config = PointMassConfig(dims=3)
    env = PointMassEnv(config)
    env.reset(seed=2)
    pos = env.position.copy()
    vel = env.velocity.copy()
    rng = np.random.default_rng(3)
    for _ in range(100):
        action = rng.uniform(-1, 1, size=3)
        env.step(action)
        vel = vel + (config.max_force * action - config.drag * vel) * config.dt
        pos = pos + vel * config.dt
        assert np.allclose(env.velocity, vel, atol=1e-12)
        assert np.allclose(env.position, pos, atol=1e-12)


def test_zero_action_from_rest_stays_put():
    env = PointMassEnv()
    env.reset(seed=4)
    start = env.position.copy()
    _, reward, _ = env.step(np.zeros(6))
    assert np.array_equal(env.position, start)
    assert reward == 0.0


def test_returns_telescope_to_distance_change():
    env = PointMassEnv(PointMassConfig(dims=4, episode_steps=300))
    env.reset(seed=6)
    goal = env.config.goal_array()
    d0 = float(np.linalg.norm(goal - env.position))
    total = 0.0
    rng = np.random.default_rng(7)
    done = False
    while not done:
        _, reward, done = env.step(rng.uniform(-1, 1, size=4))
        total += reward
    d_final = float(np.linalg.norm(goal - env.position))
    assert total == pytest.approx(d0 - d_final, abs=1e-9)


def test_velocity_component_bound():
    # |v_i| <= max_force / drag is invariant from rest: the drag term pulls
    # each component back before the force can push it past the fixed point
    config = PointMassConfig()
    bound = config.max_force / config.drag
    env = PointMassEnv(config)
    env.reset(seed=8)
    rng = np.random.default_rng(9)
    for _ in range(1000):
        env.step(np.sign(env.velocity + rng.normal(size=6)))  # worst-case pushes
        assert np.all(np.abs(env.velocity) <= bound + 1e-12)


def test_toward_goal_reward_positive():
    env = PointMassEnv(PointMassConfig(dims=1, goal=(0.0,)))
    env.reset(seed=10)
    direction = -np.sign(env.position)
    _, reward, _ = env.step(direction)
    assert reward > 0.0


def test_episode_finished_and_done_flag():
    env = PointMassEnv(PointMassConfig(dims=2, episode_steps=3))
    env.reset(seed=11)
    assert env.step(np.zeros(2))[2] is False
    assert env.step(np.zeros(2))[2] is False
    assert env.step(np.zeros(2))[2] is True
    with pytest.raises(EpisodeFinished):
        env.step(np.zeros(2))


def test_requires_reset_before_use():
    env = PointMassEnv()
    with pytest.raises(StateError):
        env.observe()
    with pytest.raises(StateError):
        env.step(np.zeros(6))


def test_action_shape_checked():
    env = PointMassEnv()
    env.reset(seed=12)
    with pytest.raises(ConfigError):
        env.step(np.zeros(3))


def test_out_of_range_actions_clamped():
    a = PointMassEnv(PointMassConfig(dims=2))
    b = PointMassEnv(PointMassConfig(dims=2))
    a.reset(seed=13)
    b.reset(seed=13)
    a.step(np.array([10.0, -10.0]))
    b.step(np.array([1.0, -1.0]))
    assert np.array_equal(a.position, b.position)


def test_trace_columns_and_rows():
    env = PointMassEnv(PointMassConfig(dims=2, episode_steps=5))
    env.reset(seed=14)
    for _ in range(5):
        env.step(np.array([0.5, -0.5]))
    assert env.trace_columns() == ["step", "x0", "x1", "action0", "action1", "reward"]
    assert len(env.trace) == 5
    assert env.trace[0][0] == 1  # steps are 1-indexed in the trace
