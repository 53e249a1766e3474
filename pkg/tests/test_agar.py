"""Pellet-world physics, observations, rendering, and episode bookkeeping."""

import math

import numpy as np
import pytest

from aclab.envs.agar import (
    FRAME_SIDE,
    GRID_FEATURES,
    GRID_SIDE,
    AgarConfig,
    AgarEnv,
    AgarWorld,
    render_grayscale,
    vision_grid,
)
from aclab.envs.trace import load_trace, save_trace
from aclab.errors import ConfigError, EpisodeFinished, StateError

CENTER = np.array([0.5, 0.5])


def _small_config(**kw):
    defaults = dict(episode_frames=80, frame_skip=7)
    defaults.update(kw)
    return AgarConfig(**defaults)


def test_config_rejects_indivisible_episode():
    with pytest.raises(ConfigError, match="divisible"):
        AgarConfig(episode_frames=100, frame_skip=7)


def test_config_rejects_bad_decay():
    with pytest.raises(ConfigError):
        AgarConfig(mass_decay_per_frame=1.5)


def test_episode_transitions_counts_frames_per_action():
    config = AgarConfig()
    assert config.episode_frames == 20_000
    assert config.frame_skip == 7
    assert config.episode_transitions == 2500


def test_derived_quantities_at_known_mass():
    world = AgarWorld(AgarConfig(), seed=0)
    world.player_mass = 10.0
    assert world.speed() == pytest.approx(50.0 * 10.0**-0.44)
    assert world.view_side() == pytest.approx(60.0 * math.sqrt(10.0))
    assert world.radius() == pytest.approx(6.0 * math.sqrt(10.0 / math.pi))


def test_same_seed_same_world():
    a = AgarWorld(AgarConfig(), seed=7)
    b = AgarWorld(AgarConfig(), seed=7)
    assert np.array_equal(a.player_pos, b.player_pos)
    assert np.array_equal(a.pellet_pos, b.pellet_pos)
    rng = np.random.default_rng(0)
    for _ in range(5):
        action = rng.uniform(0, 1, size=2)
        ra, _ = a.step_transition(action)
        rb, _ = b.step_transition(action)
        assert ra == rb
    assert np.array_equal(a.pellet_pos, b.pellet_pos)
    assert a.player_mass == b.player_mass


def test_decay_closed_form_without_pellets():
    config = _small_config(pellet_count=0, mass_floor=0.0)
    world = AgarWorld(config, seed=1)
    world.step_transition(CENTER)
    frames = config.frame_skip + 1
    expected = config.start_mass
    for _ in range(frames):
        expected *= 1.0 - config.mass_decay_per_frame
    assert world.player_mass == pytest.approx(expected, rel=1e-15)


def test_center_action_does_not_move_player():
    world = AgarWorld(_small_config(pellet_count=0), seed=2)
    start = world.player_pos.copy()
    world.step_transition(CENTER)
    assert np.array_equal(world.player_pos, start)


def test_single_frame_mass_bookkeeping():
    # every frame: mass -> mass * (1 - decay) + absorbed, with the floor off
    config = AgarConfig(mass_floor=0.0)
    world = AgarWorld(config, seed=3)
    rng = np.random.default_rng(4)
    for _ in range(300):
        before = world.player_mass
        absorbed = world._step_frame(rng.uniform(0, 1, size=2))
        expected = before * (1.0 - config.mass_decay_per_frame) + absorbed
        assert world.player_mass == pytest.approx(expected, rel=1e-15)


def test_pellet_field_mass_is_conserved_by_respawn():
    config = AgarConfig()
    world = AgarWorld(config, seed=5)
    total = config.pellet_count * config.pellet_mass
    rng = np.random.default_rng(6)
    for _ in range(50):
        world.step_transition(rng.uniform(0, 1, size=2))
        assert world.pellet_pos.shape == (config.pellet_count, 2)
        assert float(np.sum(world.pellet_mass)) == total


def test_mass_floor_stops_decay():
    config = _small_config(pellet_count=0, mass_floor=5.0, start_mass=5.001)
    world = AgarWorld(config, seed=7)
    world.step_transition(CENTER)
    assert world.player_mass == 5.0


def test_reward_is_mass_delta():
    world = AgarWorld(AgarConfig(), seed=8)
    rng = np.random.default_rng(9)
    for _ in range(30):
        before = world.player_mass
        reward, _ = world.step_transition(rng.uniform(0, 1, size=2))
        assert reward == pytest.approx(world.player_mass - before, abs=1e-12)


def test_player_stays_inside_arena():
    config = _small_config(episode_frames=400, frame_skip=7)
    world = AgarWorld(config, seed=10)
    # drive hard at a corner
    for _ in range(25):
        world.step_transition(np.array([1.0, 1.0]))
        assert np.all(world.player_pos >= 0.0)
        assert np.all(world.player_pos <= config.arena_side)


def test_absorbed_pellet_respawns_elsewhere():
    config = AgarConfig(pellet_count=1)
    world = AgarWorld(config, seed=11)
    world.pellet_pos[0] = world.player_pos  # guarantee a hit
    before = world.pellet_pos[0].copy()
    absorbed = world._step_frame(CENTER)
    assert absorbed == config.pellet_mass
    assert not np.array_equal(world.pellet_pos[0], before)


def test_episode_finished_after_final_frame():
    config = AgarConfig(episode_frames=16, frame_skip=7)
    world = AgarWorld(config, seed=12)
    _, done = world.step_transition(CENTER)
    assert not done
    _, done = world.step_transition(CENTER)
    assert done
    with pytest.raises(EpisodeFinished):
        world.step_transition(CENTER)


def _pelletless_world(seed=0):
    world = AgarWorld(_small_config(pellet_count=1), seed=seed)
    world.player_pos = np.array([500.0, 500.0])
    return world


def test_vision_grid_center_cell_index():
    world = _pelletless_world()
    world.pellet_pos[0] = world.player_pos.copy()
    features = vision_grid(world)
    assert features.shape == (GRID_FEATURES,)
    grid = features[: GRID_SIDE * GRID_SIDE]
    assert grid[60] == world.config.pellet_mass  # row 5, column 5
    assert np.sum(grid) == world.config.pellet_mass


def test_vision_grid_row_major_orientation():
    world = _pelletless_world()
    side = world.view_side()
    # x offset maps to the column index, y offset to the row index
    world.pellet_pos[0] = world.player_pos + np.array([0.3 * side, -0.4 * side])
    grid = vision_grid(world)[: GRID_SIDE * GRID_SIDE]
    col = math.floor((0.3 + 0.5) * GRID_SIDE)
    row = math.floor((-0.4 + 0.5) * GRID_SIDE)
    assert (row, col) == (1, 8)
    assert grid[row * GRID_SIDE + col] == world.config.pellet_mass


def test_vision_grid_sums_pellets_in_one_cell():
    world = AgarWorld(_small_config(pellet_count=2), seed=0)
    world.player_pos = np.array([500.0, 500.0])
    world.pellet_pos[0] = world.player_pos + np.array([1.0, 1.0])
    world.pellet_pos[1] = world.player_pos - np.array([1.0, 1.0])
    grid = vision_grid(world)[: GRID_SIDE * GRID_SIDE]
    assert grid[60] == 2.0 * world.config.pellet_mass


def test_vision_grid_ignores_pellets_outside_view():
    world = _pelletless_world()
    world.pellet_pos[0] = world.player_pos + np.array([world.view_side(), 0.0])
    grid = vision_grid(world)[: GRID_SIDE * GRID_SIDE]
    assert np.all(grid == 0.0)


def test_vision_grid_tail_features():
    world = _pelletless_world()
    features = vision_grid(world)
    assert features[GRID_SIDE * GRID_SIDE] == world.player_mass
    assert features[GRID_SIDE * GRID_SIDE + 1] == world.view_side()


def test_render_pellet_pixels_at_half_intensity():
    world = _pelletless_world()
    side = world.view_side()
    world.pellet_pos[0] = world.player_pos + np.array([0.3 * side, -0.4 * side])
    frame = render_grayscale(world)
    assert frame.shape == (FRAME_SIDE, FRAME_SIDE)
    col = math.floor((0.3 + 0.5) * FRAME_SIDE)
    row = math.floor((-0.4 + 0.5) * FRAME_SIDE)
    assert frame[row, col] == 0.5
    assert set(np.unique(frame)) <= {0.0, 0.5, 1.0}


def test_render_disc_centered_and_full_intensity():
    world = _pelletless_world()
    world.pellet_pos[0] = np.array([-100.0, -100.0])  # out of view
    frame = render_grayscale(world)
    for r in (20, 21):
        for c in (20, 21):
            assert frame[r, c] == 1.0
    assert frame[0, 0] == 0.0
    # symmetric about the frame center
    assert np.array_equal(frame, frame[::-1, :])
    assert np.array_equal(frame, frame[:, ::-1])


def test_render_disc_overwrites_pellets():
    world = _pelletless_world()
    world.pellet_pos[0] = world.player_pos.copy()
    frame = render_grayscale(world)
    assert frame[20, 20] == 1.0
    assert frame[21, 21] == 1.0


def test_render_disc_size_constant_at_default_view_exponent():
    # with view growing as sqrt(mass), the on-screen disc never changes size
    world = _pelletless_world()
    world.pellet_pos[0] = np.array([-100.0, -100.0])
    world.player_mass = 10.0
    small = int(np.sum(render_grayscale(world) == 1.0))
    world.player_mass = 1000.0
    large = int(np.sum(render_grayscale(world) == 1.0))
    assert small == large


def test_render_disc_grows_with_slower_view_exponent():
    config = _small_config(pellet_count=1, view_mass_exponent=0.3)
    world = AgarWorld(config, seed=0)
    world.player_pos = np.array([500.0, 500.0])
    world.pellet_pos[0] = np.array([-100.0, -100.0])
    world.player_mass = 10.0
    small = int(np.sum(render_grayscale(world) == 1.0))
    world.player_mass = 1000.0
    large = int(np.sum(render_grayscale(world) == 1.0))
    assert large > small


def test_env_requires_reset():
    env = AgarEnv(_small_config())
    with pytest.raises(StateError):
        env.observe()
    with pytest.raises(StateError):
        env.step(CENTER)


def test_env_rejects_unknown_obs_mode():
    with pytest.raises(ConfigError):
        AgarEnv(obs_mode="rgb")


def test_env_observation_shapes():
    env = AgarEnv(_small_config())
    assert env.reset(seed=0).shape == (GRID_FEATURES,)
    pixels = AgarEnv(_small_config(), obs_mode="pixels")
    assert pixels.reset(seed=0).shape == (FRAME_SIDE, FRAME_SIDE)


def test_env_clamps_out_of_range_actions():
    config = _small_config(pellet_count=0)
    a = AgarEnv(config)
    b = AgarEnv(config)
    a.reset(seed=3)
    b.reset(seed=3)
    a.step(np.array([5.0, -3.0]))
    b.step(np.array([1.0, 0.0]))
    assert np.array_equal(a.world.player_pos, b.world.player_pos)


def test_env_episode_and_trace(tmp_path):
    env = AgarEnv(_small_config())  # 80 frames / 8 per action = 10 transitions
    env.reset(seed=4)
    rng = np.random.default_rng(5)
    done = False
    steps = 0
    while not done:
        _, reward, done = env.step(rng.uniform(0, 1, size=2))
        steps += 1
    assert steps == env.episode_transitions == 10
    assert len(env.trace) == 10
    path = tmp_path / "trace.csv"
    save_trace(path, env.trace_columns(), env.trace)
    columns, rows = load_trace(path)
    assert columns == env.trace_columns()
    assert rows.shape == (10, 7)
    assert np.array_equal(rows, np.asarray(env.trace, dtype=np.float64))


def test_env_reset_clears_trace():
    env = AgarEnv(_small_config())
    env.reset(seed=6)
    env.step(CENTER)
    assert len(env.trace) == 1
    env.reset(seed=7)
    assert env.trace == []
