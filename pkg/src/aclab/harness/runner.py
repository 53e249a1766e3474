"""Experiment driver: trains agents and applies the checkpoint/test protocol.

Every run saves the agent at each 5% of training (21 checkpoints, the 0%
one untrained) and immediately tests the saved file for a fixed number of
noise-free episodes. All randomness is derived from (base_seed, run_id),
so re-running a config reproduces the metrics file byte for byte.
"""

import os

import numpy as np

from aclab.agents import (
    NoiseSchedule,
    act,
    build_pixel_agent,
    build_vector_agent,
    load_agent,
    optimistic_init,
    save_agent,
    train_step,
)
from aclab.envs import (
    GRID_FEATURES,
    AgarConfig,
    AgarEnv,
    PointMassConfig,
    PointMassEnv,
)
from aclab.harness.metrics import MetricsRecord, save_metrics
from aclab.harness.config import config_to_text
from aclab.parallel import WorkerPool
from aclab.replay import ReplayBuffer, Transition


def make_env(config):
    if config.environment == "agar-grid":
        return AgarEnv(AgarConfig(), obs_mode="grid")
    if config.environment == "agar-pixel":
        return AgarEnv(AgarConfig(), obs_mode="pixels")
    return PointMassEnv(PointMassConfig())


def observation_scale(config):
    """Fixed per-feature input scaling that brings observations to unit order.

    Grid observations carry raw masses and the view side length, which reach
    hundreds; unscaled they saturate the squashed actor outputs at
    initialization. Pixel frames are already in [0, 1] and need none.
    """
    if config.environment == "agar-grid":
        agar = AgarConfig()
        scale = np.ones(GRID_FEATURES)
        scale[GRID_FEATURES - 2] = 1.0 / (10.0 * agar.start_mass)
        scale[GRID_FEATURES - 1] = 1.0 / agar.arena_side
        return scale
    if config.environment == "pointmass":
        pm = PointMassConfig()
        top_speed = pm.max_force / pm.drag if pm.drag > 0 else pm.max_force
        return np.concatenate(
            [
                np.full(pm.dims, 1.0 / pm.start_range),
                np.full(pm.dims, 1.0 / top_speed),
                np.full(pm.dims, 1.0 / pm.start_range),
            ]
        )
    return None


def make_agent(config, rng):
    common = dict(
        actor_lr=config.actor_lr,
        critic_lr=config.critic_lr,
        discount=config.discount,
        rng=rng,
        target_update_interval=config.target_update_interval,
        spg_sample_count=config.spg_sample_count,
        spg_sd_floor=config.spg_sd_floor,
    )
    if config.environment == "agar-pixel":
        return build_pixel_agent(config.algorithm, action_dim=2, action_squash="sigmoid", **common)
    env = make_env(config)
    obs_dim = env.reset(0).shape[0]
    return build_vector_agent(
        config.algorithm,
        obs_dim=obs_dim,
        action_dim=env.action_dim,
        action_squash=env.action_squash,
        input_scale=observation_scale(config),
        **common,
    )


def _random_action(env, rng):
    if env.action_squash == "sigmoid":
        return rng.uniform(0.0, 1.0, size=env.action_dim)
    return rng.uniform(-1.0, 1.0, size=env.action_dim)


def estimate_optimistic_offset(config, rng, episodes=10):
    """Largest discounted episode return seen under a uniform-random policy.

    A critic initialized at or above this value predicts better returns than
    any behavior observed before training, which is what makes it optimistic.
    """
    best = 0.0
    for _ in range(episodes):
        env = make_env(config)
        env.reset(int(rng.integers(2**63)))
        rewards = []
        done = False
        while not done:
            _, reward, done = env.step(_random_action(env, rng))
            rewards.append(reward)
        episode_return = 0.0
        for reward in reversed(rewards):
            episode_return = reward + config.discount * episode_return
        best = max(best, episode_return)
    return best


def checkpoint_boundaries(total_steps):
    """step -> checkpoint percent for the 21 save points (0%, 5%, ..., 100%)."""
    return {int(round(total_steps * k / 20)): 5 * k for k in range(21)}


def _test_seed(base_seed, run_id, pct, episode):
    ss = np.random.SeedSequence([base_seed, run_id, pct, episode])
    return int(ss.generate_state(1)[0])


def run_test(checkpoint_path, config, seeds, run_id=0, checkpoint_pct=0):
    """Noise-free test episodes from a saved checkpoint; one record each."""
    bundle = load_agent(checkpoint_path)
    records = []
    for episode, seed in enumerate(seeds):
        env = make_env(config)
        obs = env.reset(seed)
        total = 0.0
        done = False
        while not done:
            obs, reward, done = env.step(act(bundle, obs, 0.0))
            total += reward
        mass = env.mass if config.environment.startswith("agar") else None
        records.append(MetricsRecord(run_id, checkpoint_pct, episode, total, mass))
    return records


def _checkpoint_and_test(bundle, config, run_dir, run_id, pct, progress):
    path = os.path.join(run_dir, f"checkpoint_{pct:03d}.acag")
    save_agent(path, bundle)
    seeds = [
        _test_seed(config.base_seed, run_id, pct, ep)
        for ep in range(config.tests_per_checkpoint)
    ]
    records = run_test(path, config, seeds, run_id, pct)
    if progress is not None:
        returns = [r.episode_return for r in records]
        mean_return = sum(returns) / len(returns)
        note = f"[run {run_id}] {pct:3d}% mean return {mean_return:.3f}"
        if records[0].final_mass is not None:
            masses = [r.final_mass for r in records]
            note += f", mean final mass {sum(masses) / len(masses):.3f}"
        progress(note)
    return path, records


def _train_one_run(config, out_dir, run_id, progress):
    run_dir = os.path.join(out_dir, f"run{run_id:02d}")
    os.makedirs(run_dir, exist_ok=True)
    streams = np.random.SeedSequence([config.base_seed, run_id]).spawn(6)
    weights_rng, act_rng, env_rng, sample_rng, spg_rng, rollout_rng = map(
        np.random.default_rng, streams
    )
    bundle = make_agent(config, weights_rng)
    offset = config.optimistic_offset
    if offset == "auto":
        offset = estimate_optimistic_offset(config, rollout_rng)
    if offset:
        optimistic_init(bundle, offset)
    schedule = NoiseSchedule(config.total_steps, config.sd_initial, config.sd_at_half)
    boundaries = checkpoint_boundaries(config.total_steps)
    records = []
    paths = []

    def save_point(step):
        path, recs = _checkpoint_and_test(
            bundle, config, run_dir, run_id, boundaries[step], progress
        )
        paths.append(path)
        records.extend(recs)

    if config.task == "replay":
        env = make_env(config)
        buffer = ReplayBuffer(config.buffer_capacity)
        obs = env.reset(int(env_rng.integers(2**63)))
        for t in range(config.total_steps):
            if t in boundaries:
                save_point(t)
            sd = schedule.sd(t)
            bundle.set_noise_sd(sd)
            action = act(bundle, obs, sd, act_rng)
            next_obs, reward, done = env.step(action)
            buffer.push(Transition(obs, action, float(reward), next_obs, bool(done)))
            obs = env.reset(int(env_rng.integers(2**63))) if done else next_obs
            if len(buffer) >= config.batch_size:
                train_step(bundle, buffer.sample(config.batch_size, sample_rng), spg_rng)
    else:
        pool_seed = config.base_seed + run_id * 100_003
        pool = WorkerPool(bundle, lambda: make_env(config), config.n_workers, pool_seed)
        pool.warmup(schedule.sd(0))
        for t in range(config.total_steps):
            if t in boundaries:
                save_point(t)
            sd = schedule.sd(t)
            bundle.set_noise_sd(sd)
            batch = pool.synced_step(sd)
            train_step(bundle, batch, spg_rng)
            pool.broadcast()
    save_point(config.total_steps)
    return paths, records


def run_training(config, out_dir, progress=None):
    """Train n_runs independent runs; returns (metrics_path, records, checkpoints)."""
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "config.txt"), "w") as f:
        f.write(config_to_text(config))
    all_records = []
    all_paths = []
    for run_id in range(config.n_runs):
        paths, records = _train_one_run(config, out_dir, run_id, progress)
        all_paths.extend(paths)
        all_records.extend(records)
    metrics_path = os.path.join(out_dir, "metrics.csv")
    save_metrics(metrics_path, all_records)
    return metrics_path, all_records, all_paths
