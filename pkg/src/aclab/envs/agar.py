"""Single-cell pellet-foraging world in the style of agar.io.

One player cell moves around a square arena eating mass pellets while its own
mass decays by a small fraction every frame. Actions are cursor positions: a
point in the player's current view window that the cell moves toward, exactly
like steering the game with a mouse. One environment transition executes the
chosen action for ``frame_skip + 1`` consecutive frames and reports the total
mass change as the reward.

Coordinates are (x, y) in ``[0, arena_side]²``. The view window is an
axis-aligned square centered on the player whose side length grows with mass.
Both observation encodings rasterize that window, x mapping to columns and y
to rows:

* ``vision_grid``: 11×11 per-cell pellet mass sums plus the player's mass and
  the window side length, flattened to a 123-vector.
* ``render_grayscale``: 42×42 frame, pellets as 0.5-intensity pixels and the
  player as a filled 1.0-intensity disc at the center.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from aclab.errors import ConfigError, EpisodeFinished, StateError

GRID_SIDE = 11
GRID_FEATURES = GRID_SIDE * GRID_SIDE + 2
FRAME_SIDE = 42


@dataclass
class AgarConfig:
    """World constants; defaults give a learnable desk-scale task.

    mass_floor stops runaway shrinking: decay never takes the player below one
    pellet's worth of mass. Disable it (0.0) for exact mass-bookkeeping tests.
    """

    arena_side: float = 1000.0
    pellet_count: int = 500
    pellet_mass: float = 1.0
    start_mass: float = 10.0
    mass_decay_per_frame: float = 5e-4
    base_speed: float = 50.0
    speed_mass_exponent: float = 0.44
    view_scale: float = 60.0
    view_mass_exponent: float = 0.5
    radius_scale: float = 6.0
    mass_floor: float = 1.0
    frame_skip: int = 7
    episode_frames: int = 20_000

    def __post_init__(self):
        if self.arena_side <= 0:
            raise ConfigError("arena_side must be positive")
        if not 0.0 <= self.mass_decay_per_frame < 1.0:
            raise ConfigError("mass_decay_per_frame must be in [0, 1)")
        if self.frame_skip < 0:
            raise ConfigError("frame_skip must be >= 0")
        if self.episode_frames % (self.frame_skip + 1) != 0:
            raise ConfigError(
                f"episode_frames ({self.episode_frames}) must be divisible "
                f"by frame_skip+1 ({self.frame_skip + 1})"
            )
        if self.pellet_count < 0:
            raise ConfigError("pellet_count must be >= 0")
        if self.start_mass <= 0:
            raise ConfigError("start_mass must be positive")
        if self.mass_floor < 0:
            raise ConfigError("mass_floor must be >= 0")

    @property
    def episode_transitions(self):
        return self.episode_frames // (self.frame_skip + 1)


class AgarWorld:
    """Mutable world state: player, pellet field, frame counter, generator."""

    def __init__(self, config, seed):
        self.config = config
        self.rng = np.random.default_rng(seed)
        self.player_pos = self.rng.uniform(0.0, config.arena_side, size=2)
        self.player_mass = float(config.start_mass)
        self.pellet_pos = self.rng.uniform(
            0.0, config.arena_side, size=(config.pellet_count, 2)
        )
        self.pellet_mass = np.full(config.pellet_count, config.pellet_mass)
        self.frame = 0

    def speed(self):
        return self.config.base_speed * self.player_mass ** (
            -self.config.speed_mass_exponent
        )

    def radius(self):
        return self.config.radius_scale * math.sqrt(self.player_mass / math.pi)

    def view_side(self):
        return self.config.view_scale * self.player_mass ** (
            self.config.view_mass_exponent
        )

    def _step_frame(self, action):
        """One physics frame: chase cursor, decay, absorb. Returns absorbed mass."""
        c = self.config
        cursor = self.player_pos + (action - 0.5) * self.view_side()
        delta = cursor - self.player_pos
        dist = math.hypot(delta[0], delta[1])
        if dist > 1e-12:
            self.player_pos = self.player_pos + delta * (min(self.speed(), dist) / dist)
            np.clip(self.player_pos, 0.0, c.arena_side, out=self.player_pos)
        self.player_mass = max(
            self.player_mass * (1.0 - c.mass_decay_per_frame), c.mass_floor
        )
        absorbed = 0.0
        if c.pellet_count:
            d2 = np.sum((self.pellet_pos - self.player_pos) ** 2, axis=1)
            hit = d2 <= self.radius() ** 2
            n_hit = int(np.count_nonzero(hit))
            if n_hit:
                absorbed = float(np.sum(self.pellet_mass[hit]))
                self.player_mass += absorbed
                self.pellet_pos[hit] = self.rng.uniform(
                    0.0, c.arena_side, size=(n_hit, 2)
                )
                self.pellet_mass[hit] = c.pellet_mass
        self.frame += 1
        return absorbed

    def step_transition(self, action):
        """Run frame_skip+1 frames under one action. Returns (reward, done)."""
        c = self.config
        if self.frame >= c.episode_frames:
            raise EpisodeFinished(f"episode over at frame {self.frame}")
        action = np.clip(np.asarray(action, dtype=np.float64), 0.0, 1.0)
        mass_before = self.player_mass
        for _ in range(c.frame_skip + 1):
            self._step_frame(action)
        reward = self.player_mass - mass_before
        return reward, self.frame >= c.episode_frames


def vision_grid(world):
    """123-vector: 11×11 binned pellet mass (row-major), player mass, view side."""
    side = world.view_side()
    half = 0.5 * side
    grid = np.zeros((GRID_SIDE, GRID_SIDE))
    if world.config.pellet_count:
        rel = world.pellet_pos - world.player_pos
        cols = np.floor((rel[:, 0] + half) / side * GRID_SIDE).astype(np.intp)
        rows = np.floor((rel[:, 1] + half) / side * GRID_SIDE).astype(np.intp)
        ok = (cols >= 0) & (cols < GRID_SIDE) & (rows >= 0) & (rows < GRID_SIDE)
        np.add.at(grid, (rows[ok], cols[ok]), world.pellet_mass[ok])
    return np.concatenate([grid.ravel(), [world.player_mass, side]])


def render_grayscale(world):
    """42×42 frame of the view window: pellets 0.5, player disc 1.0, else 0."""
    side = world.view_side()
    half = 0.5 * side
    frame = np.zeros((FRAME_SIDE, FRAME_SIDE))
    if world.config.pellet_count:
        rel = world.pellet_pos - world.player_pos
        cols = np.floor((rel[:, 0] + half) / side * FRAME_SIDE).astype(np.intp)
        rows = np.floor((rel[:, 1] + half) / side * FRAME_SIDE).astype(np.intp)
        ok = (cols >= 0) & (cols < FRAME_SIDE) & (rows >= 0) & (rows < FRAME_SIDE)
        frame[rows[ok], cols[ok]] = 0.5
    radius_px = world.radius() / side * FRAME_SIDE
    center = (FRAME_SIDE - 1) / 2.0
    yy, xx = np.ogrid[:FRAME_SIDE, :FRAME_SIDE]
    frame[(xx - center) ** 2 + (yy - center) ** 2 <= radius_px**2] = 1.0
    return frame


TRACE_COLUMNS = ("frame", "x", "y", "mass", "action_x", "action_y", "reward")


class AgarEnv:
    """Transition-level wrapper with reset/step, observations, and a trace log.

    obs_mode "grid" yields 123-vectors, "pixels" yields 42×42 frames. Actions
    are 2-vectors in [0,1]²; out-of-range components are clamped. The trace
    holds one row per transition with post-transition position and mass.
    """

    action_dim = 2
    action_squash = "sigmoid"

    def __init__(self, config=None, obs_mode="grid"):
        if obs_mode not in ("grid", "pixels"):
            raise ConfigError(f"obs_mode must be 'grid' or 'pixels', got {obs_mode!r}")
        self.config = config if config is not None else AgarConfig()
        self.obs_mode = obs_mode
        self.world = None
        self.trace = []

    @property
    def episode_transitions(self):
        return self.config.episode_transitions

    @property
    def mass(self):
        return self.world.player_mass

    def observe(self):
        if self.world is None:
            raise StateError("reset before observing")
        if self.obs_mode == "grid":
            return vision_grid(self.world)
        return render_grayscale(self.world)

    def reset(self, seed):
        self.world = AgarWorld(self.config, seed)
        self.trace = []
        return self.observe()

    def step(self, action):
        if self.world is None:
            raise StateError("reset before stepping")
        action = np.clip(np.asarray(action, dtype=np.float64), 0.0, 1.0)
        reward, done = self.world.step_transition(action)
        self.trace.append(
            (
                self.world.frame,
                self.world.player_pos[0],
                self.world.player_pos[1],
                self.world.player_mass,
                action[0],
                action[1],
                reward,
            )
        )
        return self.observe(), reward, done

    def trace_columns(self):
        return list(TRACE_COLUMNS)
