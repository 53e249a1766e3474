"""Simulation environments: the pellet-foraging world and the point-mass task."""

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
from aclab.envs.pointmass import PointMassConfig, PointMassEnv
from aclab.envs.trace import load_trace, save_trace

__all__ = [
    "FRAME_SIDE",
    "GRID_FEATURES",
    "GRID_SIDE",
    "AgarConfig",
    "AgarEnv",
    "AgarWorld",
    "PointMassConfig",
    "PointMassEnv",
    "load_trace",
    "render_grayscale",
    "save_trace",
    "vision_grid",
]
