"""Experiment harness: config, training driver, metrics, plots, CLI."""

from aclab.harness.config import ExperimentConfig, load_config, parse_config_text
from aclab.harness.metrics import MetricsRecord, aggregate, load_metrics, save_metrics
from aclab.harness.runner import (
    checkpoint_boundaries,
    estimate_optimistic_offset,
    make_agent,
    make_env,
    run_test,
    run_training,
)
from aclab.harness.svgplot import emit_curves

__all__ = [
    "ExperimentConfig",
    "MetricsRecord",
    "aggregate",
    "checkpoint_boundaries",
    "emit_curves",
    "estimate_optimistic_offset",
    "load_config",
    "load_metrics",
    "make_agent",
    "make_env",
    "parse_config_text",
    "run_test",
    "run_training",
    "save_metrics",
]
