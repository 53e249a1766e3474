"""Experiment configuration: flat key=value files plus per-setup defaults.

A config file holds one ``key = value`` pair per line with ``#`` comments.
Unset keys fall back to defaults, several of which depend on the chosen
environment and algorithm (learning rates, buffer capacity, discount,
total steps). Command-line flags override file values; flag wins.
"""

from dataclasses import dataclass

from aclab.errors import ConfigError

ALGORITHMS = ("cacla", "dpg", "spg")
ENVIRONMENTS = ("agar-grid", "agar-pixel", "pointmass")
TASKS = ("replay", "onpolicy")

TOTAL_STEPS_DEFAULT = {"agar-grid": 500_000, "agar-pixel": 300_000, "pointmass": 200_000}
BUFFER_CAPACITY_DEFAULT = {"agar-grid": 40_000, "agar-pixel": 20_000, "pointmass": 15_000}
DISCOUNT_DEFAULT = {"agar-grid": 0.9, "agar-pixel": 0.9, "pointmass": 0.99}
ACTOR_LR_DEFAULT = {"cacla": 5e-4, "dpg": 1e-4, "spg": 1e-4}
CRITIC_LR_DEFAULT = {"cacla": 7.5e-4, "dpg": 5e-4, "spg": 5e-4}

_INT_KEYS = (
    "total_steps",
    "buffer_capacity",
    "batch_size",
    "n_workers",
    "n_runs",
    "tests_per_checkpoint",
    "base_seed",
    "target_update_interval",
    "spg_sample_count",
)
_FLOAT_KEYS = (
    "actor_lr",
    "critic_lr",
    "discount",
    "sd_initial",
    "sd_at_half",
    "spg_sd_floor",
)
_STR_KEYS = ("algorithm", "environment", "task")
_SPECIAL_KEYS = ("optimistic_offset",)
KNOWN_KEYS = _INT_KEYS + _FLOAT_KEYS + _STR_KEYS + _SPECIAL_KEYS


@dataclass
class ExperimentConfig:
    algorithm: str = "cacla"
    environment: str = "agar-grid"
    task: str = "replay"
    total_steps: int = None
    buffer_capacity: int = None
    batch_size: int = 32
    actor_lr: float = None
    critic_lr: float = None
    discount: float = None
    n_workers: int = 32
    n_runs: int = 10
    tests_per_checkpoint: int = 5
    base_seed: int = 0
    sd_initial: float = 1.0
    sd_at_half: float = 0.05
    target_update_interval: int = 1500
    spg_sample_count: int = 5
    spg_sd_floor: float = 0.05
    optimistic_offset: object = "auto"

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        if self.environment not in ENVIRONMENTS:
            raise ConfigError(
                f"environment must be one of {ENVIRONMENTS}, got {self.environment!r}"
            )
        if self.task not in TASKS:
            raise ConfigError(f"task must be one of {TASKS}, got {self.task!r}")
        if self.environment == "agar-pixel" and self.task == "onpolicy":
            raise ConfigError("agar-pixel supports the replay task only")
        if self.total_steps is None:
            self.total_steps = TOTAL_STEPS_DEFAULT[self.environment]
        if self.buffer_capacity is None:
            self.buffer_capacity = BUFFER_CAPACITY_DEFAULT[self.environment]
        if self.discount is None:
            self.discount = DISCOUNT_DEFAULT[self.environment]
        if self.actor_lr is None:
            self.actor_lr = ACTOR_LR_DEFAULT[self.algorithm]
        if self.critic_lr is None:
            self.critic_lr = CRITIC_LR_DEFAULT[self.algorithm]
        for name in ("total_steps", "batch_size", "n_runs", "tests_per_checkpoint"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.task == "replay" and self.buffer_capacity < self.batch_size:
            raise ConfigError("buffer_capacity must be >= batch_size")
        if self.task == "onpolicy" and self.n_workers < 1:
            raise ConfigError("n_workers must be >= 1")
        if self.total_steps < 20:
            raise ConfigError("total_steps must be >= 20 for 5% checkpoints")
        if self.optimistic_offset != "auto":
            try:
                self.optimistic_offset = float(self.optimistic_offset)
            except (TypeError, ValueError):
                raise ConfigError(
                    f"optimistic_offset must be 'auto' or a number, got {self.optimistic_offset!r}"
                ) from None

    def apply_preset(self, name):
        """Desk-scale presets; 'quick' keeps the 21-checkpoint structure."""
        if name == "quick":
            self.total_steps = 50_000
            self.n_runs = 1
        else:
            raise ConfigError(f"unknown preset {name!r}")
        return self


def _coerce(key, raw):
    try:
        if key in _INT_KEYS:
            return int(raw)
        if key in _FLOAT_KEYS:
            return float(raw)
    except ValueError:
        raise ConfigError(f"bad value for {key}: {raw!r}") from None
    return raw


def parse_config_text(text):
    """key=value lines into a dict; '#' starts a comment, blank lines skipped."""
    items = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno}: expected key=value, got {line!r}")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in KNOWN_KEYS:
            raise ConfigError(f"config line {lineno}: unknown key {key!r}")
        items[key] = raw
    return items


def load_config(path=None, overrides=None, preset=None):
    """Build an ExperimentConfig from an optional file plus overrides.

    ``overrides`` maps key names to raw strings (or typed values); they win
    over file values. The preset applies last.
    """
    items = {}
    if path is not None:
        with open(path) as f:
            items.update(parse_config_text(f.read()))
    for key, value in (overrides or {}).items():
        if key not in KNOWN_KEYS:
            raise ConfigError(f"unknown config key {key!r}")
        if value is not None:
            items[key] = value
    kwargs = {k: _coerce(k, v) if isinstance(v, str) else v for k, v in items.items()}
    config = ExperimentConfig(**kwargs)
    if preset is not None:
        config.apply_preset(preset)
    return config


def config_to_text(config):
    """Serialize back to the key=value format (round-trips through parsing)."""
    lines = []
    for key in KNOWN_KEYS:
        lines.append(f"{key} = {getattr(config, key)}")
    return "\n".join(lines) + "\n"
