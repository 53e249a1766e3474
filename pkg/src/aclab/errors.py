"""Exception types shared across the package."""


class AclabError(Exception):
    """Base class for all errors raised by aclab."""


class SpecError(AclabError):
    """A layer or environment was built from an invalid specification."""


class ShapeError(AclabError):
    """An array did not have the shape an operation requires."""


class StateError(AclabError):
    """An operation was called in the wrong order (e.g. backward before forward)."""


class NumericError(AclabError):
    """A non-finite value appeared where a finite one is required."""


class EpisodeFinished(AclabError):
    """step() was called on an environment whose episode already ended."""


class InsufficientData(AclabError):
    """The replay buffer holds fewer transitions than the requested batch."""


class ConfigError(AclabError):
    """An experiment or agent configuration is invalid."""


class WorkerError(AclabError):
    """A worker environment failed inside the synchronized pool."""


class CheckpointError(AclabError):
    """A checkpoint file is malformed or does not match the configuration."""


class MetricsParseError(AclabError):
    """A metrics file could not be parsed; carries the offending line number."""

    def __init__(self, message, line_number):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number
