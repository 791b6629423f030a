"""Exception types shared across modules (and mapped to CLI exit codes)."""


class ConfigError(ValueError):
    """Invalid parameters or settings (CLI exit code 2)."""


class DataError(ValueError):
    """Unusable input data (CLI exit code 3)."""


class StationarityError(ConfigError):
    """A recurrence failed its stationarity screen."""


class SeparationError(ConfigError):
    """A block layout violates the short-block separation requirement."""

    def __init__(self, k, msg):
        super().__init__(msg)
        self.k = k


class ExactMDependence(ValueError):
    """Every rate estimate is zero, so there is no decay law to fit."""
