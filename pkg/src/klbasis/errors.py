"""Exception types shared across the package."""


class NumericalError(RuntimeError):
    """A numerical procedure failed to converge or hit an unstable regime."""


class ConfigError(ValueError):
    """A run configuration failed validation before any computation started."""
