"""Exception types shared across the engine."""


class ConfigurationError(ValueError):
    """Bad option values, mismatched shapes, or inconsistent layer selections."""


class LoadError(Exception):
    """A weight file is missing, malformed, or fails its integrity checks."""


class NumericFailure(RuntimeError):
    """The optimization produced a non-finite loss."""
