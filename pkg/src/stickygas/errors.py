"""Exception types shared across the package."""


class ParameterError(ValueError):
    """Invalid model or operation parameters."""


class ModelMismatchError(ValueError):
    """Operation received a configuration from the wrong sampler."""


class WindowError(ValueError):
    """Requested window radius exceeds the increments available."""


class DomainError(ValueError):
    """Argument outside the region where the estimator is defined."""


class FitError(RuntimeError):
    """Degenerate design passed to a fitting routine."""


class ConsistencyError(RuntimeError):
    """Internal cross-check failed; indicates a bug, not bad input."""


class ConfigError(ValueError):
    """Malformed experiment configuration (CLI or config file)."""
