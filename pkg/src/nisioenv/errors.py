"""Error types shared across the package."""


class UsageError(ValueError):
    """A caller violated an operation precondition (bad argument at call time)."""


class ConfigurationError(ValueError):
    """Invalid experiment configuration or unusable input data."""
