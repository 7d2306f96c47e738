"""Exception types shared across the package."""


class ResourceCapError(RuntimeError):
    """Raised when an operation would enumerate more cylinders than the configured cap."""


class NumericError(RuntimeError):
    """Raised when a computation cannot produce a finite, trustworthy result."""


class ConfigError(ValueError):
    """Raised for malformed or inconsistent run configuration."""
