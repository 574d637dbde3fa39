"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


class UnsupportedModelError(TypeError):
    """The operation has no implementation for this manifold model."""


class ResourceLimitError(RuntimeError):
    """A configured hard cap (element count, iterations) would be exceeded."""

    def __init__(self, message, cap=None):
        super().__init__(message)
        self.cap = cap


class ConfigError(ValueError):
    """Malformed or invalid run configuration."""

    def __init__(self, message, key=None, line=None):
        super().__init__(message)
        self.key = key
        self.line = line
