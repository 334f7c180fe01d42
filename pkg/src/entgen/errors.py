"""Exception types shared across the package."""


class EntgenError(ValueError):
    """Base class for all package-specific errors."""


class DomainError(EntgenError):
    """An argument violates a documented precondition."""


class CapacityError(EntgenError):
    """A request exceeds a hard resource guard (matrix size, basis size)."""


class FixtureError(EntgenError):
    """Unknown named interferometer fixture."""


class ConfigError(EntgenError):
    """Invalid, incomplete, or unknown experiment configuration."""
