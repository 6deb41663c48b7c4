"""Exception hierarchy shared across the package."""


class BondoptError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(BondoptError):
    """An argument violates a documented precondition (bounds, shapes, counts)."""


class FitError(BondoptError):
    """A model fit failed (conditioning failure, non-convergence)."""


class ConfigError(BondoptError):
    """A run configuration is invalid or inconsistent."""
