"""Exception hierarchy shared across the package.

Each class maps to a CLI exit-code category so batch scripts can tell
bad inputs apart from numerical trouble.
"""


class StokesimError(Exception):
    """Base class for all package-specific errors."""


class DomainError(StokesimError, ValueError):
    """A physical or mathematical precondition was violated."""


class ConfigError(StokesimError, ValueError):
    """A run configuration could not be parsed or validated."""


class IntegrationError(StokesimError, RuntimeError):
    """A numerical integration failed to meet its tolerance."""


class FitError(StokesimError, RuntimeError):
    """A least-squares or maximum-likelihood fit could not be performed."""


class DiluteWarning(UserWarning):
    """The ensemble leaves the dilute regime where the model is controlled."""


class AdiabaticWarning(UserWarning):
    """Laser parameters strain the adiabatic-elimination assumption."""
