"""Exception hierarchy shared by all modules."""


class ComplementarityError(Exception):
    """Base class for errors raised by this package."""


class DomainError(ComplementarityError, ValueError):
    """An argument lies outside its mathematical domain."""


class DegenerateConfigurationError(ComplementarityError, ArithmeticError):
    """All detectable population vanished, so a normalized quantity is undefined."""


class InsufficientDataError(ComplementarityError, ValueError):
    """Too few distinct samples to fit a fringe."""


class DegenerateFitError(ComplementarityError, ArithmeticError):
    """The fitted fringe offset is not positive."""


class InsufficientStatisticsError(ComplementarityError, ArithmeticError):
    """No shots survived detection, so post-selected estimates are undefined."""


class ConfigError(ComplementarityError, ValueError):
    """A run configuration could not be parsed or failed validation."""
