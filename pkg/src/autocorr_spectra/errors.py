"""Exception hierarchy shared across the package."""


class SpectraError(Exception):
    """Base class for package errors."""


class ConfigError(SpectraError, ValueError):
    """Invalid experiment configuration."""


class DegenerateInputError(SpectraError, ValueError):
    """Input that makes a construction undefined (e.g. a zero-variance column)."""


class NumericalConsistencyError(SpectraError, ArithmeticError):
    """A numerical self-check failed beyond its tolerance."""


class ConvergenceError(NumericalConsistencyError):
    """An iterative method hit its iteration cap."""
