"""Exception types shared across the solver; each maps to a CLI exit code."""


class BpdgError(Exception):
    """Base class for solver errors."""

    exit_code = 1


class ConfigError(BpdgError):
    """Invalid configuration, mesh, or parameter values."""

    exit_code = 1


class DomainError(BpdgError, ValueError):
    """Argument outside the mathematical domain of an operation."""

    exit_code = 1


class StallError(BpdgError):
    """Time step collapsed to zero; the run cannot advance."""

    exit_code = 2


class PositivityError(BpdgError):
    """A cell average went negative, violating the scheme's guarantee."""

    exit_code = 3
