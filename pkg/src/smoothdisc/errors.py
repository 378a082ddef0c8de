"""Exception hierarchy.

Each class carries the CLI exit code it maps to (see ``smoothdisc.cli``).
"""


class SmoothDiscError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class ArgumentError(SmoothDiscError, ValueError):
    """Invalid argument (out of range, wrong dimension, malformed input)."""

    exit_code = 2


class ResourceError(SmoothDiscError):
    """A configured enumeration or work cap would be exceeded."""

    exit_code = 3


class NumericalError(SmoothDiscError, ArithmeticError):
    """Base class for numerical failures."""

    exit_code = 4


class ConstructionError(NumericalError):
    """A point set or lattice could not be constructed as requested."""


class ConditioningError(NumericalError):
    """A matrix is too ill-conditioned to invert reliably."""


class EvaluationError(NumericalError):
    """A function evaluated to a non-finite value."""


class NonconvergenceError(NumericalError):
    """An iterative solver hit its iteration cap.

    ``best`` holds the best-so-far solution, if any.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best
