"""Exception hierarchy shared by every layer of the toolkit."""


class MPR2Error(Exception):
    """Base class for all toolkit errors."""


class FpOverflow(MPR2Error, OverflowError):
    """A value exceeds the largest finite number of its format."""


class FpDivisionByZero(MPR2Error, ZeroDivisionError):
    pass


class FpDomainError(MPR2Error, ValueError):
    """Square root of a negative number (or interval reaching below zero)."""


class InvalidDimension(MPR2Error, ValueError):
    """An error-bound constant is undefined for this (n, u) pair."""


class DegenerateStep(MPR2Error, ArithmeticError):
    pass


class ForbiddenEvaluation(MPR2Error, ValueError):
    """Evaluation requested in a format coarser than the point's own format."""


class ZeroGradientBound(MPR2Error, ArithmeticError):
    """Relative gradient bound undefined: computed gradient is zero but the
    enclosure is not.

    ``radius`` is the Euclidean norm of the componentwise enclosure radius.
    """

    def __init__(self, radius, message=None):
        self.radius = radius
        super().__init__(message or f"zero computed gradient with enclosure radius {radius}")


class UnsupportedPrimitive(MPR2Error, TypeError):
    pass


class UnknownProblem(MPR2Error, KeyError):
    pass


class BadDimension(MPR2Error, ValueError):
    pass


class InvalidConfig(MPR2Error, ValueError):
    pass


class PrecisionFailure(MPR2Error):
    """No available format satisfies a convergence condition."""


class SigmaOverflow(MPR2Error, OverflowError):
    pass


class EmptyIntersection(MPR2Error, ValueError):
    """Effort ratios requested but no problem was solved by both solvers."""
