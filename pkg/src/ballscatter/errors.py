"""Exception hierarchy shared by all ballscatter modules."""

from __future__ import annotations


class BallScatterError(Exception):
    """Base class for every error raised by this package."""


class DomainError(BallScatterError, ValueError):
    """An argument lies outside the domain of the requested operation."""


class PreconditionError(DomainError):
    """A hypothesis of a bound or construction is violated.

    ``clause`` names the hypothesis (for example ``"lambda > 7"``) so the CLI
    can echo it back to the user.
    """

    def __init__(self, message: str, clause: str | None = None):
        super().__init__(message)
        self.clause = clause


class PoleError(DomainError):
    """Evaluation requested too close to a zero of a Bessel denominator."""

    def __init__(self, message: str, zero: float):
        super().__init__(message)
        self.zero = zero


class BesselOverflow(BallScatterError, ArithmeticError):
    """A Bessel value is not representable as a double.

    The value is ``sign * exp(log_abs)``; ratio quantities stay available on
    the :class:`~ballscatter.specfun.BesselEval` that raised this.
    """

    def __init__(self, name: str, sign: float, log_abs: float):
        super().__init__(f"{name} = {'-' if sign < 0 else ''}exp({log_abs:.6g}) is not representable")
        self.name = name
        self.sign = sign
        self.log_abs = log_abs


class DivergentSeriesError(BallScatterError, ArithmeticError):
    """A weighted modal sum does not converge."""

    def __init__(self, message: str, partial_sums=()):
        super().__init__(message)
        self.partial_sums = list(partial_sums)


class UnsupportedProfileError(BallScatterError, TypeError):
    """The radial profile of a field is not one of the analytic forms."""


class EmptySetError(DomainError):
    """A set defined by an inequality turned out to be empty."""
