"""Semantic exceptions shared by all seplimits modules."""


class SepLimitsError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(SepLimitsError, ValueError):
    """An argument violates a documented precondition or invariant."""


class NumericalError(SepLimitsError, RuntimeError):
    """A numerical routine failed to converge or produced unusable output."""
