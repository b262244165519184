"""
Exceptions raised by the numeric modules.

Every failure a caller can act on has its own class; all of them derive
from NumericsError so a driver can catch the family in one place.
"""
from __future__ import annotations


class NumericsError(Exception):
    pass


class PoleError(NumericsError):
    """
    Raised at (or too close to) a pole.

    Args:
    - message: short description
    - point: the offending argument
    - where: optional index pair (i, j) naming the factor that blew up
    """

    def __init__(self, message: str, point: complex | None = None, where: tuple | None = None) -> None:
        super().__init__(message)
        self.point = point
        self.where = where


class AccuracyError(NumericsError):

    def __init__(self, message: str, estimate: float | None = None) -> None:
        super().__init__(message)
        self.estimate = estimate


class QuadratureError(AccuracyError):
    pass


class BudgetError(NumericsError):
    pass


class CoincidentShiftError(NumericsError):
    pass


class RegimeError(NumericsError):
    pass


class DivergenceError(RegimeError):
    pass


class NearCoincidenceError(NumericsError):
    pass


class TailTooLargeError(NumericsError):

    def __init__(self, message: str, tail: float | None = None) -> None:
        super().__init__(message)
        self.tail = tail


class ConfigError(ValueError):
    pass


class IdentityViolationError(NumericsError):
    """An exact identity failed; carries the names of the failing checks."""

    def __init__(self, message: str, failed: tuple = ()) -> None:
        super().__init__(message)
        self.failed = failed
