"""Exception hierarchy shared across the package.

Every error condition a caller may want to branch on has its own class.
The CLI maps these onto exit codes (see ``esovreg.cli``); library users
can catch ``EsovregError`` for anything raised by this package.
"""

from __future__ import annotations


class EsovregError(Exception):
    """Base class for all errors raised by esovreg."""


class ValidationError(EsovregError, ValueError):
    """Invalid input data or parameters (CLI exit code 2)."""


class NumericError(EsovregError, ArithmeticError):
    """Numerical failure during computation (CLI exit code 3)."""


class IOFailure(EsovregError, OSError):
    """File-level input/output failure (CLI exit code 4)."""


# -- data validation ---------------------------------------------------------

class NegativeEntry(ValidationError):
    """A composition contains a negative part."""


class AllZeroRow(ValidationError):
    """A composition row has no positive part."""


class UnitSumError(ValidationError):
    """Row sum deviates from 1 beyond the re-closure tolerance."""


class ZeroPart(ValidationError):
    """A zero part where strict positivity is required (e.g. log-ratio
    transforms). Callers can run zero replacement first."""


class NonFinite(ValidationError):
    """An input contains NaN or infinity."""


class DimensionMismatch(ValidationError):
    """Operands do not share the required dimensions."""


class InvalidDimension(ValidationError):
    """A dimension parameter is out of range (e.g. D < 2)."""


class InvalidLambda(ValidationError):
    """Weight parameter outside [0, 1]."""


class InvalidFraction(ValidationError):
    """A fraction parameter outside its open interval."""


class InvalidK(ValidationError):
    """Component count for principal-component regression out of range."""


class NotThreeParts(ValidationError):
    """Ternary plotting requested for data that is not three-part."""


class InsufficientReplications(ValidationError):
    """Too few replications for the requested summary."""


# -- numerics ----------------------------------------------------------------

class SingularDesign(NumericError):
    """Design matrix is rank deficient."""


class FoldError(NumericError):
    """A cross-validation fold failed; carries the fold index."""

    def __init__(self, fold: int, message: str):
        super().__init__(f"fold {fold}: {message}")
        self.fold = fold
