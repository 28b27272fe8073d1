"""Exception hierarchy.

Two families map onto CLI exit codes: :class:`ValidationError` (bad input,
exit 2) and :class:`NumericalError` (an algorithm failed on valid input,
exit 3).
"""

from __future__ import annotations


class TpmError(Exception):
    """Base class for all toolkit errors.

    Parameters
    ----------
    message : str
        Human-readable description.
    stage : str, optional
        Pipeline stage that raised the error, prefixed to the message.
    """

    exit_code = 1

    def __init__(self, message: str, *, stage: str | None = None, **details):
        self.stage = stage
        self.details = details
        prefix = f"[{stage}] " if stage else ""
        super().__init__(prefix + message)

    def with_stage(self, stage: str) -> "TpmError":
        """Return a copy of this error tagged with a pipeline stage."""
        raw = str(self)
        if self.stage:
            raw = raw.split("] ", 1)[-1]
        return type(self)(raw, stage=stage, **self.details)


class ValidationError(TpmError, ValueError):
    exit_code = 2


class ParseError(ValidationError):
    """Malformed input file. ``details`` carries ``path``, ``row`` and ``column``."""


class ConfigurationError(ValidationError):
    pass


class RatingLookupError(ValidationError, KeyError):
    def __str__(self) -> str:  # KeyError would otherwise quote the message
        return Exception.__str__(self)


class DegenerateInputError(ValidationError):
    pass


class UndefinedCorrelationError(ValidationError):
    pass


class NumericalError(TpmError, ArithmeticError):
    exit_code = 3


class NoPrincipalLogError(NumericalError):
    pass


class ConvergenceError(NumericalError):
    pass


class CalibrationError(NumericalError):
    pass


class BoundsError(CalibrationError):
    pass


class NoRootError(NumericalError):
    pass
