"""Exception hierarchy.

Every error class carries a distinct ``exit_code`` used by the CLI.
"""
from __future__ import annotations


class FreqBiasError(Exception):
    """Base class for all package errors."""

    exit_code = 1


# -- time series -------------------------------------------------------------


class NonFiniteValue(FreqBiasError, ValueError):
    exit_code = 10

    def __init__(self, index: int):
        self.index = index
        super().__init__(f"non-finite value at index {index}")


class EmptySeries(FreqBiasError, ValueError):
    exit_code = 11

    def __init__(self, msg: str = "series must contain at least one value"):
        super().__init__(msg)


class NonPositivePeriod(FreqBiasError, ValueError):
    exit_code = 12


class ShapeMismatch(FreqBiasError, ValueError):
    exit_code = 13


class UnitMismatch(FreqBiasError, ValueError):
    exit_code = 14


class PeriodMismatch(FreqBiasError, ValueError):
    exit_code = 15


class PartialHour(FreqBiasError, ValueError):
    exit_code = 16


class OutOfBounds(FreqBiasError, IndexError):
    exit_code = 17


class UnsupportedUnit(FreqBiasError, ValueError):
    exit_code = 18


# -- simulator ---------------------------------------------------------------


class StepTooLarge(FreqBiasError, ValueError):
    exit_code = 20


class NonFiniteState(FreqBiasError, FloatingPointError):
    exit_code = 21


class DegenerateParams(FreqBiasError, ValueError):
    exit_code = 22


class EmptyArea(FreqBiasError, ValueError):
    exit_code = 23


class InvalidSpec(FreqBiasError, ValueError):
    exit_code = 24


class ScheduleMismatch(FreqBiasError, ValueError):
    exit_code = 25


# -- estimator ---------------------------------------------------------------


class CollinearRegressors(FreqBiasError, ArithmeticError):
    exit_code = 30


class SeriesTooShort(FreqBiasError, ValueError):
    exit_code = 31


class ZeroSigma(FreqBiasError, ZeroDivisionError):
    exit_code = 32


# -- reserves ----------------------------------------------------------------


class BadQuantile(FreqBiasError, ValueError):
    exit_code = 40


class NegativeInput(FreqBiasError, ValueError):
    exit_code = 41


# -- ingestion / pipeline ----------------------------------------------------


class MissingColumn(FreqBiasError, KeyError):
    exit_code = 50

    def __init__(self, name: str):
        self.name = name
        super().__init__(name)

    def __str__(self) -> str:
        return f"missing column {self.name!r}"


class BadTimestamp(FreqBiasError, ValueError):
    exit_code = 51

    def __init__(self, row: int, detail: str = ""):
        self.row = row
        msg = f"bad timestamp at row {row}"
        super().__init__(f"{msg}: {detail}" if detail else msg)


class NonFinite(FreqBiasError, ValueError):
    exit_code = 52

    def __init__(self, row: int, column: str):
        self.row = row
        self.column = column
        super().__init__(f"non-finite or unparsable value at row {row}, column {column!r}")


class GapRejected(FreqBiasError, ValueError):
    exit_code = 53

    def __init__(self, hour: int):
        self.hour = hour
        super().__init__(f"missing samples in hour {hour} (gap_policy=reject)")


class IoError(FreqBiasError, OSError):
    exit_code = 54


class ConfigError(FreqBiasError, ValueError):
    exit_code = 55


def all_error_classes() -> list[type[FreqBiasError]]:
    """Every concrete error class, in definition order."""
    out = []
    stack = [FreqBiasError]
    while stack:
        cls = stack.pop(0)
        out.append(cls)
        stack.extend(cls.__subclasses__())
    return out
