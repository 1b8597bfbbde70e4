"""Exception hierarchy.

Every error raised by the library derives from :class:`LinCFAError`; the CLI
maps each subclass to its own exit code.
"""

from __future__ import annotations


class LinCFAError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class DegenerateSampleError(LinCFAError):
    """Too few samples, or a degenerate (zero) denominator in a closed form."""

    exit_code = 10


class ZeroVarianceError(LinCFAError):
    """A column that must vary is constant."""

    exit_code = 11

    def __init__(self, column: str | int, message: str | None = None):
        self.column = column
        super().__init__(message or f"column {column!r} has zero sample variance")


class LengthMismatchError(LinCFAError):
    exit_code = 12


class CollinearityError(LinCFAError):
    """Nonpositive determinant of a 2x2 moment matrix."""

    exit_code = 13


class SingularDesignError(LinCFAError):
    """X^T X is numerically singular (relative eigenvalue guard)."""

    exit_code = 14


class InsufficientSamplesError(LinCFAError):
    exit_code = 15


class MissingMomentError(LinCFAError):
    """A threshold mode was asked for without the moments it needs."""

    exit_code = 16


class QuantileDomainError(LinCFAError):
    exit_code = 17


class InconsistencyError(LinCFAError):
    """A quantity that must be nonnegative came out clearly negative."""

    exit_code = 18


class ConfigError(LinCFAError):
    exit_code = 19


class SchemaMismatchError(LinCFAError):
    exit_code = 20

    def __init__(self, missing: list[str], extra: list[str]):
        self.missing = list(missing)
        self.extra = list(extra)
        super().__init__(f"schema mismatch: missing={self.missing} extra={self.extra}")


class CsvParseError(LinCFAError):
    exit_code = 21

    def __init__(self, message: str, row: int | None = None, column: str | None = None):
        self.row = row
        self.column = column
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column!r}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)


class NonFiniteCellError(CsvParseError):
    exit_code = 22


class MissingTargetError(LinCFAError):
    exit_code = 23


class InsufficientRepetitionsError(LinCFAError):
    exit_code = 24


class ValidationFailed(LinCFAError):
    """Raised by the CLI when a requested closed-form check does not hold."""

    exit_code = 30
