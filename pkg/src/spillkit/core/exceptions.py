"""
Exception classes for spillkit.

This module contains all custom exceptions used throughout the spillkit package.
"""

from datetime import date, datetime
from typing import Optional, Union

DateLike = Union[date, datetime, str]


class SpillkitError(Exception):
    """Base exception for all custom spillkit errors."""

    pass


class ValidationError(SpillkitError):
    """Raised when an input violates a documented precondition or invariant."""

    pass


class ConfigError(SpillkitError):
    """Raised when a run configuration cannot be read or fails validation."""

    pass


class DataError(ValidationError):
    """Raised when price or return data is unusable.

    Args:
        message: Description of the problem.
        row: 1-based data row (header excluded) where the problem was found.
        column: Column (series) name.
        date: Calendar date of the offending observation.
    """

    def __init__(
        self,
        message: str,
        *,
        row: Optional[int] = None,
        column: Optional[str] = None,
        date: Optional[DateLike] = None,
    ) -> None:
        self.row = row
        self.column = column
        self.date = date
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column '{column}'")
        if date is not None:
            where.append(f"date {_format_date(date)}")
        suffix = f" ({', '.join(where)})" if where else ""
        super().__init__(f"{message}{suffix}")


class CsvParseError(DataError):
    """Raised when a CSV file or one of its cells cannot be parsed."""

    pass


class DuplicateDateError(DataError):
    """Raised when the same calendar date appears twice in a panel.

    Args:
        duplicate: The duplicated date.
    """

    def __init__(self, duplicate: DateLike) -> None:
        super().__init__(
            f"Duplicate date '{_format_date(duplicate)}' in input", date=duplicate
        )


class MissingValueError(DataError):
    """Raised when missing prices cannot be filled from prior observations."""

    pass


class NonPositivePriceError(DataError):
    """Raised when a price is zero or negative where a logarithm is needed."""

    pass


class DiagnosticsError(SpillkitError):
    """Raised when a descriptive statistic or unit-root test is undefined."""

    pass


class EstimationError(SpillkitError):
    """Raised when a model cannot be estimated."""

    pass


class SingularSystemError(EstimationError):
    """Raised when a regressor cross-product or update covariance is singular."""

    pass


class ConvergenceError(EstimationError):
    """Raised when an iterative solver exhausts its iteration budget."""

    pass


class ConnectednessError(SpillkitError):
    """Raised when a variance decomposition cannot be computed.

    Args:
        message: Description of the problem.
        date: Date of the time point that failed, for dynamic evaluations.
    """

    def __init__(self, message: str, date: Optional[DateLike] = None) -> None:
        self.date = date
        if date is not None:
            message = f"{message} at {_format_date(date)}"
        super().__init__(message)


class GraphError(SpillkitError):
    """Raised when a spillover graph cannot be built or exported."""

    pass


class SimulationError(SpillkitError):
    """Raised when a data generating process is not admissible."""

    pass


def _format_date(value: DateLike) -> str:
    if isinstance(value, (date, datetime)):
        return value.strftime("%Y-%m-%d")
    return str(value)
