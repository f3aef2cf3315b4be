"""
Price and return panels.

This module reads close-price CSV files into aligned panels, fills short gaps
forward from the previous trading day and turns prices into daily log returns.
Panels are immutable; every operation returns a new panel.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np
import pandas as pd

from spillkit.core.exceptions import (
    CsvParseError,
    DataError,
    DuplicateDateError,
    MissingValueError,
    NonPositivePriceError,
    ValidationError,
)
from spillkit.core.types import FilePath, FloatMatrix

logger = logging.getLogger(__name__)

DATE_FORMAT = "%Y-%m-%d"
FILL_THEN_RETURN = "fill-then-return"


def _readonly(values: Any) -> FloatMatrix:
    array = np.array(values, dtype=np.float64)
    array.setflags(write=False)
    return array


def _check_calendar(dates: pd.DatetimeIndex) -> None:
    duplicated = dates[dates.duplicated()]
    if len(duplicated):
        raise DuplicateDateError(duplicated[0])
    if not dates.is_monotonic_increasing:
        raise ValidationError("Panel dates must be strictly increasing")


@dataclass(frozen=True, eq=False)
class PricePanel:
    """
    Close prices of N series on a shared calendar.

    Missing observations are stored as NaN until :func:`fill_missing` runs.

    Args:
        dates: Strictly increasing calendar dates, length T.
        series_names: N series identifiers.
        prices: (T, N) matrix of close prices.
        metadata: Processing notes carried into the return panel.
    """

    dates: pd.DatetimeIndex
    series_names: tuple[str, ...]
    prices: FloatMatrix
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "dates", pd.DatetimeIndex(self.dates))
        object.__setattr__(self, "series_names", tuple(self.series_names))
        object.__setattr__(self, "prices", _readonly(self.prices))
        if self.prices.ndim != 2 or self.prices.shape != (
            len(self.dates),
            len(self.series_names),
        ):
            raise ValidationError(
                f"Price matrix shape {self.prices.shape} does not match "
                f"{len(self.dates)} dates x {len(self.series_names)} series"
            )
        if len(set(self.series_names)) != len(self.series_names):
            raise ValidationError("Series names must be unique")
        _check_calendar(self.dates)
        counts = np.sum(~np.isnan(self.prices), axis=0)
        for name, count in zip(self.series_names, counts):
            if count < 2:
                raise DataError("Series has fewer than 2 observations", column=name)

    @property
    def n_obs(self) -> int:
        return len(self.dates)

    @property
    def n_series(self) -> int:
        return len(self.series_names)

    def to_frame(self) -> pd.DataFrame:
        """Prices as a DataFrame indexed by date."""
        return pd.DataFrame(
            self.prices, index=self.dates.rename("date"), columns=list(self.series_names)
        )

    def select(self, columns: Sequence[str]) -> "PricePanel":
        """Panel restricted to ``columns`` in the given order."""
        index = _column_positions(self.series_names, columns)
        return PricePanel(
            self.dates, tuple(columns), self.prices[:, index], dict(self.metadata)
        )


@dataclass(frozen=True, eq=False)
class ReturnPanel:
    """
    Daily log returns of N series.

    Args:
        dates: Later date of each price pair, length T - 1 of the source panel.
        series_names: N series identifiers.
        returns: (T - 1, N) matrix of finite log returns.
        metadata: Processing notes, e.g. ``{"order": "fill-then-return"}``.
    """

    dates: pd.DatetimeIndex
    series_names: tuple[str, ...]
    returns: FloatMatrix
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "dates", pd.DatetimeIndex(self.dates))
        object.__setattr__(self, "series_names", tuple(self.series_names))
        object.__setattr__(self, "returns", _readonly(self.returns))
        if self.returns.ndim != 2 or self.returns.shape != (
            len(self.dates),
            len(self.series_names),
        ):
            raise ValidationError(
                f"Return matrix shape {self.returns.shape} does not match "
                f"{len(self.dates)} dates x {len(self.series_names)} series"
            )
        if len(set(self.series_names)) != len(self.series_names):
            raise ValidationError("Series names must be unique")
        _check_calendar(self.dates)
        if not np.all(np.isfinite(self.returns)):
            row, col = np.argwhere(~np.isfinite(self.returns))[0]
            raise DataError(
                "Non-finite return",
                column=self.series_names[col],
                date=self.dates[row],
            )

    @property
    def n_obs(self) -> int:
        return len(self.dates)

    @property
    def n_series(self) -> int:
        return len(self.series_names)

    def to_frame(self) -> pd.DataFrame:
        """Returns as a DataFrame indexed by date."""
        return pd.DataFrame(
            self.returns, index=self.dates.rename("date"), columns=list(self.series_names)
        )

    @classmethod
    def from_frame(
        cls, frame: pd.DataFrame, metadata: Optional[dict[str, Any]] = None
    ) -> "ReturnPanel":
        """Build a panel from a date-indexed DataFrame of returns."""
        return cls(
            pd.DatetimeIndex(frame.index),
            tuple(str(c) for c in frame.columns),
            frame.to_numpy(dtype=np.float64),
            dict(metadata or {}),
        )

    def select(self, columns: Sequence[str]) -> "ReturnPanel":
        """Panel restricted to ``columns`` in the given order."""
        index = _column_positions(self.series_names, columns)
        return ReturnPanel(
            self.dates, tuple(columns), self.returns[:, index], dict(self.metadata)
        )

    def slice_rows(self, start: int, end: int) -> "ReturnPanel":
        """Rows ``start .. end - 1``."""
        return ReturnPanel(
            self.dates[start:end],
            self.series_names,
            self.returns[start:end],
            dict(self.metadata),
        )


def _column_positions(names: Sequence[str], columns: Sequence[str]) -> list[int]:
    unknown = [c for c in columns if c not in names]
    if unknown:
        raise ValidationError(f"Unknown series: {', '.join(unknown)}")
    return [list(names).index(c) for c in columns]


def ingest_csv(
    path: FilePath,
    date_column: str = "date",
    value_columns: Optional[Sequence[str]] = None,
) -> PricePanel:
    """
    Read a close-price CSV file into a :class:`PricePanel`.

    The file has a header row, an ISO-8601 date column and one numeric column
    per series. Empty cells are kept as missing for :func:`fill_missing`. Rows
    may appear in any order; they are sorted by date.

    Args:
        path: CSV file path.
        date_column: Name of the date column.
        value_columns: Series to read, in output order. Defaults to every
            other column in file order.

    Returns:
        PricePanel with NaN for missing cells.

    Raises:
        CsvParseError: If the file cannot be read, a date cannot be parsed or a
            non-empty cell is not a finite number. Row numbers are 1-based and
            exclude the header.
        DuplicateDateError: If a date appears twice.
    """
    path = Path(path)
    try:
        frame = pd.read_csv(
            path, dtype=str, keep_default_na=False, encoding="utf-8", sep=","
        )
    except (OSError, UnicodeDecodeError, pd.errors.ParserError) as exc:
        raise CsvParseError(f"Cannot read CSV file '{path}': {exc}") from exc
    except pd.errors.EmptyDataError as exc:
        raise CsvParseError(f"CSV file '{path}' is empty") from exc

    if date_column not in frame.columns:
        raise CsvParseError(f"Date column '{date_column}' not found in '{path}'")
    columns = (
        list(value_columns)
        if value_columns is not None
        else [c for c in frame.columns if c != date_column]
    )
    if not columns:
        raise CsvParseError(f"No value columns in '{path}'")
    absent = [c for c in columns if c not in frame.columns]
    if absent:
        raise CsvParseError(
            f"Columns not found in '{path}': {', '.join(absent)}"
        )

    raw_dates = frame[date_column].str.strip()
    dates = pd.to_datetime(raw_dates, format=DATE_FORMAT, errors="coerce")
    if dates.isna().any():
        row = int(np.flatnonzero(dates.isna().to_numpy())[0])
        raise CsvParseError(
            f"Unparseable date '{frame[date_column].iloc[row]}'",
            row=row + 1,
            column=date_column,
        )

    values = np.full((len(frame), len(columns)), np.nan)
    for j, name in enumerate(columns):
        cells = frame[name].str.strip()
        present = (cells != "").to_numpy()
        parsed = pd.to_numeric(cells.where(present), errors="coerce").to_numpy(
            dtype=np.float64
        )
        bad = present & ~np.isfinite(parsed)
        if bad.any():
            row = int(np.flatnonzero(bad)[0])
            raise CsvParseError(
                f"Non-numeric value '{frame[name].iloc[row]}'",
                row=row + 1,
                column=name,
            )
        values[:, j] = parsed

    index = pd.DatetimeIndex(dates)
    duplicated = index[index.duplicated()]
    if len(duplicated):
        raise DuplicateDateError(duplicated[0])
    order = np.argsort(index.to_numpy(), kind="stable")
    logger.info("Read %d rows x %d series from %s", len(frame), len(columns), path)
    return PricePanel(index[order], tuple(columns), values[order])


def merge_panels(*panels: PricePanel) -> PricePanel:
    """
    Align several price panels on the union of their calendars.

    A series absent on a date of another panel becomes missing there.

    Raises:
        ValidationError: If no panel is given or a series name repeats.
    """
    if not panels:
        raise ValidationError("merge_panels needs at least one panel")
    names = [name for panel in panels for name in panel.series_names]
    repeated = sorted({n for n in names if names.count(n) > 1})
    if repeated:
        raise ValidationError(f"Series appear in more than one panel: {', '.join(repeated)}")
    merged = pd.concat([panel.to_frame() for panel in panels], axis=1, join="outer")
    merged = merged.sort_index()
    logger.info("Merged %d panels onto %d dates", len(panels), len(merged))
    return PricePanel(pd.DatetimeIndex(merged.index), tuple(names), merged.to_numpy())


def fill_missing(panel: PricePanel, max_lookback: int = 5) -> PricePanel:
    """
    Fill each missing price with the most recent prior price of the same series.

    The search goes back at most ``max_lookback`` rows, so a run of more than
    ``max_lookback`` consecutive missing days is an error.

    Args:
        panel: Panel possibly containing NaN prices.
        max_lookback: Longest fillable gap in rows.

    Returns:
        Fully populated panel.

    Raises:
        ValidationError: If ``max_lookback`` < 1.
        MissingValueError: If a series starts with a missing value or a gap
            is longer than ``max_lookback``.

    Example:
        >>> import numpy as np, pandas as pd
        >>> p = PricePanel(pd.bdate_range("2020-01-01", periods=3), ("a",),
        ...                np.array([[100.0], [np.nan], [102.0]]))
        >>> fill_missing(p).prices[:, 0].tolist()
        [100.0, 100.0, 102.0]
    """
    if max_lookback < 1:
        raise ValidationError(f"max_lookback must be >= 1, got {max_lookback}")
    frame = panel.to_frame()
    for name in frame.columns:
        if np.isnan(frame[name].iloc[0]):
            raise MissingValueError(
                "Series starts with a missing value", column=name, date=panel.dates[0]
            )
    filled = frame.ffill(limit=max_lookback)
    remaining = filled.isna().to_numpy()
    if remaining.any():
        row, col = np.argwhere(remaining)[0]
        raise MissingValueError(
            f"Gap longer than {max_lookback} rows",
            column=panel.series_names[col],
            date=panel.dates[row],
        )
    n_filled = int(frame.isna().to_numpy().sum())
    if n_filled:
        logger.info("Filled %d missing prices (max_lookback=%d)", n_filled, max_lookback)
    metadata = dict(panel.metadata)
    metadata["max_lookback"] = max_lookback
    metadata["filled_cells"] = metadata.get("filled_cells", 0) + n_filled
    return PricePanel(panel.dates, panel.series_names, filled.to_numpy(), metadata)


def log_returns(panel: PricePanel) -> ReturnPanel:
    """
    Daily log returns ``ln P[t+1] - ln P[t]`` dated by the later day.

    Raises:
        MissingValueError: If the panel still has missing prices.
        NonPositivePriceError: If a price is zero or negative.

    Example:
        >>> import numpy as np, pandas as pd
        >>> p = PricePanel(pd.bdate_range("2020-01-01", periods=2), ("a",),
        ...                np.array([[100.0], [100.0 * np.e]]))
        >>> round(float(log_returns(p).returns[0, 0]), 12)
        1.0
    """
    prices = panel.prices
    if np.isnan(prices).any():
        row, col = np.argwhere(np.isnan(prices))[0]
        raise MissingValueError(
            "Missing price; run fill_missing first",
            column=panel.series_names[col],
            date=panel.dates[row],
        )
    if (prices <= 0).any():
        row, col = np.argwhere(prices <= 0)[0]
        raise NonPositivePriceError(
            f"Non-positive price {prices[row, col]:g}",
            column=panel.series_names[col],
            date=panel.dates[row],
        )
    returns = np.diff(np.log(prices), axis=0)
    metadata = dict(panel.metadata)
    metadata["order"] = FILL_THEN_RETURN
    return ReturnPanel(panel.dates[1:], panel.series_names, returns, metadata)


def prices_from_returns(returns: ReturnPanel, base: float = 100.0) -> PricePanel:
    """
    Rebuild a price panel whose log returns are ``returns``.

    The first row holds ``base`` and is dated one business day before the
    first return.
    """
    if base <= 0:
        raise ValidationError(f"Base price must be positive, got {base}")
    first = returns.dates[0] - pd.offsets.BDay(1)
    dates = pd.DatetimeIndex([first]).append(returns.dates)
    levels = np.vstack(
        [np.zeros((1, returns.n_series)), np.cumsum(returns.returns, axis=0)]
    )
    return PricePanel(dates, returns.series_names, base * np.exp(levels))


def write_prices_csv(panel: PricePanel, path: FilePath) -> Path:
    """Write a price panel in the ingest CSV shape (missing cells empty)."""
    return _write_frame(panel.to_frame(), path)


def write_returns_csv(panel: ReturnPanel, path: FilePath) -> Path:
    """Write a return panel in the ingest CSV shape at full precision."""
    return _write_frame(panel.to_frame(), path)


def _write_frame(frame: pd.DataFrame, path: FilePath) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, date_format=DATE_FORMAT, float_format="%.17g", na_rep="")
    except OSError as exc:
        raise DataError(f"Cannot write '{path}': {exc}") from exc
    return path
