import numpy as np
import pandas as pd
import pytest

from spillkit.core.exceptions import (
    CsvParseError,
    DuplicateDateError,
    MissingValueError,
    NonPositivePriceError,
    ValidationError,
)
from spillkit.panel.dataset import (
    PricePanel,
    ReturnPanel,
    fill_missing,
    ingest_csv,
    log_returns,
    merge_panels,
    prices_from_returns,
    write_returns_csv,
)


class TestIngestCsv:
    def test_reads_columns_in_file_order(self, write_csv):
        path = write_csv(
            [
                "date,corn,wheat",
                "2020-01-02,100,200",
                "2020-01-03,101,201.5",
            ]
        )
        panel = ingest_csv(path)
        assert panel.series_names == ("corn", "wheat")
        assert panel.prices.tolist() == [[100.0, 200.0], [101.0, 201.5]]
        assert list(panel.dates) == [pd.Timestamp("2020-01-02"), pd.Timestamp("2020-01-03")]

    def test_value_columns_select_and_order(self, write_csv):
        path = write_csv(["date,a,b,c", "2020-01-02,1,2,3", "2020-01-03,4,5,6"])
        panel = ingest_csv(path, value_columns=["c", "a"])
        assert panel.series_names == ("c", "a")
        assert panel.prices[:, 0].tolist() == [3.0, 6.0]

    def test_unsorted_rows_are_sorted(self, write_csv):
        path = write_csv(["date,a", "2020-01-06,3", "2020-01-02,1", "2020-01-03,2"])
        panel = ingest_csv(path)
        assert panel.prices[:, 0].tolist() == [1.0, 2.0, 3.0]

    def test_empty_cell_is_missing(self, write_csv):
        path = write_csv(["date,a,b", "2020-01-02,1,", "2020-01-03,2,5"])
        assert np.isnan(ingest_csv(path).prices[0, 1])

    def test_bad_value_cites_row_and_column(self, write_csv):
        path = write_csv(["date,a,b", "2020-01-02,1,2", "2020-01-03,1,oops"])
        with pytest.raises(CsvParseError) as exc_info:
            ingest_csv(path)
        assert exc_info.value.row == 2
        assert exc_info.value.column == "b"
        assert "oops" in str(exc_info.value)

    def test_bad_date(self, write_csv):
        path = write_csv(["date,a", "2020-01-02,1", "02/01/2020,2"])
        with pytest.raises(CsvParseError, match="row 2"):
            ingest_csv(path)

    def test_duplicate_date(self, write_csv):
        path = write_csv(["date,a", "2020-01-02,1", "2020-01-02,2"])
        with pytest.raises(DuplicateDateError, match="2020-01-02"):
            ingest_csv(path)

    def test_missing_date_column(self, write_csv):
        path = write_csv(["day,a", "2020-01-02,1"])
        with pytest.raises(CsvParseError, match="Date column"):
            ingest_csv(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(CsvParseError):
            ingest_csv(tmp_path / "absent.csv")


class TestFillMissing:
    def _panel(self, column):
        dates = pd.bdate_range("2020-01-01", periods=len(column))
        return PricePanel(dates, ("a",), np.array(column, dtype=float)[:, None])

    def test_gap_at_lookback_is_filled(self):
        panel = self._panel([1.0, np.nan, np.nan, 4.0])
        filled = fill_missing(panel, max_lookback=2)
        assert filled.prices[:, 0].tolist() == [1.0, 1.0, 1.0, 4.0]
        assert filled.metadata["filled_cells"] == 2

    def test_gap_beyond_lookback(self):
        panel = self._panel([1.0, np.nan, np.nan, np.nan, 5.0])
        with pytest.raises(MissingValueError) as exc_info:
            fill_missing(panel, max_lookback=2)
        assert exc_info.value.column == "a"
        assert exc_info.value.date == panel.dates[3]

    def test_leading_missing(self):
        with pytest.raises(MissingValueError, match="starts with"):
            fill_missing(self._panel([np.nan, 1.0, 2.0]))

    def test_complete_panel_unchanged(self):
        panel = self._panel([1.0, 2.0, 3.0])
        np.testing.assert_array_equal(fill_missing(panel).prices, panel.prices)


class TestLogReturns:
    def test_values_and_dates(self):
        dates = pd.bdate_range("2020-01-01", periods=3)
        panel = PricePanel(dates, ("a",), np.array([[1.0], [np.e], [1.0]]))
        returns = log_returns(panel)
        np.testing.assert_allclose(returns.returns[:, 0], [1.0, -1.0])
        assert list(returns.dates) == list(dates[1:])
        assert returns.metadata["order"] == "fill-then-return"

    def test_non_positive_price(self):
        dates = pd.bdate_range("2020-01-01", periods=2)
        panel = PricePanel(dates, ("a",), np.array([[1.0], [0.0]]))
        with pytest.raises(NonPositivePriceError):
            log_returns(panel)

    def test_unfilled_panel(self):
        dates = pd.bdate_range("2020-01-01", periods=3)
        panel = PricePanel(dates, ("a",), np.array([[1.0], [np.nan], [2.0]]))
        with pytest.raises(MissingValueError):
            log_returns(panel)

    def test_fill_then_return_round_trip(self, driver_panel):
        prices = prices_from_returns(driver_panel)
        rebuilt = log_returns(fill_missing(prices))
        np.testing.assert_allclose(rebuilt.returns, driver_panel.returns, atol=1e-12)
        assert list(rebuilt.dates) == list(driver_panel.dates)


def test_merge_panels_union_calendar():
    a = PricePanel(pd.DatetimeIndex(["2020-01-02", "2020-01-03"]), ("a",), [[1.0], [2.0]])
    b = PricePanel(pd.DatetimeIndex(["2020-01-03", "2020-01-06"]), ("b",), [[5.0], [6.0]])
    merged = merge_panels(a, b)
    assert merged.series_names == ("a", "b")
    assert len(merged.dates) == 3
    assert np.isnan(merged.prices[0, 1])
    assert np.isnan(merged.prices[2, 0])


def test_merge_panels_repeated_name():
    a = PricePanel(pd.DatetimeIndex(["2020-01-02", "2020-01-03"]), ("a",), [[1.0], [2.0]])
    with pytest.raises(ValidationError, match="a"):
        merge_panels(a, a)


class TestReturnPanel:
    def test_rejects_non_finite(self):
        with pytest.raises(ValidationError):
            ReturnPanel(pd.bdate_range("2020-01-01", periods=2), ("a",), [[0.1], [np.inf]])

    def test_arrays_are_read_only(self, driver_panel):
        with pytest.raises(ValueError):
            driver_panel.returns[0, 0] = 1.0

    def test_csv_written_at_full_precision(self, tmp_path, driver_panel):
        path = write_returns_csv(driver_panel, tmp_path / "returns.csv")
        frame = pd.read_csv(
            path, index_col="date", parse_dates=True, float_precision="round_trip"
        )
        np.testing.assert_array_equal(frame.to_numpy(), driver_panel.returns)

    def test_slice_rows(self, driver_panel):
        part = driver_panel.slice_rows(10, 20)
        assert part.n_obs == 10
        assert part.dates[0] == driver_panel.dates[10]


class TestInvariants:
    def _gappy_panel(self):
        dates = pd.bdate_range("2020-01-01", periods=8)
        prices = np.array(
            [
                [10.0, 20.0, 30.0],
                [np.nan, 21.0, 31.0],
                [np.nan, np.nan, 32.0],
                [11.0, 22.0, np.nan],
                [12.0, np.nan, np.nan],
                [13.0, 23.0, np.nan],
                [np.nan, 24.0, 33.0],
                [14.0, 25.0, 34.0],
            ]
        )
        return PricePanel(dates, ("a", "b", "c"), prices)

    def test_fill_missing_idempotent(self):
        once = fill_missing(self._gappy_panel(), max_lookback=3)
        twice = fill_missing(once, max_lookback=3)
        np.testing.assert_array_equal(twice.prices, once.prices)
        assert list(twice.dates) == list(once.dates)
        assert twice.metadata["filled_cells"] == 0

    def test_column_permutation_equivariance(self, write_csv):
        rows = ["2020-01-02,100,200,50", "2020-01-03,101,,51", "2020-01-06,99,204,52.5"]
        original = write_csv(["date,a,b,c", *rows], name="abc.csv")
        shuffled = write_csv(
            ["date,c,a,b", *[",".join([r.split(",")[i] for i in (0, 3, 1, 2)]) for r in rows]],
            name="cab.csv",
        )
        base = log_returns(fill_missing(ingest_csv(original)))
        permuted = log_returns(fill_missing(ingest_csv(shuffled)))
        assert permuted.series_names == ("c", "a", "b")
        np.testing.assert_array_equal(permuted.returns, base.returns[:, [2, 0, 1]])
        assert list(permuted.dates) == list(base.dates)

    def test_value_columns_order_equivariance(self, price_csv, driver_panel):
        names = list(reversed(driver_panel.series_names))
        returns = log_returns(fill_missing(ingest_csv(price_csv, value_columns=names)))
        assert returns.series_names == tuple(names)
        np.testing.assert_allclose(returns.returns, driver_panel.returns[:, ::-1], atol=1e-12)
