"""
Descriptive statistics, normality and unit-root tests, and VAR lag selection.

The Jarque-Bera test uses population (biased) moments and a chi-square(2)
reference distribution. The ADF regression includes a constant and no trend;
its lag count is chosen by BIC and p-values and critical values follow the
MacKinnon response surfaces shipped with statsmodels.
"""

import logging
import math
from dataclasses import asdict, dataclass
from typing import Literal, NamedTuple, Optional

import numpy as np
import pandas as pd
from scipy import stats
from statsmodels.tsa.api import VAR
from statsmodels.tsa.stattools import adfuller

from spillkit.core.exceptions import DiagnosticsError
from spillkit.core.types import FloatArray
from spillkit.panel.dataset import ReturnPanel

logger = logging.getLogger(__name__)

MIN_DESCRIBE_LENGTH = 20
ADF_BANDS = (("1%", "***"), ("5%", "**"), ("10%", "*"))


class AdfResult(NamedTuple):
    """Outcome of an augmented Dickey-Fuller test."""

    statistic: float
    lags_used: int
    pvalue: float
    critical_values: dict[str, float]

    @property
    def reject_1pct(self) -> bool:
        return self.statistic < self.critical_values["1%"]

    @property
    def band(self) -> str:
        """Significance stars against the 1/5/10% critical values."""
        for level, stars in ADF_BANDS:
            if self.statistic < self.critical_values[level]:
                return stars
        return ""


@dataclass(frozen=True)
class SeriesDiagnostics:
    """Moments, Jarque-Bera and ADF results for one return series."""

    mean: float
    sd: float
    skewness: float
    excess_kurtosis: float
    jb_statistic: float
    jb_pvalue: float
    adf_statistic: float
    adf_lags: int
    adf_reject_1pct: bool
    adf_pvalue: float
    adf_band: str
    n_obs: int

    def as_dict(self) -> dict:
        return asdict(self)


def schwert_max_lags(n_obs: int) -> int:
    """
    Default ADF lag bound ``floor(12 * (T / 100) ** 0.25)``.

    Example:
        >>> schwert_max_lags(2000)
        25
    """
    return int(math.floor(12.0 * (n_obs / 100.0) ** 0.25))


def adf_test(
    series: FloatArray,
    max_lags: Optional[int] = None,
    deterministic: Literal["c"] = "c",
) -> AdfResult:
    """
    Augmented Dickey-Fuller test with the lag count chosen by BIC.

    Args:
        series: Observations in time order.
        max_lags: Largest lag considered. Defaults to :func:`schwert_max_lags`.
        deterministic: Deterministic terms; only ``"c"`` (constant) is supported.

    Returns:
        AdfResult with the t-ratio on the lagged level, the lags used, the
        MacKinnon p-value and the 1/5/10% critical values.

    Raises:
        DiagnosticsError: If the series is too short, constant or its lag
            matrix is collinear.
    """
    if deterministic != "c":
        raise DiagnosticsError(f"Unsupported deterministic terms '{deterministic}'")
    x = np.asarray(series, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise DiagnosticsError("ADF input contains non-finite values")
    max_lags = schwert_max_lags(len(x)) if max_lags is None else int(max_lags)
    if max_lags < 0:
        raise DiagnosticsError(f"max_lags must be >= 0, got {max_lags}")
    if len(x) <= max_lags + 10:
        raise DiagnosticsError(
            f"Series of length {len(x)} is too short for an ADF test with {max_lags} lags"
        )
    try:
        statistic, pvalue, used_lag, _, critical, _ = adfuller(
            x, maxlag=max_lags, regression="c", autolag="BIC"
        )
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise DiagnosticsError(f"ADF regression failed: {exc}") from exc
    if not np.isfinite(statistic):
        raise DiagnosticsError("ADF regression is degenerate (collinear lag matrix)")
    return AdfResult(
        statistic=float(statistic),
        lags_used=int(used_lag),
        pvalue=float(pvalue),
        critical_values={k: float(v) for k, v in critical.items()},
    )


def describe(series: FloatArray, max_lags: Optional[int] = None) -> SeriesDiagnostics:
    """
    Moments, Jarque-Bera normality test and ADF unit-root test of one series.

    Skewness and excess kurtosis are standardized central moments.
    ``JB = n / 6 * (S**2 + K**2 / 4)`` with K the excess kurtosis.

    Raises:
        DiagnosticsError: If the series has fewer than 20 observations,
            non-finite values or zero variance.
    """
    x = np.asarray(series, dtype=np.float64)
    if x.ndim != 1 or len(x) < MIN_DESCRIBE_LENGTH:
        raise DiagnosticsError(
            f"Need at least {MIN_DESCRIBE_LENGTH} observations, got {x.size}"
        )
    if not np.all(np.isfinite(x)):
        raise DiagnosticsError("Series contains non-finite values")
    if np.ptp(x) == 0.0:
        raise DiagnosticsError("Zero variance: skewness and kurtosis are undefined")

    skewness = float(stats.skew(x, bias=True))
    kurtosis = float(stats.kurtosis(x, fisher=True, bias=True))
    jb = stats.jarque_bera(x)
    adf = adf_test(x, max_lags=max_lags)
    return SeriesDiagnostics(
        mean=float(np.mean(x)),
        sd=float(np.std(x, ddof=1)),
        skewness=skewness,
        excess_kurtosis=kurtosis,
        jb_statistic=float(jb.statistic),
        jb_pvalue=float(jb.pvalue),
        adf_statistic=adf.statistic,
        adf_lags=adf.lags_used,
        adf_reject_1pct=adf.reject_1pct,
        adf_pvalue=adf.pvalue,
        adf_band=adf.band,
        n_obs=len(x),
    )


def diagnostics_table(panel: ReturnPanel) -> pd.DataFrame:
    """
    Diagnostics battery for every series of a panel, one row per series.

    Columns: mean, sd, skewness, kurtosis (excess), jb, jb_p, adf, adf_p,
    adf_p_band.

    Raises:
        DiagnosticsError: Naming the first series for which a statistic is
            undefined.
    """
    rows = {}
    for name, column in zip(panel.series_names, panel.returns.T):
        try:
            d = describe(column)
        except DiagnosticsError as exc:
            raise DiagnosticsError(f"Series '{name}': {exc}") from exc
        rows[name] = {
            "mean": d.mean,
            "sd": d.sd,
            "skewness": d.skewness,
            "kurtosis": d.excess_kurtosis,
            "jb": d.jb_statistic,
            "jb_p": d.jb_pvalue,
            "adf": d.adf_statistic,
            "adf_p": d.adf_pvalue,
            "adf_p_band": d.adf_band,
        }
        logger.debug("Diagnostics for %s: %s", name, rows[name])
    table = pd.DataFrame.from_dict(rows, orient="index")
    table.index.name = "series"
    return table


def select_var_order(panel: ReturnPanel, max_order: int) -> int:
    """
    VAR lag order minimising BIC over ``1 .. max_order``.

    Every candidate is fitted by least squares with a constant on the same
    effective sample (the first ``max_order`` rows are held back).

    Raises:
        DiagnosticsError: If ``max_order`` < 1 or ``T <= N * max_order + 10``.
    """
    if max_order < 1:
        raise DiagnosticsError(f"max_order must be >= 1, got {max_order}")
    n_obs, n_series = panel.returns.shape
    if n_obs <= n_series * max_order + 10:
        raise DiagnosticsError(
            f"Insufficient observations for lag search: T={n_obs}, "
            f"need more than {n_series * max_order + 10}"
        )
    if max_order == 1:
        return 1
    try:
        selection = VAR(np.asarray(panel.returns)).select_order(
            maxlags=max_order, trend="c"
        )
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise DiagnosticsError(f"VAR lag selection failed: {exc}") from exc
    # ics["bic"][p] is the criterion of lag p = 0 .. max_order
    bic = np.asarray(selection.ics["bic"], dtype=np.float64)
    order = int(np.argmin(bic[1:])) + 1
    logger.info("BIC selects VAR(%d) out of 1..%d", order, max_order)
    return order
