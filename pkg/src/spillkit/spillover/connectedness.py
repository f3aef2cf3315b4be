"""
Generalized forecast error variance decompositions and spillover indices.

Given a VAR coefficient block and an innovation covariance, :func:`gfevd`
builds the generalized impulse responses
``psi_j(h) = A_h Sigma e_j / sqrt(Sigma_jj)`` and row-normalizes their squared
sums into variance shares. :func:`summarize` turns shares into the total,
directional, net and net-pairwise spillover indices, in percent.
"""

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence, Union

import numpy as np
import pandas as pd

from spillkit.core.exceptions import ConnectednessError, SpillkitError, ValidationError
from spillkit.core.linalg import companion
from spillkit.core.types import FilePath, FloatMatrix, IntArray
from spillkit.models.qvar import QuantileVarFit, RollingQuantileVar
from spillkit.models.tvpvar import TvpVarPath

logger = logging.getLogger(__name__)

ROW_SUM_TOL = 1e-10

PathLike = Union[TvpVarPath, RollingQuantileVar, Sequence[QuantileVarFit]]


@dataclass(frozen=True, eq=False)
class FevdMatrix:
    """
    Row-normalized variance shares at one time point.

    ``shares[i, j]`` is the share of series i's H-step forecast error variance
    due to shocks in series j. Rows sum to one.
    """

    shares: FloatMatrix
    horizon: int
    labels: tuple[str, ...]
    date: Optional[pd.Timestamp] = None

    def __post_init__(self) -> None:
        shares = np.asarray(self.shares, dtype=np.float64)
        object.__setattr__(self, "shares", shares)
        object.__setattr__(self, "labels", tuple(self.labels))
        n = len(self.labels)
        if shares.shape != (n, n):
            raise ValidationError(
                f"Share matrix shape {shares.shape} does not match {n} labels"
            )
        if np.any(shares < -ROW_SUM_TOL) or np.any(shares > 1.0 + ROW_SUM_TOL):
            raise ValidationError("Variance shares must lie in [0, 1]")
        if np.any(np.abs(shares.sum(axis=1) - 1.0) > ROW_SUM_TOL):
            raise ValidationError("Variance share rows must sum to 1")

    @property
    def n_series(self) -> int:
        return len(self.labels)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.shares, index=self.labels, columns=self.labels)

    def as_dict(self) -> dict[str, Any]:
        return {
            "date": None if self.date is None else self.date.strftime("%Y-%m-%d"),
            "horizon": self.horizon,
            "labels": list(self.labels),
            "shares": self.shares.tolist(),
        }


@dataclass(frozen=True, eq=False)
class SpilloverSummary:
    """
    Spillover indices derived from one :class:`FevdMatrix`, in percent.

    ``from_`` is exported as ``from``. ``npdc[i, j] = 100 * (shares[j, i] -
    shares[i, j])`` is the net spillover from i to j; ``dom[i]`` counts the j
    with ``npdc[i, j] > 0``.
    """

    tci: float
    to: np.ndarray
    from_: np.ndarray
    net: np.ndarray
    npdc: FloatMatrix
    dom: IntArray
    labels: tuple[str, ...]
    date: Optional[pd.Timestamp] = None

    @property
    def n_series(self) -> int:
        return len(self.labels)

    def as_dict(self) -> dict[str, Any]:
        return {
            "tci": self.tci,
            "to": self.to.tolist(),
            "from": self.from_.tolist(),
            "net": self.net.tolist(),
            "npdc": self.npdc.tolist(),
            "dom": self.dom.tolist(),
            "labels": list(self.labels),
        }


def vma_coefficients(beta: FloatMatrix, horizon: int) -> np.ndarray:
    """
    Moving-average coefficients ``A_0 .. A_{H-1}`` of a VAR.

    ``A_0 = I`` and ``A_h = beta A_{h-1}`` for a VAR(1); a VAR(p) goes through
    its companion matrix.

    Returns:
        (H, N, N) array.

    Example:
        >>> vma_coefficients(np.diag([0.5, 0.5]), 3)[2].tolist()
        [[0.25, 0.0], [0.0, 0.25]]
    """
    if horizon < 1:
        raise ValidationError(f"Horizon must be >= 1, got {horizon}")
    beta = np.asarray(beta, dtype=np.float64)
    n = beta.shape[0]
    comp = companion(beta)
    out = np.empty((horizon, n, n))
    power = np.eye(comp.shape[0])
    for h in range(horizon):
        out[h] = power[:n, :n]
        power = comp @ power
    return out


def gfevd(
    beta: FloatMatrix,
    sigma: FloatMatrix,
    horizon: int,
    sum_from: int = 0,
    labels: Optional[Sequence[str]] = None,
    date: Optional[pd.Timestamp] = None,
) -> FevdMatrix:
    """
    Generalized forecast error variance decomposition.

    The unnormalized share of (i, j) is
    ``sum_{h=sum_from}^{H-1} ([A_h Sigma e_j]_i)**2 / Sigma_jj``; each row is
    then divided by its sum. The result does not depend on variable ordering.

    Args:
        beta: (N, N * p) VAR coefficients.
        sigma: (N, N) innovation covariance with a positive diagonal.
        horizon: Forecast horizon H >= 1.
        sum_from: First horizon term, 0 (impact period) or 1.
        labels: Series names; defaults to ``y1 .. yN``.
        date: Time point, carried into errors and the result.

    Raises:
        ConnectednessError: If a shock variance is not positive, inputs are
            not finite or a forecast error variance is zero.

    Example:
        >>> s = gfevd(np.zeros((2, 2)), np.array([[1.0, 0.8], [0.8, 1.0]]), 1)
        >>> round(float(s.shares[0, 1]), 6)
        0.390244
    """
    beta = np.asarray(beta, dtype=np.float64)
    sigma = np.asarray(sigma, dtype=np.float64)
    n = beta.shape[0]
    if sum_from not in (0, 1):
        raise ValidationError(f"sum_from must be 0 or 1, got {sum_from}")
    if horizon <= sum_from:
        raise ValidationError(
            f"Horizon {horizon} leaves no terms when summing from {sum_from}"
        )
    if sigma.shape != (n, n):
        raise ConnectednessError(
            f"Covariance shape {sigma.shape} does not match {n} series", date=date
        )
    if not (np.all(np.isfinite(beta)) and np.all(np.isfinite(sigma))):
        raise ConnectednessError("Non-finite coefficients or covariance", date=date)
    diag = np.diag(sigma)
    if np.any(diag <= 0.0):
        bad = int(np.flatnonzero(diag <= 0.0)[0])
        raise ConnectednessError(
            f"Shock variance of series {bad} is not positive", date=date
        )
    labels = tuple(labels) if labels is not None else tuple(f"y{i + 1}" for i in range(n))

    A = vma_coefficients(beta, horizon)[sum_from:]
    psi = (A @ sigma) / np.sqrt(diag)[None, None, :]
    numerator = np.sum(psi**2, axis=0)
    row_sums = numerator.sum(axis=1, keepdims=True)
    if np.any(row_sums <= 0.0) or not np.all(np.isfinite(row_sums)):
        raise ConnectednessError("Forecast error variance is zero", date=date)
    return FevdMatrix(numerator / row_sums, horizon, labels, date)


def summarize(fevd: FevdMatrix) -> SpilloverSummary:
    """
    Total, directional, net, net-pairwise and dominance indices.

    ``tci = 100 * offdiag_sum / N``, ``from[i]`` is row i's off-diagonal sum,
    ``to[i]`` column i's, ``net = to - from``, ``npdc = 100 * (S' - S)`` and
    ``dom[i] = #{j : npdc[i, j] > 0}``.

    Example:
        >>> s = summarize(FevdMatrix(np.full((2, 2), 0.5), 5, ("a", "b")))
        >>> s.tci, s.net.tolist(), s.dom.tolist()
        (50.0, [0.0, 0.0], [0, 0])
    """
    shares = fevd.shares
    n = fevd.n_series
    off = shares - np.diag(np.diag(shares))
    from_ = 100.0 * off.sum(axis=1)
    to = 100.0 * off.sum(axis=0)
    npdc = 100.0 * (shares.T - shares)
    return SpilloverSummary(
        tci=float(100.0 * off.sum() / n),
        to=to,
        from_=from_,
        net=to - from_,
        npdc=npdc,
        dom=np.sum(npdc > 0.0, axis=1).astype(np.int64),
        labels=fevd.labels,
        date=fevd.date,
    )


def average_fevd(fevds: Iterable[FevdMatrix]) -> FevdMatrix:
    """
    Mean of several decompositions with rows re-normalized.

    Raises:
        ValidationError: If no matrix is given or labels and horizons differ.
    """
    fevds = list(fevds)
    if not fevds:
        raise ValidationError("average_fevd needs at least one matrix")
    first = fevds[0]
    for f in fevds[1:]:
        if f.labels != first.labels or f.horizon != first.horizon:
            raise ValidationError("Cannot average decompositions with different labels or horizons")
    mean = np.mean([f.shares for f in fevds], axis=0)
    return FevdMatrix(mean / mean.sum(axis=1, keepdims=True), first.horizon, first.labels)


@dataclass(frozen=True, eq=False)
class DynamicIndexSeries:
    """
    Spillover indices evaluated at every state of a path.

    Arrays are indexed by date first: ``tci`` (T,), ``to``, ``from_``, ``net``
    and ``dom`` (T, N), ``npdc`` (T, N, N). ``fevds`` holds the per-date
    decompositions when requested. ``failed_dates`` lists skipped dates.
    """

    dates: pd.DatetimeIndex
    labels: tuple[str, ...]
    horizon: int
    tci: np.ndarray
    to: np.ndarray
    from_: np.ndarray
    net: np.ndarray
    npdc: np.ndarray
    dom: np.ndarray
    fevds: Optional[tuple[FevdMatrix, ...]] = None
    failed_dates: tuple[pd.Timestamp, ...] = ()

    def __len__(self) -> int:
        return len(self.dates)

    def summary_at(self, index: int) -> SpilloverSummary:
        """Summary of the ``index``-th date."""
        return SpilloverSummary(
            tci=float(self.tci[index]),
            to=self.to[index],
            from_=self.from_[index],
            net=self.net[index],
            npdc=self.npdc[index],
            dom=self.dom[index],
            labels=self.labels,
            date=self.dates[index],
        )

    def position(self, date: Any) -> int:
        """Row of ``date``; raises ValidationError when absent."""
        stamp = pd.Timestamp(date)
        matches = np.flatnonzero(self.dates == stamp)
        if not len(matches):
            raise ValidationError(f"No dynamic index at {stamp:%Y-%m-%d}")
        return int(matches[0])

    def tci_series(self) -> pd.Series:
        return pd.Series(self.tci, index=self.dates, name="tci")

    def as_dict(self) -> dict[str, Any]:
        return {
            "dates": [d.strftime("%Y-%m-%d") for d in self.dates],
            "labels": list(self.labels),
            "horizon": self.horizon,
            "tci": self.tci.tolist(),
            "to": self.to.tolist(),
            "from": self.from_.tolist(),
            "net": self.net.tolist(),
            "failed_dates": [d.strftime("%Y-%m-%d") for d in self.failed_dates],
        }


def _states(source: PathLike) -> tuple[list[Any], tuple[str, ...]]:
    states = list(source)
    if not states:
        raise ValidationError("Cannot compute dynamic indices of an empty path")
    labels = getattr(source, "series_names", None)
    if not labels:
        labels = getattr(states[0], "series_names", None)
    if not labels:
        labels = tuple(f"y{i + 1}" for i in range(states[0].beta.shape[0]))
    return states, tuple(labels)


def dynamic_indices(
    source: PathLike,
    horizon: int,
    sum_from: int = 0,
    keep_fevd: bool = False,
    skip_failures: bool = False,
    workers: int = 1,
) -> DynamicIndexSeries:
    """
    Evaluate :func:`gfevd` and :func:`summarize` at every state or window.

    Time points are independent and may run on ``workers`` threads; output
    keeps the input order.

    Args:
        source: A TVP-VAR path or a sequence of quantile VAR fits.
        horizon: Forecast horizon H.
        sum_from: First horizon term, 0 or 1.
        keep_fevd: Keep the per-date decompositions.
        skip_failures: Log and skip failing dates instead of raising.
        workers: Thread count.

    Raises:
        ValidationError: If the path is empty.
        ConnectednessError: Naming the failing date, unless ``skip_failures``
            is set; also when every date fails.
    """
    states, labels = _states(source)

    def evaluate(state: Any) -> Optional[FevdMatrix]:
        try:
            return gfevd(
                state.beta, state.sigma, horizon, sum_from, labels, date=state.date
            )
        except ConnectednessError:
            if not skip_failures:
                raise
        except SpillkitError as exc:
            if not skip_failures:
                raise ConnectednessError(str(exc), date=state.date) from exc
        logger.warning("Skipping dynamic indices at %s", f"{state.date:%Y-%m-%d}")
        return None

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            fevds = list(pool.map(evaluate, states))
    else:
        fevds = [evaluate(s) for s in states]

    kept = [f for f in fevds if f is not None]
    failed = tuple(s.date for s, f in zip(states, fevds) if f is None)
    if not kept:
        raise ConnectednessError("Dynamic indices failed at every date")
    summaries = [summarize(f) for f in kept]
    logger.info(
        "Dynamic indices at %d dates (H=%d, %d skipped)", len(kept), horizon, len(failed)
    )
    return DynamicIndexSeries(
        dates=pd.DatetimeIndex([f.date for f in kept]),
        labels=labels,
        horizon=horizon,
        tci=np.array([s.tci for s in summaries]),
        to=np.stack([s.to for s in summaries]),
        from_=np.stack([s.from_ for s in summaries]),
        net=np.stack([s.net for s in summaries]),
        npdc=np.stack([s.npdc for s in summaries]),
        dom=np.stack([s.dom for s in summaries]),
        fevds=tuple(kept) if keep_fevd else None,
        failed_dates=failed,
    )


def tci_correlation(first: DynamicIndexSeries, second: DynamicIndexSeries) -> float:
    """Pearson correlation of two TCI series over their common dates."""
    return float(first.tci_series().corr(second.tci_series()))


def spillover_table(
    fevd: FevdMatrix, summary: SpilloverSummary, full_precision: bool = False
) -> pd.DataFrame:
    """
    Connectedness table in percent.

    Series rows hold the share matrix and a ``FROM`` column; ``TO``, ``NET``
    and ``DOM`` rows follow, and the ``FROM`` cell of the ``TO`` row holds the
    TCI. Values are rounded to one decimal unless ``full_precision``.
    """
    labels = list(fevd.labels)
    columns = labels + ["FROM"]
    body = pd.DataFrame(100.0 * fevd.shares, index=labels, columns=labels)
    body["FROM"] = summary.from_
    extra = pd.DataFrame(
        [
            list(summary.to) + [summary.tci],
            list(summary.net) + [np.nan],
            list(summary.dom.astype(np.float64)) + [np.nan],
        ],
        index=["TO", "NET", "DOM"],
        columns=columns,
    )
    table = pd.concat([body, extra])
    if not full_precision:
        table = table.round(1)
    table.index.name = "series"
    return table


def write_json(payload: dict[str, Any], path: FilePath) -> Path:
    """Write a JSON artifact with sorted keys for byte-stable output."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")
    return path


def dynamic_to_json(series: DynamicIndexSeries, path: FilePath) -> Path:
    """Write ``{dates, labels, horizon, tci, to, from, net}`` as JSON."""
    return write_json(series.as_dict(), path)


def fevd_dump_to_json(series: DynamicIndexSeries, path: FilePath) -> Path:
    """Write the per-date decompositions kept by :func:`dynamic_indices`."""
    if series.fevds is None:
        raise ValidationError("Series was computed without keep_fevd=True")
    payload = {
        "horizon": series.horizon,
        "labels": list(series.labels),
        "dates": [f.date.strftime("%Y-%m-%d") for f in series.fevds if f.date is not None],
        "shares": [f.shares.tolist() for f in series.fevds],
    }
    return write_json(payload, path)
