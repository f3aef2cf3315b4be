"""
Quantile VAR estimated equation by equation with check-loss regression.

The regression solver runs iteratively reweighted least squares on an
epsilon-smoothed check loss, snaps the result to the nearest LP vertex (the
``k`` observations it interpolates) and accepts it only when the vertex passes
the LP optimality certificate. Otherwise it falls back to the HiGHS simplex
solver from scipy.
"""

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterator, NamedTuple, Optional

import numpy as np
import pandas as pd
from scipy import sparse
from scipy.optimize import linprog

from spillkit.core.exceptions import (
    ConvergenceError,
    EstimationError,
    SingularSystemError,
    ValidationError,
)
from spillkit.core.linalg import repair_psd, var_design
from spillkit.core.types import FilePath, FloatArray, FloatMatrix, QuantileMethod
from spillkit.panel.dataset import ReturnPanel

logger = logging.getLogger(__name__)

IRLS_EPSILON = 1e-6
IRLS_EPSILON_FLOOR = 1e-12
IRLS_SHRINK = 0.1
IRLS_MAX_ITER = 200
IRLS_TOL = 1e-10
CERTIFICATE_TOL = 1e-9


class QuantileSolution(NamedTuple):
    """Check-loss minimizer and how it was obtained."""

    coef: FloatArray
    objective: float
    path: str
    iterations: int


def check_loss(residuals: FloatArray, tau: float) -> float:
    """
    Sum of ``rho_tau(u) = u * (tau - 1{u < 0})`` over residuals.

    Example:
        >>> check_loss(np.array([1.0, -2.0]), 0.25)
        1.75
    """
    r = np.asarray(residuals, dtype=np.float64)
    return float(np.sum(r * (tau - (r < 0))))


def _validate_design(y: FloatArray, X: FloatMatrix, tau: float) -> None:
    if not 0.0 < tau < 1.0:
        raise ValidationError(f"Quantile level must lie in (0, 1), got {tau}")
    if y.ndim != 1 or X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ValidationError(
            f"Shapes y{y.shape} and X{X.shape} are not a regression design"
        )
    if X.shape[0] <= X.shape[1]:
        raise ValidationError(
            f"Need more rows than columns, got {X.shape[0]} x {X.shape[1]}"
        )
    if not (np.all(np.isfinite(y)) and np.all(np.isfinite(X))):
        raise ValidationError("Regression inputs contain non-finite values")
    if np.linalg.matrix_rank(X) < X.shape[1]:
        raise SingularSystemError("Design matrix is rank deficient")


def _certified(
    y: FloatArray, X: FloatMatrix, tau: float, basis: np.ndarray, coef: FloatArray
) -> bool:
    """
    LP optimality certificate for the vertex interpolating ``basis``.

    The vertex is optimal iff the basis multipliers ``u`` solving
    ``X_h' u = -sum_{i not in h} psi_i x_i`` lie in ``[tau - 1, tau]``, with
    ``psi_i = tau - 1{r_i < 0}``. A zero objective is optimal outright.
    """
    r = y - X @ coef
    if check_loss(r, tau) <= 1e-14 * (1.0 + np.sum(np.abs(y))):
        return True
    mask = np.ones(len(y), dtype=bool)
    mask[basis] = False
    psi = np.where(r[mask] < 0, tau - 1.0, tau)
    rhs = -(X[mask].T @ psi)
    try:
        u = np.linalg.solve(X[basis].T, rhs)
    except np.linalg.LinAlgError:
        return False
    return bool(
        np.all(u >= tau - 1.0 - CERTIFICATE_TOL) and np.all(u <= tau + CERTIFICATE_TOL)
    )


def _polish(
    y: FloatArray, X: FloatMatrix, tau: float, coef: FloatArray
) -> Optional[FloatArray]:
    """Interpolate the ``k`` observations closest to ``coef``; None unless certified."""
    k = X.shape[1]
    basis = np.sort(np.argsort(np.abs(y - X @ coef), kind="stable")[:k])
    try:
        vertex = np.linalg.solve(X[basis], y[basis])
    except np.linalg.LinAlgError:
        return None
    return vertex if _certified(y, X, tau, basis, vertex) else None


def _irls(y: FloatArray, X: FloatMatrix, tau: float) -> tuple[Optional[FloatArray], int]:
    """
    IRLS with weights ``(tau or 1 - tau) / max(|r|, eps)``.

    ``eps`` starts at 1e-6 and shrinks tenfold each time the iterates settle.
    A polished vertex is tried whenever they settle and every 10 iterations;
    the first certified one is returned.
    """
    coef = np.linalg.lstsq(X, y, rcond=None)[0]
    eps = IRLS_EPSILON
    for iteration in range(1, IRLS_MAX_ITER + 1):
        r = y - X @ coef
        weights = np.where(r >= 0, tau, 1.0 - tau) / np.maximum(np.abs(r), eps)
        root = np.sqrt(weights)
        updated = np.linalg.lstsq(X * root[:, None], y * root, rcond=None)[0]
        settled = np.max(np.abs(updated - coef)) <= IRLS_TOL * (
            1.0 + np.max(np.abs(updated))
        )
        coef = updated
        if settled or iteration % 10 == 0:
            vertex = _polish(y, X, tau, coef)
            if vertex is not None:
                return vertex, iteration
        if settled:
            if eps <= IRLS_EPSILON_FLOOR:
                return None, iteration
            eps *= IRLS_SHRINK
    return None, IRLS_MAX_ITER


def _highs(y: FloatArray, X: FloatMatrix, tau: float) -> FloatArray:
    """Solve ``min tau 1'u+ + (1 - tau) 1'u-  s.t.  X b + u+ - u- = y`` with HiGHS."""
    n, k = X.shape
    identity = sparse.identity(n, format="csr")
    A_eq = sparse.hstack([sparse.csr_matrix(X), identity, -identity], format="csr")
    cost = np.concatenate([np.zeros(k), np.full(n, tau), np.full(n, 1.0 - tau)])
    bounds = [(None, None)] * k + [(0.0, None)] * (2 * n)
    result = linprog(cost, A_eq=A_eq, b_eq=y, bounds=bounds, method="highs")
    if result.status != 0:
        raise ConvergenceError(f"HiGHS failed to solve the quantile LP: {result.message}")
    return np.asarray(result.x[:k], dtype=np.float64)


def solve_quantile_regression(
    y: FloatArray,
    X: FloatMatrix,
    tau: float,
    method: QuantileMethod = "irls",
    fallback: bool = True,
) -> QuantileSolution:
    """
    Minimise ``sum rho_tau(y - X b)`` and report the solver path.

    Args:
        y: (n,) responses.
        X: (n, k) design matrix with n > k and full column rank.
        tau: Quantile level in (0, 1).
        method: ``"irls"`` (IRLS, vertex polish and certificate) or
            ``"highs"`` (LP solver only).
        fallback: Fall back to HiGHS when the IRLS vertex is not certified.

    Returns:
        QuantileSolution with ``path`` one of ``"irls"`` or ``"highs"``.

    Raises:
        ValidationError: If tau or the shapes are invalid.
        SingularSystemError: If X is rank deficient.
        ConvergenceError: If the IRLS vertex is not certified and fallback is
            disabled, or the LP solver fails.
    """
    y = np.asarray(y, dtype=np.float64)
    X = np.asarray(X, dtype=np.float64)
    _validate_design(y, X, tau)

    if method == "highs":
        coef = _highs(y, X, tau)
        return QuantileSolution(coef, check_loss(y - X @ coef, tau), "highs", 0)

    vertex, iterations = _irls(y, X, tau)
    if vertex is not None:
        return QuantileSolution(
            vertex, check_loss(y - X @ vertex, tau), "irls", iterations
        )
    if not fallback:
        raise ConvergenceError(
            f"IRLS stopped after {iterations} iterations without a certified "
            f"LP vertex (tau={tau:g})"
        )
    logger.warning(
        "IRLS vertex not certified after %d iterations (tau=%g); using HiGHS",
        iterations,
        tau,
    )
    coef = _highs(y, X, tau)
    return QuantileSolution(coef, check_loss(y - X @ coef, tau), "highs", iterations)


def quantile_regression(
    y: FloatArray,
    X: FloatMatrix,
    tau: float,
    method: QuantileMethod = "irls",
    fallback: bool = True,
) -> FloatArray:
    """
    Coefficients of the tau-th linear quantile regression of ``y`` on ``X``.

    See :func:`solve_quantile_regression` for arguments and errors.

    Example:
        >>> x = np.arange(1.0, 8.0)
        >>> X = np.column_stack([np.ones(7), x])
        >>> round(float(quantile_regression(2.0 * x, X, 0.3)[1]), 10)
        2.0
    """
    return solve_quantile_regression(y, X, tau, method=method, fallback=fallback).coef


@dataclass(frozen=True, eq=False)
class QuantileVarFit:
    """
    Quantile VAR fitted on one window of a return panel.

    Args:
        tau: Quantile level.
        beta_tau: (N, N * p) lag coefficients.
        sigma_tau: (N, N) PSD-repaired raw second moment of the quantile residuals.
        intercept_tau: (N,) intercepts, excluded from the connectedness math.
        window: Half-open row range ``(start, end)`` of the panel used.
        end_date: Date of row ``end - 1``, the label of the fit.
        series_names: Panel series identifiers.
        solver_paths: Solver path taken for each equation.
        residuals: (n, N) quantile residuals.
    """

    tau: float
    beta_tau: FloatMatrix
    sigma_tau: FloatMatrix
    intercept_tau: FloatArray
    window: tuple[int, int]
    end_date: pd.Timestamp
    series_names: tuple[str, ...] = ()
    solver_paths: tuple[str, ...] = ()
    residuals: Optional[FloatMatrix] = None

    @property
    def beta(self) -> FloatMatrix:
        return self.beta_tau

    @property
    def sigma(self) -> FloatMatrix:
        return self.sigma_tau

    @property
    def date(self) -> pd.Timestamp:
        return self.end_date

    def as_dict(self) -> dict[str, Any]:
        return {
            "tau": self.tau,
            "beta_tau": self.beta_tau.tolist(),
            "sigma_tau": self.sigma_tau.tolist(),
            "intercept_tau": self.intercept_tau.tolist(),
            "window": list(self.window),
            "end_date": self.end_date.strftime("%Y-%m-%d"),
            "series_names": list(self.series_names),
            "solver_paths": list(self.solver_paths),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "QuantileVarFit":
        return cls(
            tau=float(data["tau"]),
            beta_tau=np.asarray(data["beta_tau"], dtype=np.float64),
            sigma_tau=np.asarray(data["sigma_tau"], dtype=np.float64),
            intercept_tau=np.asarray(data["intercept_tau"], dtype=np.float64),
            window=(int(data["window"][0]), int(data["window"][1])),
            end_date=pd.Timestamp(data["end_date"]),
            series_names=tuple(data.get("series_names", ())),
            solver_paths=tuple(data.get("solver_paths", ())),
        )


def fit_quantile_var(
    panel: ReturnPanel,
    tau: float,
    window: Optional[tuple[int, int]] = None,
    lags: int = 1,
    method: QuantileMethod = "irls",
    fallback: bool = True,
) -> QuantileVarFit:
    """
    Quantile VAR(p) with intercept on rows ``window = (start, end)``.

    Each equation regresses ``Y_t[i]`` on a constant and all series at lags
    ``1 .. p``; regressands are rows ``start + p .. end - 1``.

    Raises:
        ValidationError: If the window is out of range or not longer than
            ``2 N + 10`` rows.
        EstimationError: From the quantile solver, naming the equation.
    """
    n_obs, n_series = panel.returns.shape
    start, end = window if window is not None else (0, n_obs)
    if not 0 <= start < end <= n_obs:
        raise ValidationError(f"Window ({start}, {end}) is outside 0..{n_obs}")
    if end - start <= 2 * n_series + 10:
        raise ValidationError(
            f"Window of {end - start} rows is too short for {n_series} series; "
            f"need more than {2 * n_series + 10}"
        )
    Y, Z = var_design(np.asarray(panel.returns), lags, start, end, intercept=True)
    coefs = np.empty((Z.shape[1], n_series))
    paths = []
    for i, name in enumerate(panel.series_names):
        try:
            solution = solve_quantile_regression(
                Y[:, i], Z, tau, method=method, fallback=fallback
            )
        except EstimationError as exc:
            raise type(exc)(f"Equation '{name}' at tau={tau:g}: {exc}") from exc
        coefs[:, i] = solution.coef
        paths.append(solution.path)
    residuals = Y - Z @ coefs
    # Uncentred; tail residuals sit away from zero.
    sigma = repair_psd(residuals.T @ residuals / len(residuals))
    return QuantileVarFit(
        tau=float(tau),
        beta_tau=coefs[1:].T.copy(),
        sigma_tau=sigma,
        intercept_tau=coefs[0].copy(),
        window=(start, end),
        end_date=panel.dates[end - 1],
        series_names=panel.series_names,
        solver_paths=tuple(paths),
        residuals=residuals,
    )


@dataclass(frozen=True, eq=False)
class RollingQuantileVar:
    """
    Rolling-window quantile VAR fits in window order.

    Behaves as a sequence of :class:`QuantileVarFit`. ``failed_dates`` lists
    the end dates of windows skipped because estimation failed.
    """

    fits: tuple[QuantileVarFit, ...]
    tau: float
    window_len: int
    step: int
    failed_dates: tuple[pd.Timestamp, ...] = field(default_factory=tuple)

    def __len__(self) -> int:
        return len(self.fits)

    def __iter__(self) -> Iterator[QuantileVarFit]:
        return iter(self.fits)

    def __getitem__(self, index: int) -> QuantileVarFit:
        return self.fits[index]

    @property
    def dates(self) -> pd.DatetimeIndex:
        return pd.DatetimeIndex([fit.end_date for fit in self.fits])


def rolling_windows(n_obs: int, window_len: int, step: int) -> list[tuple[int, int]]:
    """
    Half-open windows ``[start, start + window_len)`` advancing by ``step``.

    Example:
        >>> rolling_windows(10, 4, 3)
        [(0, 4), (3, 7), (6, 10)]
    """
    if window_len < 1 or step < 1:
        raise ValidationError("window_len and step must be >= 1")
    if window_len > n_obs:
        raise ValidationError(
            f"Window length {window_len} exceeds the {n_obs} available rows"
        )
    count = (n_obs - window_len) // step + 1
    return [(s * step, s * step + window_len) for s in range(count)]


def rolling_quantile_var(
    panel: ReturnPanel,
    tau: float,
    window_len: int = 200,
    step: int = 1,
    lags: int = 1,
    workers: int = 1,
    skip_failures: bool = False,
    method: QuantileMethod = "irls",
) -> RollingQuantileVar:
    """
    Fit the quantile VAR on rolling windows, each labelled by its end date.

    Windows are independent and run on ``workers`` threads; results keep
    window order.

    Args:
        panel: Return panel.
        tau: Quantile level.
        window_len: Rows per window.
        step: Rows between window starts.
        lags: VAR lag order.
        workers: Thread count.
        skip_failures: Log and skip windows whose fit fails instead of raising.
        method: Quantile solver, see :func:`solve_quantile_regression`.

    Raises:
        ValidationError: If ``window_len`` exceeds the panel length.
        EstimationError: From a failing window, naming its end date, unless
            ``skip_failures`` is set.
    """
    windows = rolling_windows(panel.n_obs, window_len, step)
    logger.info(
        "Rolling quantile VAR tau=%g: %d windows of %d rows", tau, len(windows), window_len
    )

    def fit_one(window: tuple[int, int]) -> Optional[QuantileVarFit]:
        try:
            return fit_quantile_var(panel, tau, window=window, lags=lags, method=method)
        except (EstimationError, ValidationError) as exc:
            date = panel.dates[window[1] - 1]
            if not skip_failures:
                raise type(exc)(f"Window ending {date:%Y-%m-%d}: {exc}") from exc
            logger.warning("Skipping window ending %s: %s", f"{date:%Y-%m-%d}", exc)
            return None

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(fit_one, windows))
    else:
        results = [fit_one(w) for w in windows]

    fits = tuple(fit for fit in results if fit is not None)
    failed = tuple(
        panel.dates[w[1] - 1] for w, fit in zip(windows, results) if fit is None
    )
    return RollingQuantileVar(fits, float(tau), window_len, step, failed)


def save_quantile_fits(fits: list[QuantileVarFit], path: FilePath) -> Path:
    """Write quantile VAR fits with their tau and window metadata as JSON."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {"kind": "quantile_var_fits", "fits": [fit.as_dict() for fit in fits]}
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f)
    return path


def load_quantile_fits(path: FilePath) -> list[QuantileVarFit]:
    """Read fits written by :func:`save_quantile_fits` (residuals are not stored)."""
    with open(Path(path), "r", encoding="utf-8") as f:
        payload = json.load(f)
    if payload.get("kind") != "quantile_var_fits":
        raise ValidationError(f"'{path}' is not a quantile VAR checkpoint")
    return [QuantileVarFit.from_dict(d) for d in payload["fits"]]
