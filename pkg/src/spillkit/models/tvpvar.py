"""
Time-varying parameter VAR estimated by a forgetting-factor Kalman filter.

Coefficients follow a random walk whose state noise is implied by inflating
the coefficient covariance with ``1 / kappa1`` at every predict step. The
innovation covariance is an exponentially weighted moving average of one-step
prediction-error outer products with decay ``kappa2``. Coefficients of
equation ``i`` are row ``i`` of ``beta``; the state vector stacks the rows.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterator, Literal, Optional, Sequence

import numpy as np
import pandas as pd

from spillkit.core.exceptions import (
    EstimationError,
    SingularSystemError,
    ValidationError,
)
from spillkit.core.linalg import repair_psd, var_design
from spillkit.core.types import FilePath, FloatMatrix
from spillkit.panel.dataset import ReturnPanel

logger = logging.getLogger(__name__)

LOG_2PI = float(np.log(2.0 * np.pi))
KAPPA_RANGE = (0.9, 1.0)


@dataclass(frozen=True, eq=False)
class PriorSpec:
    """
    Initial state of the Kalman recursion.

    ``training`` fits an OLS VAR on the first ``window`` observations, which
    are then consumed as burn-in. ``fixed`` starts from ``beta0`` (zeros when
    omitted) and ``sigma0`` (identity when omitted) with no burn-in beyond
    ``window`` rows.

    Args:
        kind: ``"training"`` or ``"fixed"``.
        window: Rows consumed before the first reported state.
        beta_cov_scale: Initial coefficient covariance is this times identity.
        beta0: (N, N * p) initial coefficients for ``fixed`` priors.
        sigma0: (N, N) initial innovation covariance for ``fixed`` priors.
    """

    kind: Literal["training", "fixed"] = "training"
    window: int = 200
    beta_cov_scale: float = 10.0
    beta0: Optional[FloatMatrix] = None
    sigma0: Optional[FloatMatrix] = None

    def as_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "window": self.window,
            "beta_cov_scale": self.beta_cov_scale,
            "beta0": None if self.beta0 is None else np.asarray(self.beta0).tolist(),
            "sigma0": None if self.sigma0 is None else np.asarray(self.sigma0).tolist(),
        }


@dataclass(frozen=True, eq=False)
class TvpVarState:
    """
    Filtered VAR state at one date.

    Args:
        t: Row of the return panel the state belongs to.
        date: Date of that row.
        beta: (N, N * p) coefficient matrix.
        beta_cov: (N**2 p, N**2 p) covariance of the row-stacked coefficients,
            or None when not retained.
        sigma: (N, N) innovation covariance.
        loglik_increment: Gaussian log predictive density of the observation.
    """

    t: int
    date: pd.Timestamp
    beta: FloatMatrix
    beta_cov: Optional[FloatMatrix]
    sigma: FloatMatrix
    loglik_increment: float

    @property
    def n_series(self) -> int:
        return self.beta.shape[0]

    @property
    def lags(self) -> int:
        return self.beta.shape[1] // self.beta.shape[0]

    def beta_se(self) -> FloatMatrix:
        """Standard errors of ``beta`` from ``beta_cov``."""
        if self.beta_cov is None:
            raise ValidationError("State does not carry a coefficient covariance")
        return np.sqrt(np.clip(np.diag(self.beta_cov), 0.0, None)).reshape(
            self.beta.shape
        )

    def as_dict(self) -> dict[str, Any]:
        return {
            "t": self.t,
            "date": self.date.strftime("%Y-%m-%d"),
            "beta": self.beta.tolist(),
            "beta_cov": None if self.beta_cov is None else self.beta_cov.tolist(),
            "sigma": self.sigma.tolist(),
            "loglik_increment": self.loglik_increment,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "TvpVarState":
        return cls(
            t=int(data["t"]),
            date=pd.Timestamp(data["date"]),
            beta=np.asarray(data["beta"], dtype=np.float64),
            beta_cov=(
                None
                if data.get("beta_cov") is None
                else np.asarray(data["beta_cov"], dtype=np.float64)
            ),
            sigma=np.asarray(data["sigma"], dtype=np.float64),
            loglik_increment=float(data["loglik_increment"]),
        )


@dataclass(frozen=True, eq=False)
class TvpVarPath:
    """
    Sequence of filtered states, one per return observation after burn-in.

    Args:
        states: States in time order.
        series_names: Panel series identifiers.
        config: Forgetting factors, lag order and prior used for the fit.
    """

    states: tuple[TvpVarState, ...]
    series_names: tuple[str, ...]
    config: dict[str, Any] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.states)

    def __iter__(self) -> Iterator[TvpVarState]:
        return iter(self.states)

    def __getitem__(self, index: int) -> TvpVarState:
        return self.states[index]

    @property
    def dates(self) -> pd.DatetimeIndex:
        return pd.DatetimeIndex([s.date for s in self.states])

    @property
    def betas(self) -> np.ndarray:
        """(T, N, N * p) stacked coefficient matrices."""
        return np.stack([s.beta for s in self.states])

    @property
    def sigmas(self) -> np.ndarray:
        """(T, N, N) stacked innovation covariances."""
        return np.stack([s.sigma for s in self.states])

    @property
    def terminal(self) -> TvpVarState:
        return self.states[-1]

    def save(self, path: FilePath) -> Path:
        """
        Write a JSON checkpoint with the config and every state.

        Floats are written with round-trip precision, so a loaded path
        reproduces downstream results exactly.
        """
        path = Path(path)
        payload = {
            "kind": "tvp_var_path",
            "config": self.config,
            "series_names": list(self.series_names),
            "states": [s.as_dict() for s in self.states],
        }
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(payload, f)
        return path

    @classmethod
    def load(cls, path: FilePath) -> "TvpVarPath":
        """Read a checkpoint written by :meth:`save`."""
        with open(Path(path), "r", encoding="utf-8") as f:
            payload = json.load(f)
        if payload.get("kind") != "tvp_var_path":
            raise ValidationError(f"'{path}' is not a TVP-VAR checkpoint")
        return cls(
            states=tuple(TvpVarState.from_dict(s) for s in payload["states"]),
            series_names=tuple(payload["series_names"]),
            config=payload["config"],
        )


def _check_kappa(name: str, value: float) -> None:
    low, high = KAPPA_RANGE
    if not low < value <= high:
        raise ValidationError(f"{name} must lie in ({low}, {high}], got {value}")


def _ols(
    Y: FloatMatrix, Z: FloatMatrix, what: str
) -> tuple[FloatMatrix, FloatMatrix, FloatMatrix]:
    """Equation-by-equation OLS; returns ``(B, residuals, inv(Z'Z))``."""
    n, k = Z.shape
    if n - k <= 0:
        raise SingularSystemError(
            f"{what}: {n} observations leave no residual degrees of freedom "
            f"for {k} regressors"
        )
    if np.linalg.matrix_rank(Z) < k:
        raise SingularSystemError(f"{what}: regressor cross-product is singular")
    try:
        zz_inv = np.linalg.inv(Z.T @ Z)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(
            f"{what}: regressor cross-product is singular"
        ) from exc
    B = zz_inv @ Z.T @ Y
    return B, Y - Z @ B, zz_inv


def _initial_state(
    y: FloatMatrix, lags: int, prior: PriorSpec
) -> tuple[FloatMatrix, FloatMatrix, FloatMatrix, int]:
    n_series = y.shape[1]
    n_state = n_series * n_series * lags
    P0 = prior.beta_cov_scale * np.eye(n_state)
    if prior.kind == "training":
        Y, Z = var_design(y, lags, 0, prior.window)
        B, resid, _ = _ols(Y, Z, "Training-window prior")
        sigma0 = resid.T @ resid / (Z.shape[0] - Z.shape[1])
        return B.T.copy(), P0, repair_psd(sigma0), prior.window
    beta0 = (
        np.zeros((n_series, n_series * lags))
        if prior.beta0 is None
        else np.asarray(prior.beta0, dtype=np.float64)
    )
    sigma0 = (
        np.eye(n_series)
        if prior.sigma0 is None
        else np.asarray(prior.sigma0, dtype=np.float64)
    )
    if beta0.shape != (n_series, n_series * lags) or sigma0.shape != (
        n_series,
        n_series,
    ):
        raise ValidationError("Prior beta0/sigma0 shapes do not match the panel")
    return beta0.copy(), P0, repair_psd(sigma0), max(prior.window, lags)


def fit_tvp_var(
    panel: ReturnPanel,
    kappa1: float = 0.99,
    kappa2: float = 0.96,
    prior: Optional[PriorSpec] = None,
    lags: int = 1,
    keep_beta_cov: bool = False,
) -> TvpVarPath:
    """
    Filter time-varying VAR coefficients and innovation covariances.

    For every row ``t`` after the prior window the recursion runs:

    1. predict: ``P <- P / kappa1`` (coefficients carry over),
    2. prediction error ``e = y_t - beta z_t`` with ``z_t`` the stacked lags,
    3. ``Sigma_t = kappa2 Sigma_{t-1} + (1 - kappa2) e e'``,
    4. ``F = Z P Z' + Sigma_t`` and gain ``K = P Z' F^-1``,
    5. update ``alpha += K e`` and ``P = (I - K Z) P``.

    Covariances are symmetrized and PSD-repaired after each update. State
    ``t`` only uses rows ``0 .. t``.

    Args:
        panel: Return panel.
        kappa1: Coefficient forgetting factor in (0.9, 1].
        kappa2: Covariance decay in (0.9, 1].
        prior: Initial state; defaults to a 200-row training prior.
        lags: VAR lag order p.
        keep_beta_cov: Keep the coefficient covariance on every state. By
            default only the terminal state carries it.

    Returns:
        TvpVarPath with one state per row after the prior window.

    Raises:
        ValidationError: If a forgetting factor is out of range or the panel
            is too short for the prior window.
        SingularSystemError: If the prior regression or a predictive
            covariance is singular.
    """
    _check_kappa("kappa1", kappa1)
    _check_kappa("kappa2", kappa2)
    prior = prior or PriorSpec()
    y = np.asarray(panel.returns, dtype=np.float64)
    n_obs, n_series = y.shape
    if lags < 1:
        raise ValidationError(f"Lag order must be >= 1, got {lags}")
    if n_obs <= n_series + prior.window:
        raise ValidationError(
            f"Panel of {n_obs} rows is too short for a {prior.window}-row prior "
            f"window with {n_series} series"
        )

    beta, P, sigma, start = _initial_state(y, lags, prior)
    alpha = beta.reshape(-1)
    n_state = alpha.size
    eye_n = np.eye(n_series)
    eye_state = np.eye(n_state)
    logger.info(
        "Filtering TVP-VAR(%d): %d series, rows %d..%d, kappa1=%g, kappa2=%g",
        lags,
        n_series,
        start,
        n_obs - 1,
        kappa1,
        kappa2,
    )

    states: list[TvpVarState] = []
    for t in range(start, n_obs):
        z = np.concatenate([y[t - k] for k in range(1, lags + 1)])
        Z = np.kron(eye_n, z.reshape(1, -1))

        P_pred = P / kappa1
        e = y[t] - Z @ alpha
        sigma = repair_psd(kappa2 * sigma + (1.0 - kappa2) * np.outer(e, e))
        F = Z @ P_pred @ Z.T + sigma
        try:
            F_inv_e = np.linalg.solve(F, e)
            gain = np.linalg.solve(F, Z @ P_pred).T
        except np.linalg.LinAlgError as exc:
            raise SingularSystemError(
                f"Predictive covariance is singular at {panel.dates[t]:%Y-%m-%d}"
            ) from exc
        sign, logdet = np.linalg.slogdet(F)
        if sign <= 0 or not np.isfinite(logdet):
            raise SingularSystemError(
                f"Variance collapse at {panel.dates[t]:%Y-%m-%d}: "
                "predictive covariance is not positive definite"
            )
        alpha = alpha + gain @ e
        P = repair_psd((eye_state - gain @ Z) @ P_pred)
        if not np.all(np.isfinite(alpha)):
            raise EstimationError(
                f"Coefficients diverged at {panel.dates[t]:%Y-%m-%d}"
            )

        loglik = -0.5 * (n_series * LOG_2PI + logdet + float(e @ F_inv_e))
        keep = keep_beta_cov or t == n_obs - 1
        states.append(
            TvpVarState(
                t=t,
                date=panel.dates[t],
                beta=alpha.reshape(n_series, n_series * lags).copy(),
                beta_cov=P.copy() if keep else None,
                sigma=sigma.copy(),
                loglik_increment=loglik,
            )
        )

    logger.info("TVP-VAR filter produced %d states", len(states))
    config = {
        "model": "tvp_var",
        "kappa1": kappa1,
        "kappa2": kappa2,
        "lags": lags,
        "prior": prior.as_dict(),
        "keep_beta_cov": keep_beta_cov,
    }
    return TvpVarPath(tuple(states), panel.series_names, config)


def fit_static_var(panel: ReturnPanel, lags: int = 1) -> TvpVarState:
    """
    Constant-coefficient VAR(p) without intercept, fitted by OLS.

    ``sigma`` is the residual covariance with ``n - N p`` degrees of freedom,
    ``beta_cov`` is ``sigma (x) inv(Z'Z)`` for the row-stacked coefficients and
    ``loglik_increment`` holds the full-sample Gaussian log-likelihood.

    Raises:
        SingularSystemError: If the regressors are rank deficient or leave no
            residual degrees of freedom (e.g. ``T = N + 1`` for p = 1).

    Example:
        >>> import numpy as np, pandas as pd
        >>> rng = np.random.default_rng(0)
        >>> panel = ReturnPanel(pd.bdate_range("2020-01-01", periods=50), ("a", "b"),
        ...                     rng.standard_normal((50, 2)))
        >>> fit_static_var(panel).beta.shape
        (2, 2)
    """
    y = np.asarray(panel.returns, dtype=np.float64)
    n_obs, n_series = y.shape
    if n_obs <= lags:
        raise SingularSystemError(
            f"Panel of {n_obs} rows cannot support a VAR({lags})"
        )
    Y, Z = var_design(y, lags)
    B, resid, zz_inv = _ols(Y, Z, "Static VAR")
    n_eff, k = Z.shape
    sigma = repair_psd(resid.T @ resid / (n_eff - k))
    sign, logdet_ml = np.linalg.slogdet(resid.T @ resid / n_eff)
    loglik = (
        -0.5 * n_eff * (n_series * LOG_2PI + logdet_ml + n_series)
        if sign > 0
        else float("-inf")
    )
    logger.info("Static VAR(%d) fitted on %d rows", lags, n_eff)
    return TvpVarState(
        t=n_obs - 1,
        date=panel.dates[-1],
        beta=B.T.copy(),
        beta_cov=np.kron(sigma, zz_inv),
        sigma=sigma,
        loglik_increment=float(loglik),
    )


def states_from_arrays(
    betas: Sequence[FloatMatrix],
    sigmas: Sequence[FloatMatrix],
    dates: Sequence[Any],
    series_names: Sequence[str],
) -> TvpVarPath:
    """Wrap given coefficient and covariance sequences as a path."""
    if not len(betas) == len(sigmas) == len(dates):
        raise ValidationError("betas, sigmas and dates must have equal length")
    states = tuple(
        TvpVarState(
            t=i,
            date=pd.Timestamp(d),
            beta=np.asarray(b, dtype=np.float64),
            beta_cov=None,
            sigma=np.asarray(s, dtype=np.float64),
            loglik_increment=0.0,
        )
        for i, (b, s, d) in enumerate(zip(betas, sigmas, dates))
    )
    return TvpVarPath(states, tuple(series_names), {"model": "given"})
