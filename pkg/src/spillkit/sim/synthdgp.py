"""
Synthetic VAR panels with known spillover structure, and brute-force oracles.

Random numbers come from numpy's ``Generator(Philox)`` seeded through
``SeedSequence``, a counter-based generator whose streams are stable across
platforms and numpy versions.
"""

import logging
from itertools import combinations
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from spillkit.conf.models import DgpSpec
from spillkit.core.exceptions import SimulationError, SingularSystemError, ValidationError
from spillkit.core.linalg import is_psd, spectral_radius
from spillkit.core.types import FloatArray, FloatMatrix
from spillkit.models.qvar import check_loss
from spillkit.panel.dataset import ReturnPanel
from spillkit.spillover.connectedness import FevdMatrix

logger = logging.getLogger(__name__)

MIN_ORACLE_PATHS = 100_000
ORACLE_CHUNK = 50_000
LP_MAX_ROWS = 60
LP_MAX_COLS = 4
SCALE_FLOOR = 0.1


def make_generator(seed: int) -> np.random.Generator:
    """Philox generator for ``seed``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def _psd_factor(sigma: FloatMatrix) -> FloatMatrix:
    """``F`` with ``F @ F.T == sigma``; works for singular PSD matrices."""
    eigval, eigvec = np.linalg.eigh(0.5 * (sigma + sigma.T))
    return eigvec * np.sqrt(np.clip(eigval, 0.0, None))


def _standardized_draws(
    rng: np.random.Generator, shape: tuple[int, ...], innovation: str, df: float
) -> np.ndarray:
    """Unit-variance draws; Student-t rows share one chi-square mixing variable."""
    z = rng.standard_normal(shape)
    if innovation == "student_t":
        mix = rng.chisquare(df, size=shape[:-1]) / df
        z *= np.sqrt((df - 2.0) / df) / np.sqrt(mix)[..., None]
    return z


def simulate(spec: DgpSpec) -> ReturnPanel:
    """
    Simulate ``Y_t = beta_t Y_{t-1} + s_t * eps_t`` from a zero start.

    The first ``spec.warmup`` steps are discarded. Dates are business days
    from ``spec.start_date``.

    Raises:
        SimulationError: If a scheduled coefficient matrix is unstable or a
            covariance is not PSD.

    Example:
        >>> spec = DgpSpec(n_series=2, beta_true=[[0.0, 0.0], [0.0, 0.0]],
        ...                sigma_true=[[1.0, 0.0], [0.0, 1.0]], length=3, seed=7)
        >>> simulate(spec).returns.shape
        (3, 2)
    """
    spec.check_admissible()
    n = spec.n_series
    total = spec.warmup + spec.length
    rng = make_generator(spec.seed)
    draws = _standardized_draws(rng, (total, n), spec.innovation, spec.df)
    loadings = (
        np.asarray(spec.scale_loadings, dtype=np.float64)
        if spec.scale_loadings is not None
        else None
    )

    factors: dict[int, FloatMatrix] = {}
    y = np.zeros(n)
    out = np.empty((spec.length, n))
    for step in range(total):
        t = step - spec.warmup
        key = _schedule_key(spec, t)
        if key not in factors:
            factors[key] = _psd_factor(spec.sigma_at(t))
        shock = factors[key] @ draws[step]
        if loadings is not None:
            shock *= np.maximum(1.0 + loadings @ y, SCALE_FLOOR)
        y = spec.beta_at(t) @ y + shock
        if not np.all(np.isfinite(y)):
            raise SimulationError(f"Simulated path diverged at step {t}")
        if t >= 0:
            out[t] = y

    dates = pd.bdate_range(start=spec.start_date, periods=spec.length)
    logger.info(
        "Simulated %d x %d %s panel (seed %d)", spec.length, n, spec.innovation, spec.seed
    )
    return ReturnPanel(
        dates,
        tuple(spec.names()),
        out,
        {"source": "simulate", "seed": spec.seed, "innovation": spec.innovation},
    )


def _schedule_key(spec: DgpSpec, t: int) -> int:
    """Index of the covariance breakpoint in force at ``t`` (0 = ``sigma_true``)."""
    key = 0
    for k, bp in enumerate(sorted(spec.sigma_schedule, key=lambda s: s.start), start=1):
        if t >= bp.start:
            key = k
    return key


def oracle_gfevd_mc(
    beta: FloatMatrix,
    sigma: FloatMatrix,
    horizon: int,
    n_paths: int = MIN_ORACLE_PATHS,
    seed: int = 0,
    sum_from: int = 0,
    labels: Optional[Sequence[str]] = None,
) -> FevdMatrix:
    """
    Generalized FEVD estimated from simulated impulse responses.

    The generalized impulse response to a shock of size ``sqrt(sigma_jj)`` in
    variable ``j`` is estimated as the difference between the mean of
    shocked and baseline paths. Each shocked path reuses its baseline's
    innovations, with the impact innovation replaced by its Gaussian
    conditional draw given ``e_j = sqrt(sigma_jj)``. Squared responses are
    summed over horizons and row-normalised as in the closed form.

    Paths are simulated in chunks, each from its own ``SeedSequence`` child,
    and reduced in chunk order.

    Raises:
        ValidationError: If ``n_paths`` is below 100,000 or shapes disagree.
        SimulationError: If ``beta`` is unstable or ``sigma`` is not PSD with a
            positive diagonal.
    """
    beta = np.asarray(beta, dtype=np.float64)
    sigma = np.asarray(sigma, dtype=np.float64)
    n = beta.shape[0]
    if beta.shape != (n, n) or sigma.shape != (n, n):
        raise ValidationError("The oracle takes N x N VAR(1) coefficients and covariance")
    if n_paths < MIN_ORACLE_PATHS:
        raise ValidationError(f"n_paths must be >= {MIN_ORACLE_PATHS}, got {n_paths}")
    if sum_from not in (0, 1) or horizon <= sum_from:
        raise ValidationError(f"Invalid horizon {horizon} / sum_from {sum_from}")
    if spectral_radius(beta) >= 1.0:
        raise SimulationError("Unstable coefficient matrix")
    diag = np.diag(sigma)
    if not is_psd(sigma) or np.any(diag <= 0.0):
        raise SimulationError("Innovation covariance must be PSD with a positive diagonal")

    factor = _psd_factor(sigma)
    delta = np.sqrt(diag)
    sizes = [ORACLE_CHUNK] * (n_paths // ORACLE_CHUNK)
    if n_paths % ORACLE_CHUNK:
        sizes.append(n_paths % ORACLE_CHUNK)
    children = np.random.SeedSequence(seed).spawn(len(sizes))

    # diff_sum[h, i, j]: summed response of variable i at horizon h to shock j
    diff_sum = np.zeros((horizon, n, n))
    for size, child in zip(sizes, children):
        rng = np.random.Generator(np.random.Philox(child))
        shocks = rng.standard_normal((horizon, size, n)) @ factor.T
        baseline = np.empty((horizon, size, n))
        baseline[0] = shocks[0]
        for h in range(1, horizon):
            baseline[h] = baseline[h - 1] @ beta.T + shocks[h]
        for j in range(n):
            impact = shocks[0] + np.outer(delta[j] - shocks[0][:, j], sigma[:, j] / diag[j])
            shocked = impact
            diff_sum[0, :, j] += (shocked - baseline[0]).sum(axis=0)
            for h in range(1, horizon):
                shocked = shocked @ beta.T + shocks[h]
                diff_sum[h, :, j] += (shocked - baseline[h]).sum(axis=0)

    psi = diff_sum / n_paths
    numerator = np.sum(psi[sum_from:] ** 2, axis=0)
    shares = numerator / numerator.sum(axis=1, keepdims=True)
    labels = tuple(labels) if labels is not None else tuple(f"y{i + 1}" for i in range(n))
    logger.debug("Monte Carlo GFEVD from %d paths in %d chunks", n_paths, len(sizes))
    return FevdMatrix(shares, horizon, labels)


def oracle_quantile_lp(y: FloatArray, X: FloatMatrix, tau: float) -> FloatArray:
    """
    Exact check-loss minimizer by enumerating basic solutions.

    Every optimal LP vertex interpolates ``k`` observations, so the minimum
    over all ``k``-subsets of rows with a nonsingular design is the global
    minimum. Ties keep the first subset in lexicographic order.

    Raises:
        ValidationError: If the instance exceeds 60 rows or 4 columns.
        SingularSystemError: If no ``k``-subset of rows is nonsingular.

    Example:
        >>> oracle_quantile_lp(np.array([3.0, 1.0, 2.0]), np.ones((3, 1)), 0.5).tolist()
        [2.0]
    """
    y = np.asarray(y, dtype=np.float64)
    X = np.asarray(X, dtype=np.float64)
    rows, cols = X.shape
    if not 0.0 < tau < 1.0:
        raise ValidationError(f"Quantile level must lie in (0, 1), got {tau}")
    if rows > LP_MAX_ROWS or cols > LP_MAX_COLS or y.shape != (rows,):
        raise ValidationError(
            f"Enumeration oracle takes at most {LP_MAX_ROWS} x {LP_MAX_COLS} designs"
        )

    subsets = np.array(list(combinations(range(rows), cols)), dtype=np.int64)
    scale = max(float(np.abs(X).max()), 1.0) ** cols
    best_coef: Optional[FloatArray] = None
    best_obj = np.inf
    for start in range(0, len(subsets), ORACLE_CHUNK):
        chunk = subsets[start : start + ORACLE_CHUNK]
        A = X[chunk]
        ok = np.abs(np.linalg.det(A)) > 1e-10 * scale
        if not np.any(ok):
            continue
        coefs = np.linalg.solve(A[ok], y[chunk[ok]][..., None])[..., 0]
        resid = y[None, :] - coefs @ X.T
        objectives = np.sum(resid * (tau - (resid < 0)), axis=1)
        k = int(np.argmin(objectives))
        if best_coef is None or objectives[k] < best_obj - 1e-12 * max(1.0, abs(best_obj)):
            best_obj = float(objectives[k])
            best_coef = coefs[k]
    if best_coef is None:
        raise SingularSystemError("Every basis of the design is singular")
    logger.debug(
        "Enumerated %d bases, objective %.6g", len(subsets), check_loss(y - X @ best_coef, tau)
    )
    return best_coef
