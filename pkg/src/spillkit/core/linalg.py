"""
Numerical helpers shared by the estimators and the connectedness code.

All functions are pure and operate on numpy arrays.
"""

import logging

import numpy as np

from spillkit.core.exceptions import ValidationError
from spillkit.core.types import FloatMatrix

logger = logging.getLogger(__name__)

PSD_RELATIVE_FLOOR = 1e-12


def repair_psd(matrix: FloatMatrix, rel_floor: float = PSD_RELATIVE_FLOOR) -> FloatMatrix:
    """
    Symmetrize a covariance matrix and clip eigenvalues below ``rel_floor * trace``.

    The eigen-decomposition is only rebuilt when an eigenvalue actually falls
    below the floor, so an already well-conditioned matrix is returned as its
    symmetric part unchanged.

    Args:
        matrix: Square matrix.
        rel_floor: Floor on eigenvalues relative to the trace.

    Returns:
        Symmetric positive semi-definite matrix.

    Example:
        >>> import numpy as np
        >>> repair_psd(np.array([[1.0, 2.0], [0.0, 1.0]])).round(6).tolist()
        [[1.0, 1.0], [1.0, 1.0]]
    """
    sym = 0.5 * (matrix + matrix.T)
    trace = float(np.trace(sym))
    floor = rel_floor * max(trace, 0.0)
    eigval, eigvec = np.linalg.eigh(sym)
    if eigval[0] >= floor:
        return sym
    if eigval[0] < -1e-8 * max(abs(trace), 1.0):
        logger.debug("Clipping negative eigenvalue %.3e during PSD repair", eigval[0])
    clipped = np.maximum(eigval, floor)
    repaired = (eigvec * clipped) @ eigvec.T
    return 0.5 * (repaired + repaired.T)


def is_psd(matrix: FloatMatrix, rel_tol: float = 1e-10) -> bool:
    """Return True if ``matrix`` is symmetric with min eigenvalue >= -rel_tol * trace."""
    if not np.allclose(matrix, matrix.T, atol=1e-12 * max(1.0, np.abs(matrix).max())):
        return False
    eigval = np.linalg.eigvalsh(0.5 * (matrix + matrix.T))
    return bool(eigval[0] >= -rel_tol * max(abs(float(np.trace(matrix))), 1e-300))


def var_design(
    y: FloatMatrix,
    lags: int,
    start: int = 0,
    end: int | None = None,
    intercept: bool = False,
) -> tuple[FloatMatrix, FloatMatrix]:
    """
    Build the regressand and lagged-regressor matrices of a VAR(p).

    Rows ``start + lags .. end - 1`` of ``y`` become regressands; each regressor
    row is ``[1?, y[t-1], ..., y[t-p]]``.

    Args:
        y: (T, N) data matrix.
        lags: Lag order p >= 1.
        start: First row of the sample window.
        end: One past the last row of the window (defaults to T).
        intercept: Prepend a column of ones.

    Returns:
        Tuple ``(Y, Z)`` of shapes (n, N) and (n, [1 +] N * p).
    """
    if lags < 1:
        raise ValidationError(f"Lag order must be >= 1, got {lags}")
    end = y.shape[0] if end is None else end
    n_rows = end - start - lags
    if n_rows <= 0:
        raise ValidationError(
            f"Window [{start}, {end}) is too short for a VAR({lags})"
        )
    Y = y[start + lags : end]
    blocks = [y[start + lags - k : end - k] for k in range(1, lags + 1)]
    if intercept:
        blocks.insert(0, np.ones((n_rows, 1)))
    Z = np.hstack(blocks)
    return Y, Z


def companion(beta: FloatMatrix) -> FloatMatrix:
    """
    Companion matrix of a VAR with coefficient block ``beta`` of shape (N, N*p).

    For p = 1 this is ``beta`` itself.
    """
    n, k = beta.shape
    if k % n:
        raise ValidationError(f"Coefficient matrix shape {beta.shape} is not (N, N*p)")
    lags = k // n
    if lags == 1:
        return beta
    comp = np.zeros((k, k))
    comp[:n, :] = beta
    comp[n:, :-n] = np.eye(n * (lags - 1))
    return comp


def spectral_radius(beta: FloatMatrix) -> float:
    """Largest eigenvalue modulus of the companion matrix of ``beta``."""
    return float(np.max(np.abs(np.linalg.eigvals(companion(beta)))))
