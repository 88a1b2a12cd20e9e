"""Error-covariance estimation and trace-minimisation reconciliation.

Reconciled forecasts are the weighted least-squares projection of the base
forecasts onto the coherent subspace spanned by the summing matrix, with the
weight matrix estimated from in-sample one-step residuals (identity,
diagonal, or diagonal-target shrinkage of the sample covariance).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import ArgumentError, DegenerateSeriesError, NumericalError

METHODS = ("identity", "diagonal", "shrinkage")

# CLI-facing aliases, mirroring the usual reconciliation naming
METHOD_ALIASES = {"mint": "shrinkage", "wls": "diagonal", "ols": "identity"}


def resolve_method(name: str) -> str:
    method = METHOD_ALIASES.get(name, name)
    if method not in METHODS:
        raise ArgumentError(f"unknown covariance method {name!r}")
    return method


@dataclass(frozen=True)
class CovEstimate:
    """Symmetric positive-definite weight matrix with its shrinkage weight."""

    matrix: np.ndarray
    lam: float
    method: str

    def __post_init__(self):
        w = np.asarray(self.matrix, dtype=float)
        object.__setattr__(self, "matrix", w)
        if not np.allclose(w, w.T, atol=1e-12, rtol=0.0):
            raise NumericalError("covariance estimate is not symmetric")
        w.setflags(write=False)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def cholesky(self):
        try:
            return cho_factor(self.matrix, lower=True)
        except np.linalg.LinAlgError as exc:
            raise NumericalError("covariance estimate is not positive definite") from exc


def shrinkage_intensity(residuals: np.ndarray) -> float:
    """Diagonal-target shrinkage weight from the sample correlations.

    lambda = sum_{i!=j} Var(r_ij) / sum_{i!=j} r_ij^2, clipped to [0, 1],
    with the correlation-entry variances estimated from the standardized
    cross products (Schafer-Strimmer style).
    """
    T, n = residuals.shape
    x = residuals - residuals.mean(axis=0)
    sd = x.std(axis=0, ddof=1)
    xs = x / sd
    w = xs[:, :, None] * xs[:, None, :]
    wbar = w.mean(axis=0)
    var_r = T / (T - 1.0) ** 3 * ((w - wbar) ** 2).sum(axis=0)
    r = T / (T - 1.0) * wbar
    off = ~np.eye(n, dtype=bool)
    denom = (r[off] ** 2).sum()
    if denom == 0.0:
        return 1.0
    return float(np.clip(var_r[off].sum() / denom, 0.0, 1.0))


def estimate_w(residuals: np.ndarray, method: str = "shrinkage") -> CovEstimate:
    """Estimate the base-error covariance from a T x n residual matrix."""
    method = resolve_method(method)
    residuals = np.asarray(residuals, dtype=float)
    if residuals.ndim != 2:
        raise ArgumentError("residuals must be a T x n matrix")
    T, n = residuals.shape
    if T < 4:
        raise ArgumentError("need at least 4 residual rows")
    if method == "identity":
        return CovEstimate(np.eye(n), 0.0, method)
    x = residuals - residuals.mean(axis=0)
    variances = x.var(axis=0, ddof=1)
    zero = np.flatnonzero(variances == 0.0)
    if zero.size:
        raise DegenerateSeriesError(f"zero-variance residual columns: {zero.tolist()}")
    if method == "diagonal":
        return CovEstimate(np.diag(variances), 1.0, method)
    lam = shrinkage_intensity(residuals)
    sample = (x.T @ x) / (T - 1.0)
    w = lam * np.diag(variances) + (1.0 - lam) * sample
    w = 0.5 * (w + w.T)
    try:
        cho_factor(w, lower=True)
    except np.linalg.LinAlgError:
        jitter = 1e-10 * np.trace(w) / n
        warnings.warn(
            f"shrinkage covariance numerically singular; adding jitter {jitter:.3e} to the diagonal"
        )
        w = w + jitter * np.eye(n)
        try:
            cho_factor(w, lower=True)
        except np.linalg.LinAlgError as exc:
            raise NumericalError("covariance not positive definite even after jitter") from exc
    return CovEstimate(w, lam, method)


def reconcile(summing: np.ndarray, cov: CovEstimate, yhat: np.ndarray):
    """Project base forecasts onto the coherent subspace.

    ``yhat`` may be an n-vector or an n x h matrix.  Returns ``(ytilde,
    btilde)`` where ``ytilde = summing @ btilde`` exactly.  The normal matrix
    is factorised (never inverted); a singular system raises
    :class:`NumericalError` with a condition estimate.
    """
    summing = np.asarray(summing, dtype=float)
    yhat = np.asarray(yhat, dtype=float)
    n, m = summing.shape
    if cov.n != n:
        raise ArgumentError("covariance size does not match the summing matrix")
    vector_input = yhat.ndim == 1
    yh = yhat[:, None] if vector_input else yhat
    if yh.shape[0] != n:
        raise ArgumentError("forecast rows do not match the summing matrix")
    winv_s = cho_solve(cov.cholesky(), summing)
    normal = summing.T @ winv_s
    normal = 0.5 * (normal + normal.T)
    rhs = winv_s.T @ yh
    try:
        btilde = cho_solve(cho_factor(normal, lower=True), rhs)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"normal matrix is singular (condition estimate {np.linalg.cond(normal):.3e})"
        ) from exc
    ytilde = summing @ btilde
    if vector_input:
        return ytilde[:, 0], btilde[:, 0]
    return ytilde, btilde
