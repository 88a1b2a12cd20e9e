"""Pairwise dissimilarities: Euclidean and dynamic time warping."""

from __future__ import annotations

import numpy as np
from numba import njit

from .errors import ArgumentError


def euclidean_matrix(X: np.ndarray) -> np.ndarray:
    """All-pairs L2 distances between the rows of ``X``."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ArgumentError("expected a 2-D matrix")
    diff = X[:, None, :] - X[None, :, :]
    return np.sqrt((diff**2).sum(axis=-1))


@njit(cache=True)
def _dtw(x, y):
    n, m = x.shape[0], y.shape[0]
    prev = np.empty(m + 1)
    cur = np.empty(m + 1)
    for j in range(m + 1):
        prev[j] = np.inf
    prev[0] = 0.0
    for i in range(1, n + 1):
        cur[0] = np.inf
        for j in range(1, m + 1):
            cost = abs(x[i - 1] - y[j - 1])
            best = prev[j - 1]
            if prev[j] < best:
                best = prev[j]
            if cur[j - 1] < best:
                best = cur[j - 1]
            cur[j] = cost + best
        for j in range(m + 1):
            prev[j] = cur[j]
    return prev[m]


def dtw_distance(x, y) -> float:
    """Minimal cumulative |x_i - y_j| cost over the full alignment lattice."""
    x = np.ascontiguousarray(x, dtype=float)
    y = np.ascontiguousarray(y, dtype=float)
    if x.size == 0 or y.size == 0:
        raise ArgumentError("DTW inputs must be non-empty")
    return float(_dtw(x, y))


@njit(cache=True)
def _dtw_matrix(X):
    m = X.shape[0]
    out = np.zeros((m, m))
    for i in range(m):
        for j in range(i + 1, m):
            d = _dtw(X[i], X[j])
            out[i, j] = d
            out[j, i] = d
    return out


def dtw_matrix(X: np.ndarray) -> np.ndarray:
    """All-pairs DTW distances between the rows of ``X``."""
    X = np.ascontiguousarray(X, dtype=float)
    if X.ndim != 2:
        raise ArgumentError("expected a 2-D matrix")
    if X.shape[1] == 0:
        raise ArgumentError("DTW inputs must be non-empty")
    return _dtw_matrix(X)
