"""Equal-weight averaging of reconciled forecasts over the common series."""

from __future__ import annotations

import numpy as np

from .errors import ArgumentError, CoherenceError


def check_coherent(forecasts: np.ndarray, tol: float = 1e-6) -> None:
    """Row 0 must equal the column sums of the remaining rows.

    The tolerance is relative to the magnitude of the top row (floor 1).
    """
    top = forecasts[0]
    gap = np.abs(top - forecasts[1:].sum(axis=0))
    scale = max(1.0, float(np.abs(top).max()))
    if (gap > tol * scale).any():
        raise CoherenceError(f"input is incoherent (max gap {gap.max():.3e})")


def combine(forecasts: list) -> np.ndarray:
    """Elementwise mean of coherent (1+m) x h forecast matrices.

    Inputs carry the top series in row 0 and bottom series below; middle
    levels are excluded since they differ across hierarchies.  The mean of
    coherent inputs is coherent by linearity.
    """
    if len(forecasts) < 1:
        raise ArgumentError("need at least one forecast matrix")
    mats = [np.asarray(f, dtype=float) for f in forecasts]
    shape = mats[0].shape
    if len(shape) != 2 or shape[0] < 3:
        raise ArgumentError("expected (1+m) x h matrices with m >= 2")
    for mat in mats:
        if mat.shape != shape:
            raise ArgumentError("forecast matrices must share one shape")
        check_coherent(mat)
    return np.mean(mats, axis=0)
