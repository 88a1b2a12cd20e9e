"""Clustering inputs: standardized series, residuals, or feature vectors.

Feature vectors summarise each series by 24 numbers covering location,
autocorrelation (levels and first differences), trend/seasonal strength from
a moving-average decomposition, remainder behaviour, spectral entropy,
block-wise stability and two fitted smoothing-parameter sets.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .baseforecast import _fit_candidate, _heuristic_states
from .errors import DegenerateInputError, DegenerateSeriesError, FeatureError

FEATURE_NAMES = (
    "mean",
    "variance",
    "acf1",
    "acf2",
    "acf_season",
    "acf10_ss",
    "diff_acf1",
    "diff_acf2",
    "diff_acf_season",
    "diff_acf10_ss",
    "strength_trend",
    "strength_seasonal",
    "spikiness",
    "linearity",
    "curvature",
    "remainder_acf1",
    "spectral_entropy",
    "lumpiness",
    "stability",
    "crossing_points",
    "flat_spots",
    "ets_ann_alpha",
    "ets_aan_alpha",
    "ets_aan_beta",
)

KINDS = ("raw", "residual", "raw-features", "residual-features")


@dataclass(frozen=True)
class Representation:
    kind: str
    data: np.ndarray  # one row per bottom series
    feature_names: tuple[str, ...] = ()


@dataclass(frozen=True)
class FeatureVector:
    names: tuple[str, ...]
    values: np.ndarray

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.names, self.values))


def standardize(x) -> np.ndarray:
    """Z-score with the unbiased standard deviation."""
    x = np.asarray(x, dtype=float)
    sd = x.std(ddof=1)
    if sd == 0.0 or not np.isfinite(sd):
        raise DegenerateSeriesError("cannot standardize a constant series")
    return (x - x.mean()) / sd


def _acf(x: np.ndarray, lag: int) -> float:
    n = len(x)
    if lag >= n:
        return 0.0
    xc = x - x.mean()
    denom = float(xc @ xc)
    if denom == 0.0:
        return 0.0
    return float(xc[:-lag] @ xc[lag:]) / denom


def _acf_block(x: np.ndarray, s: int) -> tuple[float, float, float, float]:
    ss10 = float(sum(_acf(x, k) ** 2 for k in range(1, 11)))
    return _acf(x, 1), _acf(x, 2), _acf(x, s), ss10


def _ma_trend(y: np.ndarray, s: int) -> np.ndarray:
    """Centered moving average; for even periods the classic half-weight ends."""
    window = 7 if s == 1 else s
    if window % 2 == 0:
        weights = np.full(window + 1, 1.0 / window)
        weights[0] = weights[-1] = 1.0 / (2 * window)
    else:
        weights = np.full(window, 1.0 / window)
    return np.convolve(y, weights, mode="valid")


def _decompose(y: np.ndarray, s: int):
    """Additive decomposition on the interior where the trend is defined."""
    trend = _ma_trend(y, s)
    half = (len(y) - len(trend)) // 2
    core = y[half : half + len(trend)]
    detrended = core - trend
    phases = (np.arange(len(core)) + half) % s
    seasonal = np.zeros_like(core)
    if s > 1:
        means = np.array([detrended[phases == p].mean() for p in range(s)])
        means -= means.mean()
        seasonal = means[phases]
    remainder = detrended - seasonal
    return trend, seasonal, remainder, detrended


def _strength(num_var: float, den_var: float, total_var: float) -> float:
    # a denominator that is pure rounding noise means the component is absent
    if den_var <= 1e-10 * total_var:
        return 0.0
    return max(0.0, 1.0 - num_var / den_var)


def _spikiness(r: np.ndarray) -> float:
    n = len(r)
    if n < 4:
        return 0.0
    total = r.sum()
    ss = float(r @ r)
    loo_mean = (total - r) / (n - 1)
    loo_var = (ss - r**2 - (n - 1) * loo_mean**2) / (n - 2)
    return float(loo_var.var(ddof=1))


def _ortho_poly_coefs(v: np.ndarray) -> tuple[float, float]:
    n = len(v)
    t = np.arange(1.0, n + 1.0)
    p1 = t - t.mean()
    p1 /= np.linalg.norm(p1)
    q = t**2
    q = q - q.mean() - (q @ p1) * p1
    p2 = q / np.linalg.norm(q)
    return float(v @ p1), float(v @ p2)


def _spectral_entropy(y: np.ndarray) -> float:
    yc = y - y.mean()
    power = np.abs(np.fft.rfft(yc))[1:] ** 2
    total = power.sum()
    if total <= 0.0 or len(power) < 2:
        return 0.0
    p = power / total
    p = p[p > 0]
    return float(-(p * np.log(p)).sum() / np.log(len(power)))


def _block_stats(y: np.ndarray, s: int) -> tuple[float, float]:
    width = max(s, 2)
    nblocks = len(y) // width
    if nblocks < 2:
        return 0.0, 0.0
    blocks = y[: nblocks * width].reshape(nblocks, width)
    return float(blocks.var(axis=1, ddof=1).var(ddof=1)), float(blocks.mean(axis=1).var(ddof=1))


def _crossing_points(y: np.ndarray) -> float:
    below = y <= np.median(y)
    return float(np.count_nonzero(below[:-1] != below[1:]))


def _flat_spots(y: np.ndarray) -> float:
    lo, hi = y.min(), y.max()
    if hi == lo:
        return float(len(y))
    bins = np.minimum((10 * (y - lo) / (hi - lo)).astype(int), 9)
    best = run = 1
    for a, b in zip(bins[:-1], bins[1:]):
        run = run + 1 if a == b else 1
        best = max(best, run)
    return float(best)


def _ets_params(y: np.ndarray) -> tuple[float, float, float]:
    y = np.ascontiguousarray(y)
    inits = _heuristic_states(y, 1)
    ann = _fit_candidate(y, 1, "none", "none", inits)
    aan = _fit_candidate(y, 1, "additive", "none", inits)
    return ann.alpha, aan.alpha, aan.beta


def compute_features(y, s: int) -> FeatureVector:
    """Deterministic 24-number summary of one series."""
    y = np.asarray(y, dtype=float)
    T = len(y)
    if T < max(3 * s, 12):
        raise FeatureError(f"series too short for features: T={T}, s={s}")
    if not np.isfinite(y).all():
        raise FeatureError("series contains non-finite values")
    if y.std(ddof=1) == 0.0:
        raise FeatureError("constant series has no usable features")
    d = np.diff(y)
    acf1, acf2, acfs, acf10 = _acf_block(y, s)
    dacf1, dacf2, dacfs, dacf10 = _acf_block(d, s)
    trend, seasonal, remainder, detrended = _decompose(y, s)
    deseasonalized = trend + remainder
    var_y = y.var(ddof=1)
    strength_trend = _strength(remainder.var(ddof=1), deseasonalized.var(ddof=1), var_y)
    strength_seasonal = _strength(remainder.var(ddof=1), detrended.var(ddof=1), var_y)
    linearity, curvature = _ortho_poly_coefs(trend)
    lumpiness, stability = _block_stats(y, s)
    ann_alpha, aan_alpha, aan_beta = _ets_params(y)
    values = np.array([
        y.mean(),
        y.var(ddof=1),
        acf1, acf2, acfs, acf10,
        dacf1, dacf2, dacfs, dacf10,
        strength_trend,
        strength_seasonal,
        _spikiness(remainder),
        linearity,
        curvature,
        _acf(remainder, 1),
        _spectral_entropy(y),
        lumpiness,
        stability,
        _crossing_points(y),
        _flat_spots(y),
        ann_alpha, aan_alpha, aan_beta,
    ])
    if not np.isfinite(values).all():
        raise FeatureError("feature computation produced non-finite values")
    return FeatureVector(FEATURE_NAMES, values)


def feature_matrix(rows: np.ndarray, s: int) -> np.ndarray:
    """Stack :func:`compute_features` over the rows of an m x T matrix."""
    return np.vstack([compute_features(row, s).values for row in rows])


def pca_reduce(X: np.ndarray, threshold: float = 0.8) -> np.ndarray:
    """Scores on the fewest principal components reaching the variance target.

    Columns are centered internally; component signs are fixed by making the
    largest-magnitude loading positive.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] < 1:
        raise DegenerateInputError("need a 2-D matrix with at least one column")
    if not 0.0 < threshold <= 1.0:
        raise DegenerateInputError("threshold must lie in (0, 1]")
    centered = X - X.mean(axis=0)
    u, sv, vt = np.linalg.svd(centered, full_matrices=False)
    tol = sv[0] * max(X.shape) * np.finfo(float).eps if sv.size else 0.0
    rank = int((sv > tol).sum())
    if rank == 0:
        raise DegenerateInputError("input has rank zero after centering")
    explained = sv**2 / (sv**2).sum()
    cumulative = np.cumsum(explained)
    if threshold >= 1.0:
        p = rank
    else:
        p = min(int(np.searchsorted(cumulative, threshold - 1e-12) + 1), rank)
    flip = np.where(vt[np.arange(p), np.abs(vt[:p]).argmax(axis=1)] < 0, -1.0, 1.0)
    return u[:, :p] * sv[:p] * flip


def row_standardized(rows: np.ndarray) -> np.ndarray:
    return np.vstack([standardize(row) for row in rows])


def build_representation(kind: str, bottom_rows: np.ndarray,
                         residual_rows: np.ndarray | None, s: int,
                         reduce: bool) -> Representation:
    """Prepare one of the four clustering inputs.

    Raw and residual kinds are row-standardized; feature kinds are computed
    per series, constant features dropped and columns z-scored.  With
    ``reduce`` the result is projected onto the PCA scores at the 80% target
    (feature kinds not used with DTW, which takes the full rows).
    """
    if kind not in KINDS:
        raise DegenerateInputError(f"unknown representation kind {kind!r}")
    if kind in ("residual", "residual-features") and residual_rows is None:
        raise DegenerateInputError(f"{kind!r} representation needs residuals")
    if kind in ("raw", "residual"):
        source = bottom_rows if kind == "raw" else residual_rows
        data = row_standardized(source)
        if reduce:
            data = pca_reduce(data, 0.8)
        return Representation(kind, data)
    source = bottom_rows if kind == "raw-features" else residual_rows
    feats = feature_matrix(source, s)
    keep = feats.std(axis=0, ddof=1) > 0.0
    if not keep.any():
        raise DegenerateInputError("all features are constant across series")
    names = tuple(n for n, k in zip(FEATURE_NAMES, keep) if k)
    kept = feats[:, keep]
    scaled = (kept - kept.mean(axis=0)) / kept.std(axis=0, ddof=1)
    data = pca_reduce(scaled, 0.8) if reduce else scaled
    return Representation(kind, data, names)
