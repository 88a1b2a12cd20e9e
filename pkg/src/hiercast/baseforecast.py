"""Additive exponential smoothing base forecasts.

Each series is fitted independently over the candidate set
{ANN, AAN, AAdN, ANA, AAA, AAdA} (additive errors, optional additive or
damped-additive trend, optional additive seasonality).  Smoothing parameters
are estimated by minimising the Gaussian negative log-likelihood with a
Nelder-Mead search from five fixed starting points; initial states come from
a deterministic heuristic (level = mean of the first 2s observations, slope
= average first difference, seasonal indices = detrended per-phase means).
Model selection is by AICc.  Everything is deterministic given the input.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import ArgumentError, FitError
from .panel import Grouping, SeriesPanel

_TREND_CODE = {"none": 0, "additive": 1, "damped-additive": 2}
_TREND_LETTER = {"none": "N", "additive": "A", "damped-additive": "Ad"}

# (trend, seasonal) for the six candidates, in selection order
_CANDIDATES = (
    ("none", "none"),
    ("additive", "none"),
    ("damped-additive", "none"),
    ("none", "additive"),
    ("additive", "additive"),
    ("damped-additive", "additive"),
)

# fixed (alpha, beta, gamma, phi) optimizer starting points
_STARTS = (
    (0.1, 0.01, 0.01, 0.90),
    (0.3, 0.10, 0.10, 0.95),
    (0.5, 0.05, 0.30, 0.85),
    (0.7, 0.20, 0.05, 0.92),
    (0.9, 0.30, 0.20, 0.98),
)

_FTOL = 1e-8
_MAXFEV = 2000


@njit(cache=True)
def _decode(x, trend_code, seasonal):
    """Unpack the active parameter vector and project into the admissible box."""
    alpha = x[0]
    i = 1
    beta = 0.0
    if trend_code > 0:
        beta = x[i]
        i += 1
    gamma = 0.0
    if seasonal == 1:
        gamma = x[i]
        i += 1
    phi = 1.0
    if trend_code == 2:
        phi = x[i]
    if alpha < 1e-4:
        alpha = 1e-4
    elif alpha > 1.0 - 1e-4:
        alpha = 1.0 - 1e-4
    hi = alpha * (1.0 - 1e-6)
    if beta < 0.0:
        beta = 0.0
    elif beta > hi:
        beta = hi
    hi = (1.0 - alpha) * (1.0 - 1e-6)
    if gamma < 0.0:
        gamma = 0.0
    elif gamma > hi:
        gamma = hi
    if trend_code == 2:
        if phi < 0.8:
            phi = 0.8
        elif phi > 0.98:
            phi = 0.98
    return alpha, beta, gamma, phi


@njit(cache=True)
def _neg_loglik(x, y, s, trend_code, seasonal, l0, b0, seas0):
    alpha, beta, gamma, phi = _decode(x, trend_code, seasonal)
    T = y.shape[0]
    level = l0
    slope = b0
    seas = seas0.copy()
    sse = 0.0
    for t in range(T):
        f = level + phi * slope
        if seasonal == 1:
            f += seas[t % s]
        e = y[t] - f
        sse += e * e
        level = level + phi * slope + alpha * e
        if trend_code > 0:
            slope = phi * slope + beta * e
        if seasonal == 1:
            seas[t % s] += gamma * e
    if not np.isfinite(sse):
        return 1e300
    if sse < 1e-300:
        sse = 1e-300
    return 0.5 * T * (np.log(2.0 * np.pi * sse / T) + 1.0)


@njit(cache=True)
def _nelder_mead(simplex, y, s, trend_code, seasonal, l0, b0, seas0, ftol, maxfev):
    """Minimise the negative log-likelihood; returns (best point, best value)."""
    npts, d = simplex.shape
    fvals = np.empty(npts)
    for i in range(npts):
        fvals[i] = _neg_loglik(simplex[i], y, s, trend_code, seasonal, l0, b0, seas0)
    nfev = npts
    tmp = np.empty((npts, d))
    while nfev < maxfev:
        order = np.argsort(fvals)
        for i in range(npts):
            tmp[i] = simplex[order[i]]
        simplex[:] = tmp
        fvals = fvals[order]
        if fvals[npts - 1] - fvals[0] <= ftol:
            break
        centroid = np.zeros(d)
        for i in range(npts - 1):
            centroid += simplex[i]
        centroid /= npts - 1
        xr = 2.0 * centroid - simplex[npts - 1]
        fr = _neg_loglik(xr, y, s, trend_code, seasonal, l0, b0, seas0)
        nfev += 1
        if fr < fvals[0]:
            xe = 3.0 * centroid - 2.0 * simplex[npts - 1]
            fe = _neg_loglik(xe, y, s, trend_code, seasonal, l0, b0, seas0)
            nfev += 1
            if fe < fr:
                simplex[npts - 1] = xe
                fvals[npts - 1] = fe
            else:
                simplex[npts - 1] = xr
                fvals[npts - 1] = fr
        elif fr < fvals[npts - 2]:
            simplex[npts - 1] = xr
            fvals[npts - 1] = fr
        else:
            shrink = False
            if fr < fvals[npts - 1]:
                xc = centroid + 0.5 * (xr - centroid)
                fc = _neg_loglik(xc, y, s, trend_code, seasonal, l0, b0, seas0)
                nfev += 1
                if fc <= fr:
                    simplex[npts - 1] = xc
                    fvals[npts - 1] = fc
                else:
                    shrink = True
            else:
                xc = centroid - 0.5 * (centroid - simplex[npts - 1])
                fc = _neg_loglik(xc, y, s, trend_code, seasonal, l0, b0, seas0)
                nfev += 1
                if fc < fvals[npts - 1]:
                    simplex[npts - 1] = xc
                    fvals[npts - 1] = fc
                else:
                    shrink = True
            if shrink:
                for i in range(1, npts):
                    simplex[i] = simplex[0] + 0.5 * (simplex[i] - simplex[0])
                    fvals[i] = _neg_loglik(simplex[i], y, s, trend_code, seasonal, l0, b0, seas0)
                    nfev += 1
    best = 0
    for i in range(1, npts):
        if fvals[i] < fvals[best]:
            best = i
    return simplex[best].copy(), fvals[best]


@njit(cache=True)
def _filter_states(y, s, trend_code, seasonal, alpha, beta, gamma, phi, l0, b0, seas0):
    """One-step filter pass; returns residuals, fitted values and final states."""
    T = y.shape[0]
    resid = np.empty(T)
    fitted = np.empty(T)
    level = l0
    slope = b0
    seas = seas0.copy()
    for t in range(T):
        f = level + phi * slope
        if seasonal == 1:
            f += seas[t % s]
        fitted[t] = f
        e = y[t] - f
        resid[t] = e
        level = level + phi * slope + alpha * e
        if trend_code > 0:
            slope = phi * slope + beta * e
        if seasonal == 1:
            seas[t % s] += gamma * e
    return resid, fitted, level, slope, seas


@dataclass(frozen=True)
class EtsModel:
    """A fitted additive-error exponential smoothing model."""

    trend: str
    seasonal: str
    seasonal_period: int
    n_obs: int
    alpha: float
    beta: float
    gamma: float
    phi: float
    init_level: float
    init_slope: float
    init_seasonal: np.ndarray
    level: float
    slope: float
    seasonal_states: np.ndarray
    residuals: np.ndarray
    sse: float
    loglik: float
    aicc: float

    @property
    def name(self) -> str:
        seas = "A" if self.seasonal == "additive" else "N"
        return f"A{_TREND_LETTER[self.trend]}{seas}"

    @property
    def n_params(self) -> int:
        # free smoothing parameters plus the residual variance
        return 2 + (self.trend != "none") + (self.seasonal == "additive") + (self.trend == "damped-additive")


def _heuristic_states(y: np.ndarray, s: int) -> tuple[float, float, np.ndarray]:
    T = len(y)
    level = float(y[: min(2 * s, T)].mean())
    slope = float(np.diff(y).mean())
    t = np.arange(1.0, T + 1.0)
    design = np.column_stack([np.ones(T), t])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    detrended = y - design @ coef
    seas = np.array([detrended[p::s].mean() for p in range(s)])
    seas -= seas.mean()
    return level, slope, seas


def _start_vector(start, trend: str, seasonal: str) -> np.ndarray:
    alpha, beta, gamma, phi = start
    x = [alpha]
    if trend != "none":
        x.append(beta)
    if seasonal == "additive":
        x.append(gamma)
    if trend == "damped-additive":
        x.append(phi)
    return np.array(x)


def _initial_simplex(x0: np.ndarray, trend: str, seasonal: str) -> np.ndarray:
    d = len(x0)
    simplex = np.tile(x0, (d + 1, 1))
    for j in range(d):
        # phi sits near its upper bound, so step it downwards
        damped_phi = trend == "damped-additive" and j == d - 1
        simplex[j + 1, j] += -0.05 if damped_phi else 0.05
    return simplex


def _fit_candidate(y: np.ndarray, s: int, trend: str, seasonal: str,
                   inits: tuple[float, float, np.ndarray]) -> EtsModel:
    T = len(y)
    level0, slope0, seas_full = inits
    trend_code = _TREND_CODE[trend]
    seas_flag = 1 if seasonal == "additive" else 0
    b0 = slope0 if trend != "none" else 0.0
    seas0 = seas_full if seas_flag else np.zeros(s)
    best_x, best_f = None, np.inf
    for start in _STARTS:
        x0 = _start_vector(start, trend, seasonal)
        simplex = _initial_simplex(x0, trend, seasonal)
        x, f = _nelder_mead(simplex, y, s, trend_code, seas_flag,
                            level0, b0, seas0, _FTOL, _MAXFEV)
        if f < best_f:
            best_x, best_f = x, f
    alpha, beta, gamma, phi = _decode(best_x, trend_code, seas_flag)
    resid, _, level, slope, seas = _filter_states(
        y, s, trend_code, seas_flag, alpha, beta, gamma, phi, level0, b0, seas0
    )
    sse = float(resid @ resid)
    loglik = -0.5 * T * (np.log(2.0 * np.pi * max(sse, 1e-300) / T) + 1.0)
    p = 2 + (trend != "none") + seas_flag + (trend == "damped-additive")
    aicc = -2.0 * loglik + 2.0 * p * T / (T - p - 1.0)
    return EtsModel(
        trend=trend, seasonal=seasonal, seasonal_period=s, n_obs=T,
        alpha=alpha, beta=beta, gamma=gamma, phi=phi if trend == "damped-additive" else 1.0,
        init_level=level0, init_slope=b0, init_seasonal=seas0.copy(),
        level=float(level), slope=float(slope), seasonal_states=np.asarray(seas),
        residuals=resid, sse=sse, loglik=float(loglik), aicc=float(aicc),
    )


def fit_ets(y, s: int) -> EtsModel:
    """Fit the best candidate model by AICc.

    Seasonal candidates enter only when ``s > 1`` and the series covers at
    least two full cycles.
    """
    y = np.asarray(y, dtype=float)
    if y.ndim != 1:
        raise FitError("expected a 1-D series")
    if not np.isfinite(y).all():
        raise FitError("series contains non-finite values")
    T = len(y)
    if T < max(2 * s + 4, 10):
        raise FitError(f"series too short for fitting: T={T}, s={s}")
    inits = _heuristic_states(y, s)
    best = None
    for trend, seasonal in _CANDIDATES:
        if seasonal == "additive" and (s <= 1 or T < 2 * s):
            continue
        model = _fit_candidate(y, s, trend, seasonal, inits)
        if best is None or model.aicc < best.aicc:
            best = model
    return best


def forecast_ets(model: EtsModel, h: int) -> np.ndarray:
    """Point forecasts by iterating the state recursion with zero errors."""
    if h <= 0:
        raise ArgumentError("horizon must be positive")
    level, slope, phi = model.level, model.slope, model.phi
    if model.trend == "none":
        slope = 0.0
    if model.trend == "additive":
        phi = 1.0
    seas = model.seasonal_states
    s = model.seasonal_period
    out = np.empty(h)
    for k in range(h):
        f = level + phi * slope
        if model.seasonal == "additive":
            f += seas[(model.n_obs + k) % s]
        out[k] = f
        level = level + phi * slope
        slope = phi * slope
    return out


def seasonal_naive(y, s: int, h: int) -> np.ndarray:
    """Repeat the last observed seasonal cycle."""
    y = np.asarray(y, dtype=float)
    T = len(y)
    if T < s:
        raise ArgumentError(f"need at least s={s} observations, got {T}")
    if h <= 0:
        raise ArgumentError("horizon must be positive")
    ks = np.arange(1, h + 1)
    idx = T + ks - s * np.ceil(ks / s).astype(int)
    return y[idx - 1]  # idx is 1-based


@dataclass(frozen=True)
class ForecastBundle:
    """Base forecasts and in-sample residuals for one hierarchy.

    Rows follow the (top, middle..., bottom...) stacking order used by the
    summing matrix.
    """

    ids: tuple[str, ...]
    point_forecasts: np.ndarray  # n x h
    residuals: np.ndarray        # T x n
    models: tuple[EtsModel, ...]

    def __post_init__(self):
        n, _ = self.point_forecasts.shape
        if self.residuals.shape[1] != n or len(self.ids) != n or len(self.models) != n:
            raise ArgumentError("inconsistent bundle dimensions")
        if np.isnan(self.point_forecasts).any() or np.isnan(self.residuals).any():
            raise ArgumentError("bundle contains NaN")

    @property
    def model_names(self) -> tuple[str, ...]:
        return tuple(m.name for m in self.models)


class FitCache:
    """Memoises fitted models by series content; shared within a window."""

    def __init__(self):
        self._store = {}

    def fit(self, y: np.ndarray, s: int) -> EtsModel:
        key = (y.tobytes(), s)
        model = self._store.get(key)
        if model is None:
            model = fit_ets(y, s)
            self._store[key] = model
        return model


def hierarchy_series(panel: SeriesPanel, grouping: Grouping) -> tuple[tuple[str, ...], np.ndarray]:
    """Training series stacked (top, middle..., bottom...) as a T x n matrix."""
    if grouping.m != panel.n_bottom:
        raise ArgumentError("grouping width does not match the panel's bottom count")
    bottom = panel.bottom_values()
    middle = bottom @ grouping.matrix.T
    series = np.column_stack([panel.top_values(), middle, bottom])
    ids = (panel.top_id,) + grouping.middle_ids + panel.bottom_ids
    return ids, series


def forecast_panel(panel: SeriesPanel, grouping: Grouping, h: int,
                   cache: FitCache | None = None) -> ForecastBundle:
    """Fit every series in the hierarchy and stack h-step base forecasts."""
    ids, series = hierarchy_series(panel, grouping)
    s = panel.seasonal_period
    cache = cache or FitCache()
    models = []
    for j, name in enumerate(ids):
        try:
            models.append(cache.fit(np.ascontiguousarray(series[:, j]), s))
        except FitError as exc:
            raise FitError(f"series {name!r}: {exc}") from exc
    forecasts = np.vstack([forecast_ets(m, h) for m in models])
    residuals = np.column_stack([m.residuals for m in models])
    return ForecastBundle(ids, forecasts, residuals, tuple(models))
