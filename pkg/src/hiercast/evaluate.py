"""Expanding-window backtest, RMSSE scoring and the MCB rank test.

Every window refits base forecasts, rebuilds each approach's hierarchy from
the training slice, re-estimates the error covariance and reconciles; scores
average the per-series RMSSE over the series common to all hierarchies (the
top and bottom levels).  Approach comparison uses mean ranks across windows
with studentized-range intervals; overlapping intervals mark approaches as
statistically indistinguishable from the best.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.stats import rankdata, studentized_range

from .baseforecast import FitCache, forecast_ets
from .errors import ArgumentError, ScaleError
from .panel import Grouping, HierarchySpec, SeriesPanel, summing_matrix
from .reconcile import estimate_w, reconcile


@dataclass(frozen=True)
class WindowPlan:
    """Expanding-window schedule over a series of ``total_length`` periods."""

    total_length: int
    initial_length: int = 96
    step: int = 1
    horizon: int = 12

    def __post_init__(self):
        if min(self.total_length, self.initial_length, self.step, self.horizon) < 1:
            raise ArgumentError("plan fields must be positive")
        if self.n_windows < 1:
            raise ArgumentError(
                f"no evaluation window fits: T={self.total_length}, "
                f"initial={self.initial_length}, h={self.horizon}"
            )

    @property
    def n_windows(self) -> int:
        span = self.total_length - self.initial_length - self.horizon
        if span < 0:
            return 0
        return span // self.step + 1

    def train_length(self, window: int) -> int:
        return self.initial_length + window * self.step


def rmsse(train, actual, forecast, s: int) -> float:
    """Root mean squared error scaled by in-sample seasonal-naive errors."""
    train = np.asarray(train, dtype=float)
    actual = np.asarray(actual, dtype=float)
    forecast = np.asarray(forecast, dtype=float)
    if len(train) <= s:
        raise ArgumentError(f"training series must exceed the seasonal period {s}")
    if actual.shape != forecast.shape:
        raise ArgumentError("actuals and forecasts must align")
    denom = float(np.mean((train[s:] - train[:-s]) ** 2))
    if denom == 0.0:
        raise ScaleError("training series is exactly seasonal-periodic; scale is zero")
    return float(np.sqrt(np.mean((actual - forecast) ** 2) / denom))


@lru_cache(maxsize=None)
def _range_quantile(alpha: float, n_methods: int) -> float:
    # upper-alpha studentized range quantile, infinite degrees of freedom
    return float(studentized_range.ppf(1.0 - alpha, n_methods, np.inf))


@dataclass(frozen=True)
class McbResult:
    labels: tuple[str, ...]
    mean_ranks: np.ndarray
    half_width: float
    alpha: float

    @property
    def intervals(self) -> np.ndarray:
        return np.column_stack([self.mean_ranks - self.half_width,
                                self.mean_ranks + self.half_width])

    @property
    def best(self) -> int:
        return int(np.argmin(self.mean_ranks))

    def indistinguishable_from_best(self) -> np.ndarray:
        lo, hi = self.intervals[self.best]
        return (self.mean_ranks - self.half_width <= hi) & (
            self.mean_ranks + self.half_width >= lo
        )


def mcb(scores: np.ndarray, alpha: float = 0.05, labels=None) -> McbResult:
    """Multiple-comparison-with-the-best intervals from an N x J score matrix.

    Ranks are ascending per window with ties averaged; the interval is
    mean rank +/- q_{alpha,J} * sqrt(J(J+1)/(6N)) / 2.
    """
    scores = np.asarray(scores, dtype=float)
    if scores.ndim != 2:
        raise ArgumentError("scores must be an N x J matrix")
    n, j = scores.shape
    if n < 2 or j < 2:
        raise ArgumentError("need at least two windows and two approaches")
    ranks = rankdata(scores, axis=1)
    mean_ranks = ranks.mean(axis=0)
    half = 0.5 * _range_quantile(alpha, j) * np.sqrt(j * (j + 1) / (6.0 * n))
    labels = tuple(labels) if labels is not None else tuple(f"A{i}" for i in range(j))
    if len(labels) != j:
        raise ArgumentError("need one label per approach")
    return McbResult(labels, mean_ranks, float(half), alpha)


@dataclass(frozen=True)
class WindowContext:
    """Everything a hierarchy builder may look at for one training window."""

    train: SeriesPanel
    bottom_residuals: np.ndarray  # T x m, one-step in-sample errors


HierarchyBuilder = Callable[[WindowContext], Grouping]


@dataclass(frozen=True)
class Approach:
    """One column of the evaluation: base forecasts, a hierarchy, or a mean.

    ``builder`` produces the window-specific grouping for hierarchy
    approaches; combination approaches average the reconciled top+bottom
    forecasts of their named components.
    """

    name: str
    kind: str = "hierarchy"  # "base" | "hierarchy" | "combination"
    builder: HierarchyBuilder | None = None
    components: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind not in ("base", "hierarchy", "combination"):
            raise ArgumentError(f"unknown approach kind {self.kind!r}")
        if self.kind == "hierarchy" and self.builder is None:
            raise ArgumentError(f"approach {self.name!r} needs a hierarchy builder")
        if self.kind == "combination" and len(self.components) < 1:
            raise ArgumentError(f"combination {self.name!r} needs components")


@dataclass
class EvalReport:
    """Per-window per-approach scores plus the rank comparison."""

    labels: tuple[str, ...]
    scores: np.ndarray  # N x J mean RMSSE over top+bottom series
    alpha: float = 0.05
    per_series: np.ndarray | None = None  # optional N x J x (1+m)

    @property
    def mean_scores(self) -> np.ndarray:
        return self.scores.mean(axis=0)

    def rank_test(self, alpha: float | None = None) -> McbResult:
        return mcb(self.scores, alpha if alpha is not None else self.alpha, self.labels)

    def stack(self, other: "EvalReport") -> "EvalReport":
        if other.labels != self.labels:
            raise ArgumentError("cannot stack reports with different approaches")
        per = None
        if self.per_series is not None and other.per_series is not None:
            per = np.concatenate([self.per_series, other.per_series])
        return EvalReport(self.labels, np.vstack([self.scores, other.scores]),
                          self.alpha, per)


@dataclass
class _WindowOutput:
    scores: np.ndarray                 # J
    per_series: np.ndarray             # J x (1+m)
    forecasts: dict[str, np.ndarray]   # top+bottom reconciled forecasts per approach


def _window_once(panel: SeriesPanel, approaches: list[Approach], plan: WindowPlan,
                 window: int, recon_method: str, cache: FitCache) -> _WindowOutput:
    t_end = plan.train_length(window)
    train = panel.slice_rows(t_end)
    horizon = plan.horizon
    s = panel.seasonal_period
    m = panel.n_bottom

    top_train = np.ascontiguousarray(train.top_values())
    bottom_train = train.bottom_values()
    top_model = cache.fit(top_train, s)
    bottom_models = [cache.fit(np.ascontiguousarray(bottom_train[:, j]), s) for j in range(m)]
    top_fc = forecast_ets(top_model, horizon)
    bottom_fc = np.vstack([forecast_ets(mod, horizon) for mod in bottom_models])
    bottom_resid = np.column_stack([mod.residuals for mod in bottom_models])
    ctx = WindowContext(train, bottom_resid)

    top_idx = panel.ids.index(panel.top_id)
    bottom_idx = [i for i, tag in enumerate(panel.level_tags) if tag == "bottom"]
    actual = panel.values[t_end : t_end + horizon]
    actual_tb = np.vstack([actual[:, top_idx], actual[:, bottom_idx].T])  # (1+m) x h
    train_tb = np.vstack([top_train, bottom_train.T])                     # (1+m) x T

    def score(forecast_tb: np.ndarray) -> tuple[float, np.ndarray]:
        per = np.array([
            rmsse(train_tb[i], actual_tb[i], forecast_tb[i], s)
            for i in range(1 + m)
        ])
        return float(per.mean()), per

    scores = np.empty(len(approaches))
    per_series = np.empty((len(approaches), 1 + m))
    forecasts: dict[str, np.ndarray] = {}
    deferred = []
    for j, approach in enumerate(approaches):
        if approach.kind == "combination":
            deferred.append((j, approach))
            continue
        if approach.kind == "base":
            fc_tb = np.vstack([top_fc, bottom_fc])
        else:
            grouping = approach.builder(ctx)
            ytilde = _reconcile_grouping(
                train, grouping, horizon, recon_method, cache,
                top_fc, bottom_fc, bottom_resid, top_model,
            )
            k = grouping.k
            fc_tb = np.vstack([ytilde[0], ytilde[k + 1 :]])
        forecasts[approach.name] = fc_tb
        scores[j], per_series[j] = score(fc_tb)
    for j, approach in deferred:
        missing = [c for c in approach.components if c not in forecasts]
        if missing:
            raise ArgumentError(
                f"combination {approach.name!r} references approaches not in the run: {missing}"
            )
        fc_tb = np.mean([forecasts[c] for c in approach.components], axis=0)
        forecasts[approach.name] = fc_tb
        scores[j], per_series[j] = score(fc_tb)
    return _WindowOutput(scores, per_series, forecasts)


def _reconcile_grouping(train, grouping, horizon, recon_method, cache,
                        top_fc, bottom_fc, bottom_resid, top_model):
    m = grouping.m
    middle_train = train.bottom_values() @ grouping.matrix.T
    middle_models = [
        cache.fit(np.ascontiguousarray(middle_train[:, j]), train.seasonal_period)
        for j in range(grouping.k)
    ]
    middle_fc = (
        np.vstack([forecast_ets(mod, horizon) for mod in middle_models])
        if grouping.k
        else np.zeros((0, horizon))
    )
    yhat = np.vstack([top_fc, middle_fc, bottom_fc])
    residuals = np.column_stack(
        [top_model.residuals]
        + [mod.residuals for mod in middle_models]
        + [bottom_resid]
    )
    cov = estimate_w(residuals, recon_method)
    summing = summing_matrix(HierarchySpec(grouping, m))
    ytilde, _ = reconcile(summing, cov, yhat)
    return ytilde


def run_backtest(panel: SeriesPanel, approaches: list[Approach], plan: WindowPlan,
                 recon_method: str = "shrinkage", alpha: float = 0.05,
                 keep_per_series: bool = False,
                 collect_forecasts: bool = False):
    """Evaluate every approach over the expanding-window plan.

    A failure in any window aborts the run with the window index attached.
    Returns an :class:`EvalReport`; with ``collect_forecasts`` also returns
    the per-window reconciled top+bottom forecasts.
    """
    if plan.total_length != panel.n_obs:
        raise ArgumentError("plan length does not match the panel")
    names = [a.name for a in approaches]
    if len(set(names)) != len(names):
        raise ArgumentError("approach names must be unique")
    all_scores = np.empty((plan.n_windows, len(approaches)))
    all_per = np.empty((plan.n_windows, len(approaches), 1 + panel.n_bottom))
    all_forecasts = []
    for w in range(plan.n_windows):
        cache = FitCache()
        try:
            out = _window_once(panel, approaches, plan, w, recon_method, cache)
        except Exception as exc:
            raise type(exc)(f"window {w}: {exc}") from exc
        all_scores[w] = out.scores
        all_per[w] = out.per_series
        if collect_forecasts:
            all_forecasts.append(out.forecasts)
    report = EvalReport(tuple(names), all_scores, alpha,
                        all_per if keep_per_series else None)
    if collect_forecasts:
        return report, all_forecasts
    return report
