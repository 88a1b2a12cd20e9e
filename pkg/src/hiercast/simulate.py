"""Synthetic panel generator with six known trend x seasonality clusters.

Bottom series follow ``Y_t = a*t + eps_t + S_t + xi_t`` where the seasonal
term alternates between a per-series peak and trough with period two, and
cluster membership determines the trend slope and the peak parity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, ConfigError
from .panel import BOTTOM, TOP, Grouping, SeriesPanel

# cluster -> (trend direction, peak parity); trends: +1 increase, 0 none, -1 decrease
CLUSTER_TREND = (1, 1, 0, 0, -1, -1)
CLUSTER_PEAK_ODD = (True, False, True, False, True, False)

_START_MONTH = 2000 * 12  # synthetic panels start at 2000-01


@dataclass(frozen=True)
class DgpConfig:
    """Slopes are (increasing, decreasing, none); noise-free runs may zero
    the variances for degenerate checks."""

    m: int = 120
    n_obs: int = 144
    alphas: tuple[float, float, float] = (0.001, -0.002, 0.0)
    beta_range: tuple[float, float] = (2.0, 3.0)
    gamma_range: tuple[float, float] = (0.0, 1.0)
    var_xi: float = 0.25
    var_eps_up: float = 2.5e-5
    var_eps_down: float = 4.9e-5
    seed: int | tuple[int, ...] = 0

    def __post_init__(self):
        if self.m % 6 != 0 or self.m < 6:
            raise ArgumentError("m must be a positive multiple of 6")
        if self.n_obs % 2 != 0 or self.n_obs < 4:
            raise ArgumentError("n_obs must be even and at least 4")
        for name in ("var_xi", "var_eps_up", "var_eps_down"):
            if getattr(self, name) < 0:
                raise ArgumentError(f"{name} must be nonnegative")


def cluster_labels(m: int) -> np.ndarray:
    """Labels 1..6, ``m/6`` consecutive series per cluster."""
    return np.repeat(np.arange(1, 7), m // 6)


def simulate_panel(cfg: DgpConfig) -> tuple[SeriesPanel, np.ndarray]:
    """Generate one replication; returns the panel and the true labels.

    The panel holds the synthetic top (sum of all bottom series) followed by
    the ``m`` bottom series, with seasonal period 2.  Identical seeds give
    bit-identical panels.
    """
    rng = np.random.default_rng(cfg.seed)
    m, T = cfg.m, cfg.n_obs
    labels = cluster_labels(m)
    t = np.arange(1, T + 1)
    slopes = {1: cfg.alphas[0], -1: cfg.alphas[1], 0: cfg.alphas[2]}
    values = np.empty((T, m))
    for i in range(m):
        cl = labels[i] - 1
        beta = rng.uniform(*cfg.beta_range)
        gamma = rng.uniform(*cfg.gamma_range)
        delta = 1 if CLUSTER_PEAK_ODD[cl] else 0
        seasonal = np.where((t - delta) % 2 == 0, beta, gamma)
        alpha = slopes[CLUSTER_TREND[cl]]
        if CLUSTER_TREND[cl] > 0:
            eps = rng.normal(0.0, np.sqrt(cfg.var_eps_up), T)
        elif CLUSTER_TREND[cl] < 0:
            eps = rng.normal(0.0, np.sqrt(cfg.var_eps_down), T)
        else:
            eps = np.zeros(T)
        xi = rng.normal(0.0, np.sqrt(cfg.var_xi), T)
        values[:, i] = alpha * t + eps + seasonal + xi
    full = np.hstack([values.sum(axis=1, keepdims=True), values])
    width = len(str(m))
    ids = ("total",) + tuple(f"b{i + 1:0{width}d}" for i in range(m))
    tags = (TOP,) + (BOTTOM,) * m
    panel = SeriesPanel(full, ids, _START_MONTH + np.arange(T), 2, tags, synthetic_top=True)
    return panel, labels


SCHEMES = ("trend-season", "trend1", "trend2", "season")


def true_grouping(labels: np.ndarray, scheme: str) -> Grouping:
    """Aggregate bottom series by their known cluster attributes."""
    labels = np.asarray(labels)
    if labels.min() < 1 or labels.max() > 6:
        raise ArgumentError("labels must lie in 1..6")
    trend = np.array([CLUSTER_TREND[l - 1] for l in labels])
    odd = np.array([CLUSTER_PEAK_ODD[l - 1] for l in labels])
    if scheme == "trend-season":
        groups = [(f"cluster{c}", labels == c) for c in range(1, 7)]
    elif scheme == "trend1":
        groups = [("increase", trend == 1), ("none", trend == 0), ("decrease", trend == -1)]
    elif scheme == "trend2":
        groups = [("trend", trend != 0), ("no-trend", trend == 0)]
    elif scheme == "season":
        groups = [("odd", odd), ("even", ~odd)]
    else:
        raise ConfigError(f"unknown grouping scheme {scheme!r}")
    rows = [(name, mask.astype(float)) for name, mask in groups if mask.any()]
    return Grouping(np.array([r for _, r in rows]), tuple(n for n, _ in rows))
