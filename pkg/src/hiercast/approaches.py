"""Named hierarchy-construction approaches.

The twelve clustering approaches combine a representation (raw series,
in-sample errors, or feature vectors of either), a distance (Euclidean on
PCA scores, or DTW on the full standardized rows) and a clustering
algorithm (PAM with silhouette-selected k, or a Ward tree whose internal
nodes all become middle-level series).  Benchmarks, the grouped union, the
known-cluster schemes for simulated panels and permutation twins are built
here as well.
"""

from __future__ import annotations

import numpy as np

from .cluster import (
    grouped_hierarchy,
    grouping_from_partition,
    grouping_from_tree,
    select_k_by_asw,
    ward_tree,
)
from .distance import dtw_matrix, euclidean_matrix
from .errors import ConfigError
from .evaluate import Approach, WindowContext
from .panel import Grouping, HierarchySpec
from .permute import twin
from .represent import build_representation
from .simulate import SCHEMES, true_grouping

CLUSTERING_NAMES = (
    "TS-EUC-ME",
    "ER-EUC-ME",
    "TSF-EUC-ME",
    "ERF-EUC-ME",
    "TS-EUC-HC",
    "ER-EUC-HC",
    "TSF-EUC-HC",
    "ERF-EUC-HC",
    "TS-DTW-ME",
    "TS-DTW-HC",
    "ER-DTW-ME",
    "ER-DTW-HC",
)

_REPR_BY_CODE = {
    "TS": "raw",
    "ER": "residual",
    "TSF": "raw-features",
    "ERF": "residual-features",
}

ASW_K_MAX = 10


def _cluster_grouping(ctx: WindowContext, repr_code: str, dist: str, alg: str) -> Grouping:
    bottom_rows = ctx.train.bottom_values().T
    rep = build_representation(
        _REPR_BY_CODE[repr_code],
        bottom_rows,
        ctx.bottom_residuals.T,
        ctx.train.seasonal_period,
        reduce=dist == "EUC",
    )
    if dist == "EUC":
        dmat = euclidean_matrix(rep.data)
    else:
        dmat = dtw_matrix(rep.data)
    m = bottom_rows.shape[0]
    if alg == "ME":
        return grouping_from_partition(select_k_by_asw(dmat, min(ASW_K_MAX, m - 1)))
    return grouping_from_tree(ward_tree(dmat))


def clustering_approach(name: str) -> Approach:
    """One of the twelve Table-style clustering approaches, by exact name."""
    if name not in CLUSTERING_NAMES:
        raise ConfigError(f"unknown clustering approach {name!r}")
    repr_code, dist, alg = name.split("-")

    def build(ctx: WindowContext) -> Grouping:
        return _cluster_grouping(ctx, repr_code, dist, alg)

    return Approach(name, "hierarchy", build)


def base_approach() -> Approach:
    return Approach("base", "base")


def two_level_approach() -> Approach:
    return Approach("two-level", "hierarchy", lambda ctx: Grouping(np.zeros((0, ctx.train.n_bottom))))


def fixed_approach(name: str, grouping: Grouping) -> Approach:
    """A hierarchy that does not depend on the window (natural, true clusters)."""
    return Approach(name, "hierarchy", lambda ctx: grouping)


def natural_approach(spec: HierarchySpec) -> Approach:
    return fixed_approach("natural", spec.grouping)


def grouped_approach(names=CLUSTERING_NAMES) -> Approach:
    """Union of the aggregation constraints of the named clustering approaches."""
    parsed = [name.split("-") for name in names]
    for code, dist, alg in parsed:
        if code not in _REPR_BY_CODE or dist not in ("EUC", "DTW") or alg not in ("ME", "HC"):
            raise ConfigError(f"bad clustering approach name {'-'.join((code, dist, alg))!r}")

    def build(ctx: WindowContext) -> Grouping:
        parts = [_cluster_grouping(ctx, code, dist, alg) for code, dist, alg in parsed]
        return grouped_hierarchy(parts)

    return Approach("grouped", "hierarchy", build)


def scheme_approach(scheme: str, labels: np.ndarray) -> Approach:
    """Known-cluster hierarchy for simulated panels (Cluster-<scheme>)."""
    if scheme not in SCHEMES:
        raise ConfigError(f"unknown grouping scheme {scheme!r}")
    return fixed_approach(f"Cluster-{scheme}", true_grouping(labels, scheme))


def twin_approach(inner: Approach, perm: np.ndarray, name: str) -> Approach:
    """Apply a fixed leaf permutation to the grouping the inner approach builds."""
    if inner.kind != "hierarchy":
        raise ConfigError(f"cannot permute approach {inner.name!r} of kind {inner.kind!r}")

    def build(ctx: WindowContext) -> Grouping:
        return twin(inner.builder(ctx), perm)

    return Approach(name, "hierarchy", build)


def combination_approach(components, name: str = "combination") -> Approach:
    return Approach(name, "combination", components=tuple(components))
