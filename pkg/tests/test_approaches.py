import numpy as np
import pytest

from hiercast.approaches import (
    CLUSTERING_NAMES,
    base_approach,
    clustering_approach,
    combination_approach,
    grouped_approach,
    scheme_approach,
    twin_approach,
)
from hiercast.baseforecast import FitCache
from hiercast.errors import ConfigError
from hiercast.evaluate import WindowContext
from hiercast.simulate import DgpConfig, cluster_labels, simulate_panel


@pytest.fixture(scope="module")
def context():
    panel, _ = simulate_panel(DgpConfig(m=12, n_obs=72, seed=1))
    bottom = panel.bottom_values()
    cache = FitCache()
    resid = np.column_stack([
        cache.fit(np.ascontiguousarray(bottom[:, j]), 2).residuals
        for j in range(12)
    ])
    return WindowContext(panel, resid)


def test_clustering_names_are_table_exact():
    assert CLUSTERING_NAMES == (
        "TS-EUC-ME", "ER-EUC-ME", "TSF-EUC-ME", "ERF-EUC-ME",
        "TS-EUC-HC", "ER-EUC-HC", "TSF-EUC-HC", "ERF-EUC-HC",
        "TS-DTW-ME", "TS-DTW-HC", "ER-DTW-ME", "ER-DTW-HC",
    )


@pytest.mark.parametrize("name", CLUSTERING_NAMES)
def test_every_clustering_approach_builds_a_grouping(context, name):
    approach = clustering_approach(name)
    g = approach.builder(context)
    assert g.m == 12
    if name.endswith("HC"):
        assert g.k == 10  # m - 2 internal non-root nodes
    else:
        assert 0 <= g.k <= 10
    sums = g.matrix.sum(axis=1) if g.k else np.array([])
    assert ((sums > 1) & (sums < 12)).all()


def test_clustering_approach_determinism(context):
    a = clustering_approach("TS-EUC-HC").builder(context)
    b = clustering_approach("TS-EUC-HC").builder(context)
    np.testing.assert_array_equal(a.matrix, b.matrix)


def test_unknown_approach_name():
    with pytest.raises(ConfigError):
        clustering_approach("TS-EUC-XX")


def test_grouped_is_dedupe_union(context):
    union = grouped_approach(("TS-EUC-HC", "ER-EUC-HC")).builder(context)
    a = clustering_approach("TS-EUC-HC").builder(context)
    b = clustering_approach("ER-EUC-HC").builder(context)
    expected = {tuple(r) for r in np.vstack([a.matrix, b.matrix])}
    assert {tuple(r) for r in union.matrix} == expected


def test_scheme_and_twin(context):
    labels = cluster_labels(12)
    approach = scheme_approach("trend-season", labels)
    g = approach.builder(context)
    assert g.k == 6
    perm = np.roll(np.arange(12), 1)
    tw = twin_approach(approach, perm, "twin-1").builder(context)
    np.testing.assert_array_equal(tw.matrix, g.matrix[:, perm])
    with pytest.raises(ConfigError):
        twin_approach(base_approach(), perm, "nope")


def test_combination_requires_components():
    from hiercast.errors import ArgumentError

    with pytest.raises(ArgumentError):
        combination_approach(())
