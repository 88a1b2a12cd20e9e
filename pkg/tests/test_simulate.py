import numpy as np
import pytest

from hiercast.errors import ArgumentError, ConfigError
from hiercast.simulate import (
    CLUSTER_PEAK_ODD,
    DgpConfig,
    cluster_labels,
    simulate_panel,
    true_grouping,
)


def test_default_panel_shape():
    panel, labels = simulate_panel(DgpConfig(seed=0))
    assert panel.n_obs == 144
    assert panel.n_series == 121
    assert panel.seasonal_period == 2
    np.testing.assert_array_equal(np.bincount(labels)[1:], [20] * 6)
    np.testing.assert_allclose(panel.top_values(), panel.bottom_values().sum(axis=1))


def test_degenerate_noise_free_is_line_plus_constant():
    cfg = DgpConfig(m=12, n_obs=20, beta_range=(2.0, 2.0), gamma_range=(2.0, 2.0),
                    var_xi=0.0, var_eps_up=0.0, var_eps_down=0.0, seed=1)
    panel, labels = simulate_panel(cfg)
    t = np.arange(1, 21)
    slopes = {1: 0.001, 2: 0.001, 3: 0.0, 4: 0.0, 5: -0.002, 6: -0.002}
    for j, lab in enumerate(labels):
        y = panel.bottom_values()[:, j]
        np.testing.assert_allclose(y, slopes[lab] * t + 2.0, atol=1e-12)


def test_even_time_means_recover_peak_and_trough():
    # over even t, even-seasonality clusters sit at beta (E=2.5), odd ones at gamma (E=0.5)
    panel, labels = simulate_panel(DgpConfig(seed=0))
    t = np.arange(1, 145)
    even = t % 2 == 0
    bottoms = panel.bottom_values()
    slopes = {1: 0.001, 2: 0.001, 3: 0.0, 4: 0.0, 5: -0.002, 6: -0.002}
    for cl in range(1, 7):
        cols = np.flatnonzero(labels == cl)
        detrended = bottoms[:, cols] - np.outer(t, np.full(len(cols), slopes[cl]))
        mean_even = detrended[even].mean()
        expected = 0.5 if CLUSTER_PEAK_ODD[cl - 1] else 2.5
        assert abs(mean_even - expected) <= 0.1, (cl, mean_even)


def test_same_seed_bit_identical():
    a, _ = simulate_panel(DgpConfig(seed=42))
    b, _ = simulate_panel(DgpConfig(seed=42))
    assert a.values.tobytes() == b.values.tobytes()
    c, _ = simulate_panel(DgpConfig(seed=43))
    assert a.values.tobytes() != c.values.tobytes()


def test_true_groupings():
    labels = cluster_labels(120)
    g6 = true_grouping(labels, "trend-season")
    assert g6.k == 6
    np.testing.assert_array_equal(g6.matrix.sum(axis=1), [20] * 6)
    g3 = true_grouping(labels, "trend1")
    assert g3.middle_ids == ("increase", "none", "decrease")
    np.testing.assert_array_equal(g3.matrix.sum(axis=1), [40, 40, 40])
    g2 = true_grouping(labels, "trend2")
    assert sorted(g2.matrix.sum(axis=1)) == [40, 80]
    gs = true_grouping(labels, "season")
    np.testing.assert_array_equal(gs.matrix.sum(axis=1), [60, 60])
    with pytest.raises(ConfigError):
        true_grouping(labels, "bogus")


def test_groupings_partition_once_per_scheme():
    labels = cluster_labels(60)
    for scheme in ("trend-season", "trend1", "trend2", "season"):
        g = true_grouping(labels, scheme)
        np.testing.assert_array_equal(g.matrix.sum(axis=0), np.ones(60))


def test_xi_variance_recovered():
    # degenerate seasonal: every deviation from the known signal is xi
    cfg = DgpConfig(beta_range=(2.0, 2.0), gamma_range=(2.0, 2.0), seed=5)
    panel, labels = simulate_panel(cfg)
    t = np.arange(1, 145)
    slopes = {1: 0.001, 2: 0.001, 3: 0.0, 4: 0.0, 5: -0.002, 6: -0.002}
    resid = np.column_stack([
        panel.bottom_values()[:, j] - slopes[lab] * t - 2.0
        for j, lab in enumerate(labels)
    ])
    assert resid.size == 17280
    est = resid.var()
    assert abs(est - 0.25) <= 0.025  # within 10%


def test_config_validation():
    with pytest.raises(ArgumentError):
        DgpConfig(m=100)  # not divisible by 6
    with pytest.raises(ArgumentError):
        DgpConfig(n_obs=145)  # odd
    with pytest.raises(ArgumentError):
        DgpConfig(var_xi=-1.0)
