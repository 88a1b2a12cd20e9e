import numpy as np
import pytest

from hiercast.baseforecast import (
    EtsModel,
    FitCache,
    fit_ets,
    forecast_ets,
    forecast_panel,
    seasonal_naive,
)
from hiercast.errors import ArgumentError, FitError
from hiercast.panel import Grouping
from hiercast.simulate import DgpConfig, simulate_panel


def make_model(trend="none", seasonal="none", s=1, n_obs=50, alpha=0.3, beta=0.1,
               gamma=0.1, phi=1.0, level=10.0, slope=0.0, seas=None):
    seas = np.zeros(s) if seas is None else np.asarray(seas, dtype=float)
    return EtsModel(
        trend=trend, seasonal=seasonal, seasonal_period=s, n_obs=n_obs,
        alpha=alpha, beta=beta, gamma=gamma, phi=phi,
        init_level=level, init_slope=slope, init_seasonal=seas,
        level=level, slope=slope, seasonal_states=seas,
        residuals=np.zeros(n_obs), sse=0.0, loglik=0.0, aicc=0.0,
    )


def recursion_oracle(y, s, model):
    """Pure-python one-step filter from the model's initial states."""
    level, slope = model.init_level, model.init_slope
    seas = model.init_seasonal.copy()
    phi = model.phi if model.trend == "damped-additive" else 1.0
    resid = []
    for t, obs in enumerate(y):
        f = level + (phi * slope if model.trend != "none" else 0.0)
        if model.seasonal == "additive":
            f += seas[t % s]
        e = obs - f
        resid.append(e)
        level = level + (phi * slope if model.trend != "none" else 0.0) + model.alpha * e
        if model.trend != "none":
            slope = phi * slope + model.beta * e
        if model.seasonal == "additive":
            seas[t % s] += model.gamma * e
    return np.array(resid)


def test_constant_series():
    model = fit_ets(np.full(40, 7.5), 1)
    assert model.name == "ANN"
    np.testing.assert_allclose(forecast_ets(model, 5), np.full(5, 7.5), atol=1e-8)
    np.testing.assert_allclose(model.residuals, 0.0, atol=1e-8)


def test_pure_line_trend_continuation():
    T, h = 60, 8
    model = fit_ets(np.arange(1.0, T + 1.0), 1)
    fc = forecast_ets(model, h)
    expected = np.arange(T + 1.0, T + h + 1.0)
    np.testing.assert_allclose(fc, expected, rtol=1e-3)


def test_flat_model_forecasts_level():
    model = make_model(level=3.25)
    np.testing.assert_allclose(forecast_ets(model, 6), np.full(6, 3.25))


def test_linear_recursion_forecast():
    model = make_model(trend="additive", level=2.0, slope=0.5)
    np.testing.assert_allclose(forecast_ets(model, 4), 2.0 + 0.5 * np.arange(1, 5))


def test_damped_trend_closed_form_matches_iteration():
    phi = 0.9
    level, slope = 5.0, 1.2
    model = make_model(trend="damped-additive", phi=phi, level=level, slope=slope)
    fc = forecast_ets(model, 10)
    # closed form: level + slope * sum_{i=1..k} phi^i
    expected = level + slope * np.array([sum(phi**i for i in range(1, k + 1)) for k in range(1, 11)])
    np.testing.assert_allclose(fc, expected, rtol=1e-12)


def test_seasonal_forecast_indexing():
    # forecasts repeat the final seasonal states at the right phases
    seas = np.array([1.0, -1.0])
    model = make_model(seasonal="additive", s=2, n_obs=10, level=5.0, seas=seas)
    fc = forecast_ets(model, 4)
    np.testing.assert_allclose(fc, [5.0 + seas[0], 5.0 + seas[1], 5.0 + seas[0], 5.0 + seas[1]])


def test_seasonal_naive_examples():
    np.testing.assert_array_equal(seasonal_naive([1, 2, 3, 4], 2, 2), [3, 4])
    np.testing.assert_array_equal(seasonal_naive([1, 2, 3, 4], 2, 4), [3, 4, 3, 4])
    np.testing.assert_array_equal(seasonal_naive([1, 2, 3, 4], 1, 3), [4, 4, 4])
    with pytest.raises(ArgumentError):
        seasonal_naive([1, 2], 3, 1)


def test_fit_errors():
    with pytest.raises(FitError):
        fit_ets(np.arange(5.0), 1)  # too short
    y = np.arange(30.0)
    y[3] = np.nan
    with pytest.raises(FitError):
        fit_ets(y, 1)
    with pytest.raises(ArgumentError):
        forecast_ets(make_model(), 0)


def test_fit_is_deterministic():
    rng = np.random.default_rng(11)
    y = rng.normal(size=80) + 0.05 * np.arange(80)
    a = fit_ets(y, 4)
    b = fit_ets(y, 4)
    assert a.name == b.name
    assert a.aicc == b.aicc
    assert (a.alpha, a.beta, a.gamma, a.phi) == (b.alpha, b.beta, b.gamma, b.phi)


def test_admissible_ranges_hold():
    rng = np.random.default_rng(123)
    for _ in range(12):
        y = rng.normal(size=48) + rng.uniform(-0.2, 0.2) * np.arange(48)
        model = fit_ets(y, 4)
        assert 0 < model.alpha < 1
        assert 0 <= model.beta < model.alpha or model.trend == "none"
        assert 0 <= model.gamma < 1 - model.alpha or model.seasonal == "none"
        if model.trend == "damped-additive":
            assert 0.8 <= model.phi <= 0.98


def test_residual_mean_on_noise():
    rng = np.random.default_rng(5)
    y = rng.normal(0.0, 1.0, 400)
    model = fit_ets(y, 1)
    assert abs(model.residuals.mean()) <= 3.0 / np.sqrt(400)


def test_residuals_match_recursion_oracle():
    from hiercast.baseforecast import hierarchy_series

    panel, _ = simulate_panel(DgpConfig(m=12, n_obs=60, seed=2))
    grouping = Grouping(np.array([[1.0] * 6 + [0.0] * 6, [0.0] * 6 + [1.0] * 6]))
    bundle = forecast_panel(panel.slice_rows(48), grouping, 6)
    ids, series = hierarchy_series(panel.slice_rows(48), grouping)
    for j in range(len(ids)):
        oracle = recursion_oracle(series[:, j], 2, bundle.models[j])
        np.testing.assert_allclose(bundle.residuals[:, j], oracle, atol=1e-12)


def test_forecast_panel_two_level_shape():
    panel, _ = simulate_panel(DgpConfig(m=12, n_obs=40, seed=3))
    bundle = forecast_panel(panel, Grouping(np.zeros((0, 12))), 4)
    assert bundle.point_forecasts.shape == (13, 4)
    assert bundle.residuals.shape == (40, 13)


def test_shared_rows_produce_identical_forecasts():
    # determinism: the same aggregate series gets the same forecast wherever it appears
    panel, _ = simulate_panel(DgpConfig(m=12, n_obs=40, seed=4))
    row = np.array([1.0] * 4 + [0.0] * 8)
    g1 = Grouping(np.vstack([row, np.roll(row, 4)]))
    g2 = Grouping(np.vstack([row, np.roll(row, 8)]))
    b1 = forecast_panel(panel, g1, 5)
    b2 = forecast_panel(panel, g2, 5)
    np.testing.assert_array_equal(b1.point_forecasts[1], b2.point_forecasts[1])


def test_fit_error_names_series():
    panel, _ = simulate_panel(DgpConfig(m=12, n_obs=40, seed=4))
    short = panel.slice_rows(5)
    with pytest.raises(FitError, match="total"):
        forecast_panel(short, Grouping(np.zeros((0, 12))), 2)


def test_fit_cache_reuses_models():
    cache = FitCache()
    y = np.arange(30.0)
    a = cache.fit(y, 1)
    b = cache.fit(y.copy(), 1)
    assert a is b
