import numpy as np
import pytest

from inertial_pd.rates import fit_rate_slope


def test_exact_power_law():
    k = np.arange(1, 2001)
    fit = fit_rate_slope(k.astype(float) ** -2.0, (10, 1000))
    assert fit.slope == pytest.approx(-2.0, abs=1e-9)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)


def test_constant_series_zero_slope():
    fit = fit_rate_slope(np.full(500, 3.7), (10, 400))
    assert fit.slope == pytest.approx(0.0, abs=1e-12)


def test_noisy_power_law_recovered():
    k = np.arange(1, 3001).astype(float)
    y = 5.0 * k ** -2.5 * (1.0 + 0.01 * np.sin(k))
    fit = fit_rate_slope(y, (10, 2500))
    assert fit.slope == pytest.approx(-2.5, abs=0.05)
    assert fit.intercept == pytest.approx(np.log(5.0), abs=0.05)


def test_nonpositive_values_shrink_window_with_warning():
    k = np.arange(1, 101).astype(float)
    y = k ** -1.0
    y[20:25] = 0.0
    with pytest.warns(UserWarning, match="shrunk"):
        fit = fit_rate_slope(y, (10, 90))
    assert fit.slope == pytest.approx(-1.0, abs=1e-9)


def test_empty_window_errors():
    with pytest.raises(ValueError):
        fit_rate_slope(np.ones(10), (20, 30))
    with pytest.raises(ValueError):
        fit_rate_slope(np.ones(10), (5, 5))
    with pytest.raises(ValueError):
        fit_rate_slope(np.zeros(100), (10, 90))


def test_custom_k_axis():
    k = np.array([2.0, 4.0, 8.0, 16.0, 32.0])
    fit = fit_rate_slope(k ** -3.0, (2, 32), k=k)
    assert fit.slope == pytest.approx(-3.0, abs=1e-12)
