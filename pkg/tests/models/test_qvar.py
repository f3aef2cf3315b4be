import numpy as np
import pandas as pd
import pytest
from scipy.stats import norm

from spillkit.conf.models import DgpSpec
from spillkit.core.exceptions import SingularSystemError, ValidationError
from spillkit.models.qvar import (
    check_loss,
    fit_quantile_var,
    load_quantile_fits,
    quantile_regression,
    rolling_quantile_var,
    rolling_windows,
    save_quantile_fits,
    solve_quantile_regression,
)
from spillkit.models.tvpvar import fit_static_var
from spillkit.panel.dataset import ReturnPanel
from spillkit.sim.synthdgp import make_generator, oracle_quantile_lp, simulate
from spillkit.spillover.connectedness import gfevd, summarize


def _design(rng, n, k):
    return np.column_stack([np.ones(n), rng.standard_normal((n, k - 1))])


def _gaussian_var(length, seed, sigma=1e-4):
    spec = DgpSpec(
        n_series=2,
        beta_true=[[0.5, 0.2], [0.1, 0.4]],
        sigma_true=[[sigma, 0.0], [0.0, sigma]],
        length=length,
        seed=seed,
    )
    return simulate(spec)


def test_check_loss():
    assert check_loss(np.array([2.0, -1.0, 0.0]), 0.1) == pytest.approx(0.2 + 0.9)


class TestQuantileRegression:
    @pytest.mark.parametrize("tau", [0.05, 0.3, 0.5, 0.95])
    def test_exact_line_interpolated(self, tau):
        x = np.linspace(-1.0, 1.0, 25)
        X = np.column_stack([np.ones_like(x), x])
        coef = quantile_regression(2.0 * x, X, tau)
        np.testing.assert_allclose(coef, [0.0, 2.0], atol=1e-12)

    def test_seven_points_match_enumeration(self):
        x = np.arange(1.0, 8.0)
        y = np.array([1.2, 1.9, 3.5, 3.9, 5.4, 5.8, 7.9])
        X = np.column_stack([np.ones(7), x])
        solution = solve_quantile_regression(y, X, 0.5)
        exact = oracle_quantile_lp(y, X, 0.5)
        assert solution.objective == pytest.approx(check_loss(y - X @ exact, 0.5), rel=1e-8)
        np.testing.assert_allclose(solution.coef, exact, atol=1e-10)

    @pytest.mark.parametrize("tau", [0.2, 0.5, 0.8])
    def test_lad_matches_enumeration(self, tau):
        rng = make_generator(31)
        X = _design(rng, 41, 3)
        y = X @ np.array([0.5, 1.0, -2.0]) + rng.standard_normal(41)
        coef = quantile_regression(y, X, tau)
        np.testing.assert_allclose(coef, oracle_quantile_lp(y, X, tau), atol=1e-9)

    def test_location_shift_slope_near_ols(self):
        rng = make_generator(32)
        x = rng.standard_normal(5000)
        y = 1.0 + 0.5 * x + rng.standard_normal(5000)
        X = np.column_stack([np.ones_like(x), x])
        slope = quantile_regression(y, X, 0.5)[1]
        ols_slope = np.linalg.lstsq(X, y, rcond=None)[0][1]
        lad_se = np.sqrt(np.pi / 2) / (np.sqrt(5000) * x.std())
        assert abs(slope - ols_slope) < 2 * lad_se

    @pytest.mark.parametrize("tau", [0.05, 0.5, 0.95])
    def test_objective_dominates_ols(self, tau):
        rng = make_generator(33)
        X = _design(rng, 400, 3)
        y = X @ np.array([0.1, 0.3, -0.2]) + rng.standard_t(4, size=400)
        solution = solve_quantile_regression(y, X, tau)
        ols = np.linalg.lstsq(X, y, rcond=None)[0]
        assert solution.objective <= check_loss(y - X @ ols, tau)

    @pytest.mark.parametrize("tau", [0.05, 0.25, 0.5, 0.95])
    def test_objective_matches_highs(self, tau):
        rng = make_generator(34)
        X = _design(rng, 801, 4)
        y = X @ np.array([0.0, 1.0, 0.5, -0.5]) + rng.standard_normal(801)
        irls = solve_quantile_regression(y, X, tau)
        highs = solve_quantile_regression(y, X, tau, method="highs")
        assert highs.path == "highs"
        assert irls.objective == pytest.approx(highs.objective, rel=1e-7)
        assert irls.objective <= highs.objective * (1.0 + 1e-9)

    def test_reflection_symmetry(self):
        rng = make_generator(35)
        X = _design(rng, 301, 3)
        y = X @ np.array([0.2, -0.4, 0.7]) + rng.standard_normal(301)
        up = quantile_regression(y, X, 0.3)
        down = quantile_regression(-y, X, 0.7)
        np.testing.assert_allclose(down, -up, atol=1e-9)

    def test_invalid_tau(self):
        X = np.column_stack([np.ones(5), np.arange(5.0)])
        with pytest.raises(ValidationError, match="Quantile level"):
            quantile_regression(np.arange(5.0), X, 1.0)

    def test_not_enough_rows(self):
        with pytest.raises(ValidationError, match="more rows"):
            quantile_regression(np.ones(2), np.eye(2), 0.5)

    def test_rank_deficient(self):
        X = np.column_stack([np.ones(10), np.ones(10)])
        with pytest.raises(SingularSystemError):
            quantile_regression(np.arange(10.0), X, 0.5)


class TestFitQuantileVar:
    def test_window_too_short(self, driver_panel):
        with pytest.raises(ValidationError, match="too short"):
            fit_quantile_var(driver_panel, 0.5, window=(0, 16))

    def test_window_outside_panel(self, driver_panel):
        with pytest.raises(ValidationError, match="outside"):
            fit_quantile_var(driver_panel, 0.5, window=(100, 700))

    @pytest.mark.parametrize("tau", [0.05, 0.5, 0.95])
    def test_residual_sign_condition(self, driver_panel, tau):
        fit = fit_quantile_var(driver_panel, tau)
        n_obs, n_series = fit.residuals.shape
        slack = (n_series + 2) / n_obs
        negative = np.mean(fit.residuals < 0, axis=0)
        assert np.all(negative >= tau - slack)
        assert np.all(negative <= tau + slack)

    def test_shapes_and_labels(self, driver_panel):
        fit = fit_quantile_var(driver_panel, 0.05, window=(100, 300))
        assert fit.beta_tau.shape == (3, 3)
        assert fit.intercept_tau.shape == (3,)
        assert fit.window == (100, 300)
        assert fit.end_date == driver_panel.dates[299]
        assert fit.residuals.shape == (199, 3)
        assert len(fit.solver_paths) == 3

    def test_sigma_is_raw_residual_second_moment(self, driver_panel):
        fit = fit_quantile_var(driver_panel, 0.05)
        e = fit.residuals
        np.testing.assert_allclose(fit.sigma_tau, e.T @ e / len(e))
        assert np.linalg.eigvalsh(fit.sigma_tau).min() >= 0.0

    def test_tail_sigma_keeps_residual_offset(self, driver_panel):
        fit = fit_quantile_var(driver_panel, 0.05)
        centred = np.cov(fit.residuals, rowvar=False, ddof=0)
        assert np.all(np.diag(fit.sigma_tau) > np.diag(centred))

    def test_median_close_to_ols_on_gaussian_var(self):
        panel = _gaussian_var(3000, seed=36)
        fit = fit_quantile_var(panel, 0.5)
        ols = fit_static_var(panel)
        assert np.all(np.abs(fit.beta_tau - ols.beta) < 3 * ols.beta_se())

    def test_tail_slope_follows_scale_loading(self):
        loading = 0.3
        spec = DgpSpec(
            n_series=2,
            beta_true=[[0.3, 0.0], [0.0, 0.3]],
            sigma_true=[[1.0, 0.0], [0.0, 1.0]],
            scale_loadings=[[loading, 0.0], [0.0, 0.0]],
            length=3000,
            seed=37,
        )
        panel = simulate(spec)
        tail = fit_quantile_var(panel, 0.05)
        centre = fit_quantile_var(panel, 0.5)
        expected = loading * norm.ppf(0.05)
        shift = tail.beta_tau[0, 0] - centre.beta_tau[0, 0]
        assert abs(shift - expected) < 0.2
        assert abs(tail.beta_tau[0, 1] - centre.beta_tau[0, 1]) < 0.2

    @pytest.mark.slow
    def test_intercepts_monotone_in_tau(self):
        passed = 0
        for seed in range(100):
            panel = _gaussian_var(300, seed=1000 + seed)
            intercepts = [fit_quantile_var(panel, tau).intercept_tau for tau in (0.05, 0.5, 0.95)]
            passed += bool(np.all(np.diff(np.stack(intercepts), axis=0) >= 0))
        assert passed >= 95


class TestRollingQuantileVar:
    def test_full_length_window_is_full_sample_fit(self, driver_panel):
        rolling = rolling_quantile_var(driver_panel, 0.5, window_len=driver_panel.n_obs)
        full = fit_quantile_var(driver_panel, 0.5)
        assert len(rolling) == 1
        np.testing.assert_array_equal(rolling[0].beta_tau, full.beta_tau)
        np.testing.assert_array_equal(rolling[0].sigma_tau, full.sigma_tau)

    def test_disjoint_window_count(self, driver_panel):
        rolling = rolling_quantile_var(driver_panel, 0.5, window_len=150, step=150)
        assert len(rolling) == (600 - 150) // 150 + 1
        assert [fit.window for fit in rolling] == rolling_windows(600, 150, 150)
        assert list(rolling.dates) == [driver_panel.dates[e - 1] for _, e in rolling_windows(600, 150, 150)]

    def test_threads_keep_window_order(self, driver_panel):
        serial = rolling_quantile_var(driver_panel, 0.05, window_len=200, step=50)
        threaded = rolling_quantile_var(driver_panel, 0.05, window_len=200, step=50, workers=3)
        assert list(serial.dates) == list(threaded.dates)
        for a, b in zip(serial, threaded):
            np.testing.assert_array_equal(a.beta_tau, b.beta_tau)

    def test_window_longer_than_panel(self, driver_panel):
        with pytest.raises(ValidationError, match="exceeds"):
            rolling_quantile_var(driver_panel, 0.5, window_len=601)

    def test_failing_window(self):
        rng = make_generator(38)
        values = rng.standard_normal((90, 2)) * 0.01
        values[:40, 1] = 0.0
        panel = ReturnPanel(pd.bdate_range("2020-01-01", periods=90), ("a", "b"), values)
        with pytest.raises(SingularSystemError, match="Window ending"):
            rolling_quantile_var(panel, 0.5, window_len=30, step=30)
        rolling = rolling_quantile_var(panel, 0.5, window_len=30, step=30, skip_failures=True)
        assert len(rolling) == 2
        assert rolling.failed_dates == (panel.dates[29],)

    def test_stationary_variation_bounded(self):
        panel = _gaussian_var(2000, seed=39)
        rolling = rolling_quantile_var(panel, 0.5, window_len=200, step=200)
        spread = np.std(np.stack([fit.beta_tau for fit in rolling]), axis=0)
        single_se = np.sqrt(np.pi / 2) * fit_static_var(panel.slice_rows(0, 200)).beta_se()
        assert np.all(spread < 4 * single_se)


def test_fits_round_trip(tmp_path, driver_panel):
    fits = list(rolling_quantile_var(driver_panel, 0.95, window_len=300, step=150))
    loaded = load_quantile_fits(save_quantile_fits(fits, tmp_path / "q0.95.json"))
    assert len(loaded) == len(fits)
    for a, b in zip(loaded, fits):
        np.testing.assert_array_equal(a.beta_tau, b.beta_tau)
        np.testing.assert_array_equal(a.intercept_tau, b.intercept_tau)
        assert a.window == b.window
        assert a.end_date == b.end_date
        assert a.tau == b.tau
        assert a.residuals is None


def _common_factor_t_panel(seed, n_series=4, rho=0.3, length=1500):
    spec = DgpSpec(
        n_series=n_series,
        beta_true=(0.1 * np.eye(n_series)).tolist(),
        sigma_true=((1 - rho) * np.eye(n_series) + rho).tolist(),
        innovation="student_t",
        df=3.0,
        length=length,
        seed=seed,
    )
    return simulate(spec)


def _static_quantile_tci(panel, tau, horizon=5):
    fit = fit_quantile_var(panel, tau)
    return summarize(gfevd(fit.beta_tau, fit.sigma_tau, horizon)).tci


@pytest.mark.slow
def test_tail_connectedness_exceeds_median():
    passed = 0
    for seed in range(50):
        panel = _common_factor_t_panel(2000 + seed)
        tci = {tau: _static_quantile_tci(panel, tau) for tau in (0.05, 0.5, 0.95)}
        passed += tci[0.05] > tci[0.5] and tci[0.95] > tci[0.5]
    assert passed >= 45


def test_tail_connectedness_exceeds_median_single_draw():
    panel = _common_factor_t_panel(7)
    tci = {tau: _static_quantile_tci(panel, tau) for tau in (0.05, 0.5, 0.95)}
    assert tci[0.05] > tci[0.5]
    assert tci[0.95] > tci[0.5]
