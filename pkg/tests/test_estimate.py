"""Monte Carlo estimation, fitting and classification tests."""

import math

import numpy as np
import pytest

from fracdep.analytic import FnbpParams, FppParams, GammaParams, delta_statistic
from fracdep.errors import DomainError, NumericalError
from fracdep.estimate import (CorrelationCurve, analytic_curve, default_fit_cutoff,
                              delta_empirical, fit_power_law, mc_correlation,
                              mc_marginal_moments)
from fracdep.sim import PathSpec, Seed


def geom_grid(lo=100.0, hi=1e6, n=25):
    return np.geomspace(lo, hi, n)


class TestFitPowerLaw:
    def test_recovers_exact_power_law(self):
        t = geom_grid()
        curve = CorrelationCurve(s=1.0, delta=None, t=t, corr=2.0 * t ** -0.7,
                                 std_error=None, source="ANALYTIC")
        fit = fit_power_law(curve, t_min_cutoff=0.0)
        assert fit.d_hat == pytest.approx(0.7, abs=1e-12)
        assert fit.c_hat == pytest.approx(2.0, rel=1e-12)
        assert fit.r_squared == pytest.approx(1.0, abs=1e-12)
        assert fit.label == "LRD"
        assert fit.n_points == 25

    def test_cutoff_filters_points(self):
        t = geom_grid()
        curve = CorrelationCurve(s=1.0, delta=None, t=t, corr=t ** -1.5,
                                 std_error=None, source="ANALYTIC")
        fit = fit_power_law(curve, t_min_cutoff=1e4)
        assert fit.n_points == int(np.sum(t >= 1e4))
        assert fit.label == "SRD"

    def test_insufficient_points(self):
        t = np.array([10.0, 20.0, 40.0, 80.0])
        curve = CorrelationCurve(s=1.0, delta=None, t=t, corr=t ** -0.5,
                                 std_error=None, source="ANALYTIC")
        with pytest.raises(DomainError):
            fit_power_law(curve, t_min_cutoff=0.0)

    def test_floor_discards_noise(self):
        t = geom_grid()
        corr = np.where(t < 1e5, t ** -0.5, 1e-14)
        curve = CorrelationCurve(s=1.0, delta=None, t=t, corr=corr,
                                 std_error=None, source="ANALYTIC")
        fit = fit_power_law(curve, t_min_cutoff=0.0)
        assert fit.d_hat == pytest.approx(0.5, abs=1e-10)

    def test_all_below_floor(self):
        t = geom_grid(n=8)
        curve = CorrelationCurve(s=1.0, delta=None, t=t,
                                 corr=np.full(8, 1e-15),
                                 std_error=None, source="ANALYTIC")
        with pytest.raises(DomainError):
            fit_power_law(curve, t_min_cutoff=0.0)

    def test_empirical_floor_uses_std_error(self):
        t = geom_grid(n=10)
        corr = t ** -0.5
        se = np.where(t > 1e5, corr, 1e-6)  # last points drown in noise
        curve = CorrelationCurve(s=1.0, delta=None, t=t, corr=corr,
                                 std_error=se, source="EMPIRICAL")
        fit = fit_power_law(curve, t_min_cutoff=0.0)
        assert fit.n_points == int(np.sum(t <= 1e5))

    def test_default_cutoff_policy(self):
        assert default_fit_cutoff(1.0, None) == 100.0
        assert default_fit_cutoff(1.0, 2.5) == 250.0


class TestAnalyticCurves:
    def test_fpn_decay_exponents(self):
        t = geom_grid()
        fit2 = fit_power_law(analytic_curve("fpn", FppParams(0.2, 1.0), 1.0, t,
                                            delta=1.0))
        assert 1.75 <= fit2.d_hat <= 1.85
        assert fit2.label == "SRD"
        fit3 = fit_power_law(analytic_curve("fpn", FppParams(0.3, 1.0), 1.0, t,
                                            delta=1.0))
        assert 1.90 <= fit3.d_hat <= 2.0

    @pytest.mark.parametrize("beta", [0.3, 0.5, 0.7])
    def test_fnbp_decay_exponents(self, beta):
        fn = FnbpParams(FppParams(beta, 1.0), GammaParams(1.0, 1.0))
        fit = fit_power_law(analytic_curve("fnbp", fn, 1.0, geom_grid()))
        assert abs(fit.d_hat - beta) <= 0.05
        assert fit.label == "LRD"

    @pytest.mark.parametrize("beta", [0.3, 0.5, 0.7])
    def test_fnbn_decay_exponents(self, beta):
        fn = FnbpParams(FppParams(beta, 1.0), GammaParams(1.0, 1.0))
        fit = fit_power_law(analytic_curve("fnbn", fn, 1.0, geom_grid(), delta=1.0))
        assert abs(fit.d_hat - (3.0 - beta) / 2.0) <= 0.05
        assert fit.label == "SRD"

    def test_fpp_is_long_range(self):
        fit = fit_power_law(analytic_curve("fpp", FppParams(0.5, 1.0), 1.0,
                                           geom_grid()))
        assert abs(fit.d_hat - 0.5) <= 0.05
        assert fit.label == "LRD"

    def test_monotone_decreasing_magnitude(self):
        curve = analytic_curve("fpn", FppParams(0.2, 1.0), 1.0, geom_grid(),
                               delta=1.0)
        assert np.all(np.diff(np.abs(curve.corr)) < 0.0)


class TestMcCorrelation:
    def test_poisson_disjoint_increments(self):
        spec = PathSpec("poisson", FppParams(1.0, 1.0), np.array([10.0]))
        curve = mc_correlation(spec, 1.0, np.array([10.0]), reps=4000,
                               seed=Seed(1), delta=1.0)
        assert abs(curve.corr[0]) <= 3.0 * curve.std_error[0]

    def test_fpp_matches_analytic(self):
        p = FppParams(0.5, 1.0)
        t = np.array([5.0, 10.0])
        step = 11.0 ** 0.5 / math.gamma(1.5) / 800
        spec = PathSpec("fpp", p, t, stable_step=step)
        curve = mc_correlation(spec, 1.0, t, reps=10000, seed=Seed(42))
        truth = analytic_curve("fpp", p, 1.0, t).corr
        for k in range(len(t)):
            assert abs(curve.corr[k] - truth[k]) <= 3.0 * curve.std_error[k]

    def test_fnbp_matches_analytic(self):
        fn = FnbpParams(FppParams(0.5, 1.0), GammaParams(1.0, 1.0))
        t = np.array([5.0, 10.0])
        spec = PathSpec("fnbp", fn, t,
                        stable_step=12.0 ** 0.5 / math.gamma(1.5) / 600)
        curve = mc_correlation(spec, 1.0, t, reps=8000, seed=Seed(11))
        truth = analytic_curve("fnbp", fn, 1.0, t).corr
        for k in range(len(t)):
            assert abs(curve.corr[k] - truth[k]) <= 3.0 * curve.std_error[k]

    def test_fpn_increments_match_exact_ratio(self):
        # the empirical increment correlation estimates the exact
        # covariance-over-variances ratio (not the large-t model curve)
        from fracdep.analytic import NoiseParams, fpn_covariance, fpn_variance
        p = FppParams(0.5, 1.0)
        noise = NoiseParams(p, 1.0)
        t = np.array([5.0, 10.0])
        spec = PathSpec("fpp", p, t, stable_step=11.0 ** 0.5 / math.gamma(1.5) / 700)
        curve = mc_correlation(spec, 1.0, t, reps=20000, seed=Seed(8), delta=1.0)
        for k, tk in enumerate(t):
            truth = fpn_covariance(noise, 1.0, tk) / math.sqrt(
                fpn_variance(noise, 1.0) * fpn_variance(noise, tk))
            assert abs(curve.corr[k] - truth) <= 3.0 * curve.std_error[k]

    def test_gamma_matches_sqrt_ratio(self):
        # independent increments give Corr[Y(s), Y(t)] = sqrt(s/t)
        spec = PathSpec("gamma", GammaParams(2.0, 1.0), np.array([4.0, 9.0]))
        curve = mc_correlation(spec, 1.0, np.array([4.0, 9.0]), reps=10000,
                               seed=Seed(23))
        for k, tk in enumerate((4.0, 9.0)):
            assert abs(curve.corr[k] - math.sqrt(1.0 / tk)) \
                <= 3.0 * curve.std_error[k]

    def test_thread_invariance(self):
        p = FppParams(0.5, 1.0)
        spec = PathSpec("fpp", p, np.array([5.0]),
                        stable_step=6.0 ** 0.5 / math.gamma(1.5) / 200)
        a = mc_correlation(spec, 1.0, np.array([5.0]), reps=600, seed=Seed(3),
                           threads=1)
        b = mc_correlation(spec, 1.0, np.array([5.0]), reps=600, seed=Seed(3),
                           threads=8)
        assert np.array_equal(a.corr, b.corr)
        assert np.array_equal(a.std_error, b.std_error)

    def test_validation(self):
        spec = PathSpec("poisson", FppParams(1.0, 1.0), np.array([10.0]))
        with pytest.raises(DomainError):
            mc_correlation(spec, 1.0, np.array([10.0]), reps=50, seed=Seed(1))
        with pytest.raises(DomainError):
            mc_correlation(spec, 20.0, np.array([10.0]), reps=200, seed=Seed(1))

    def test_degenerate_variance(self):
        spec = PathSpec("poisson", FppParams(1.0, 1e-9), np.array([10.0]))
        with pytest.raises(NumericalError):
            mc_correlation(spec, 1e-6, np.array([10.0]), reps=200, seed=Seed(1))


class TestMcMarginalMoments:
    def test_poisson_moments(self):
        spec = PathSpec("poisson", FppParams(1.0, 2.0), np.array([1.0, 3.0]))
        means, variances = mc_marginal_moments(spec, reps=30000, seed=Seed(9))
        for t, m, v in zip(spec.t_grid, means, variances):
            assert abs(m.value - 2.0 * t) <= 3.0 * m.std_error
            assert abs(v.value - 2.0 * t) <= 3.0 * v.std_error

    def test_std_error_halves_when_reps_quadruple(self):
        spec = PathSpec("gamma", GammaParams(1.0, 1.0), np.array([2.0]))
        m1, _ = mc_marginal_moments(spec, reps=2000, seed=Seed(5))
        m2, _ = mc_marginal_moments(spec, reps=8000, seed=Seed(5))
        assert m2[0].std_error / m1[0].std_error == pytest.approx(0.5, rel=0.25)


class TestStdErrorScaling:
    def test_doubling_reps_halves_bootstrap_se(self):
        # sqrt(2) shrink per doubling, within 30 percent, median of 5 trials
        spec = PathSpec("poisson", FppParams(1.0, 1.0), np.array([4.0]))
        ratios = []
        for trial in range(5):
            a = mc_correlation(spec, 1.0, np.array([4.0]), reps=800,
                               seed=Seed(100 + trial))
            b = mc_correlation(spec, 1.0, np.array([4.0]), reps=1600,
                               seed=Seed(200 + trial))
            ratios.append(b.std_error[0] / a.std_error[0])
        med = float(np.median(ratios))
        assert abs(med - 1.0 / math.sqrt(2.0)) <= 0.3 * 1.0 / math.sqrt(2.0)


class TestDeltaEmpirical:
    def test_poisson_ratio_is_one(self):
        table = delta_empirical(FppParams(1.0, 1.0), 2, [10, 50], reps=2000,
                                seed=Seed(77))
        for val, se in zip(table.value, table.std_error):
            assert abs(val - 1.0) <= 3.0 * se

    def test_matches_analytic(self):
        p = FppParams(0.5, 1.0)
        step = 200.0 ** 0.5 / math.gamma(1.5) / 1500
        table = delta_empirical(p, 2, [10, 100], reps=2000, seed=Seed(13),
                                stable_step=step)
        for m, val, se in zip(table.m, table.value, table.std_error):
            truth = delta_statistic(p, 2, int(m))
            assert abs(val - truth) <= 3.0 * se + 0.02 * truth

    def test_growth_confirmed_at_m1000(self):
        # the analytic ratio at m=1000 is ~14; simulation agrees and both
        # sit far above the claimed finite limit bound of <= 1
        p = FppParams(0.5, 1.0)
        step = 2000.0 ** 0.5 / math.gamma(1.5) / 2000
        table = delta_empirical(p, 2, [1000], reps=1000, seed=Seed(29),
                                stable_step=step)
        truth = delta_statistic(p, 2, 1000)
        assert abs(table.value[0] - truth) <= 3.0 * table.std_error[0] + 0.03 * truth
        assert table.value[0] > 5.0

    def test_validation(self):
        with pytest.raises(DomainError):
            delta_empirical(FppParams(0.5, 1.0), 2, [10], reps=100, seed=Seed(1))


class TestNbCovarianceOracle:
    def test_two_level_monte_carlo(self):
        # beta = 1: the gamma-mixed process is plain negative binomial in t;
        # the quadrature covariance must match a direct two-level simulation
        fn = FnbpParams(FppParams(1.0, 1.0), GammaParams(1.0, 1.0))
        s, t = 2.0, 5.0
        R = 1_000_000
        rng = Seed(314).rng()
        ys = rng.gamma(shape=s, scale=1.0, size=R)
        yt = ys + rng.gamma(shape=t - s, scale=1.0, size=R)
        qs = rng.poisson(ys)
        qt = qs + rng.poisson(yt - ys)
        prods = (qs - qs.mean()) * (qt - qt.mean())
        emp = float(np.cov(qs, qt, ddof=1)[0, 1])
        se = prods.std(ddof=1) / math.sqrt(R)
        from fracdep.analytic import fnbp_covariance
        assert abs(emp - fnbp_covariance(fn, s, t)) <= 3.0 * se
