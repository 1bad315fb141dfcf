import math

import numpy as np
import pytest

from barista import (
    BaristaParams,
    BidSample,
    EstimationError,
    GaConfig,
    OneStage,
    QcConfig,
    bootstrap_se,
    cdf,
    default_bounds,
    default_qc_config,
    ecdf,
    estimate_c,
    ga_fit,
    grid_search,
    loglik,
    loglik_gradient,
    loglik_hessian,
    mean_count,
    mle_nhpp1,
    normalization_constant,
    pdf,
    qc_alpha,
    qc_alpha3_survival,
    qc_changepoints,
    qc_fit,
    sample_fixed_n,
)
from conftest import random_params


def perturbed(p: BaristaParams, a1=None, a2=None, a3=None) -> BaristaParams:
    return BaristaParams(
        a1 if a1 is not None else p.alpha1,
        a2 if a2 is not None else p.alpha2,
        a3 if a3 is not None else p.alpha3,
        p.d1, p.d2, p.c, p.T,
    )


def fd_gradient(sample: BidSample, p: BaristaParams, h: float = 1e-6) -> np.ndarray:
    a = np.array([p.alpha1, p.alpha2, p.alpha3])
    out = np.empty(3)
    for j in range(3):
        hj = h * max(1.0, a[j])
        up, dn = a.copy(), a.copy()
        up[j] += hj
        dn[j] -= hj
        out[j] = (loglik(sample, perturbed(p, *up)) - loglik(sample, perturbed(p, *dn))) / (2 * hj)
    return out


def fd_hessian_of_gradient(sample: BidSample, p: BaristaParams, h: float = 1e-6) -> np.ndarray:
    a = np.array([p.alpha1, p.alpha2, p.alpha3])
    out = np.empty((3, 3))
    for j in range(3):
        hj = h * max(1.0, a[j])
        up, dn = a.copy(), a.copy()
        up[j] += hj
        dn[j] -= hj
        g_up = loglik_gradient(sample, perturbed(p, *up))
        g_dn = loglik_gradient(sample, perturbed(p, *dn))
        out[:, j] = (g_up - g_dn) / (2 * hj)
    return out


def _case(seed: int) -> tuple[BidSample, BaristaParams]:
    rng = np.random.default_rng(seed)
    p = random_params(rng)
    n = int(rng.integers(200, 1500))
    return sample_fixed_n(p, n, seed=seed + 10_000), p


class TestEcdf:
    def test_values(self):
        s = BidSample(times=np.array([0.1, 0.4, 0.4, 0.8]), T=1.0)
        assert ecdf(s, 0.05) == 0.0
        assert ecdf(s, 0.4) == 0.75
        assert ecdf(s, 0.9) == 1.0
        np.testing.assert_allclose(ecdf(s, np.array([0.1, 0.5])), [0.25, 0.75])

    def test_empty_rejected(self):
        with pytest.raises(EstimationError):
            ecdf(BidSample(times=np.array([]), T=1.0), 0.5)


class TestQuickCrudeOnExactCdf:
    """With the true CDF supplied, every plug-in formula is exact."""

    def test_alpha_recovery(self, p_star):
        F = lambda t: cdf(p_star, t)
        T = p_star.T
        a1 = qc_alpha(F, T, T - 0.001, T - 1.0)
        a2 = qc_alpha(F, T, T - 3.0, T - 6.9)
        a3 = qc_alpha3_survival(F, T, T - 2.0 / 1440, T - 1.0 / 1440)
        assert a1 == pytest.approx(3.0, rel=1e-9)
        assert a2 == pytest.approx(0.4, rel=1e-9)
        assert a3 == pytest.approx(1.0, rel=1e-9)

    def test_changepoint_recovery(self, p_star):
        F = lambda t: cdf(p_star, t)
        safe = (1.0, 3.0, 6.0, p_star.T - 2.0 / 1440)
        d1, d2 = qc_changepoints(F, (3.0, 0.4, 1.0), safe, p_star.T)
        assert d1 == pytest.approx(2.5, rel=1e-9)
        assert d2 == pytest.approx(5.0 / 1440, rel=1e-9)

    def test_exact_on_random_vectors(self):
        rng = np.random.default_rng(99)
        for _ in range(10):
            p = random_params(rng)
            # need genuinely three-stage vectors with distinct exponents
            if p.d1 < 0.05 * p.T or p.d2 < 1e-4 * p.T or p.d2 > 0.2 * p.T:
                continue
            if abs(p.alpha1 - p.alpha2) < 0.1 or abs(p.alpha2 - p.alpha3) < 0.1:
                continue
            F = lambda t: cdf(p, t)
            T, d1, d2 = p.T, p.d1, p.d2
            cut = T - d2
            a1 = qc_alpha(F, T, T - 0.05 * d1, T - 0.9 * d1)
            a2 = qc_alpha(F, T, T - (d1 + 0.05 * (cut - d1)), T - (d1 + 0.9 * (cut - d1)))
            a3 = qc_alpha3_survival(F, T, cut + 0.2 * d2, cut + 0.8 * d2)
            assert a1 == pytest.approx(p.alpha1, rel=1e-7)
            assert a2 == pytest.approx(p.alpha2, rel=1e-7)
            assert a3 == pytest.approx(p.alpha3, rel=1e-7)
            safe = (0.5 * d1, d1 + 0.2 * (cut - d1), d1 + 0.8 * (cut - d1), cut + 0.5 * d2)
            d1_hat, d2_hat = qc_changepoints(F, (a1, a2, a3), safe, T)
            assert d1_hat == pytest.approx(d1, rel=1e-6)
            assert d2_hat == pytest.approx(d2, rel=1e-6)

    def test_flat_cdf_rejected(self):
        with pytest.raises(EstimationError):
            qc_alpha(lambda t: 0.5, 7.0, 6.0, 1.0)
        with pytest.raises(EstimationError):
            qc_alpha3_survival(lambda t: 1.0, 7.0, 6.9, 6.99)

    def test_equal_exponents_rejected(self, p_star):
        F = lambda t: cdf(p_star, t)
        with pytest.raises(EstimationError):
            qc_changepoints(F, (0.4, 0.4, 1.0), (1.0, 3.0, 6.0, 6.99), 7.0)

    def test_point_ordering_validated(self):
        with pytest.raises(ValueError):
            qc_alpha(lambda t: t, 7.0, 1.0, 6.0)  # t < s
        with pytest.raises(ValueError):
            qc_alpha3_survival(lambda t: t / 7, 7.0, 6.9, 6.5)


class TestQcFit:
    def test_recovers_on_large_sample(self, p_star):
        s = sample_fixed_n(p_star, 5000, seed=23)
        fit = qc_fit(s, default_qc_config(p_star.T))
        assert fit.method == "quick-crude"
        assert fit.params["alpha1"] == pytest.approx(3.0, abs=0.5)
        assert fit.params["alpha2"] == pytest.approx(0.4, abs=0.05)
        assert fit.params["d1"] == pytest.approx(2.5, abs=0.4)
        # recovered scale matches the count identity
        assert fit.c_hat == pytest.approx(
            s.n / mean_count(fit.family.as_barista().with_c(1.0), p_star.T), rel=1e-12)

    def test_windows_must_fit_horizon(self, p_star):
        s = sample_fixed_n(p_star, 100, seed=0)
        cfg = default_qc_config(14.0)
        with pytest.raises(ValueError):
            qc_fit(s, cfg)

    def test_too_small_sample_rejected(self, p_star):
        s = sample_fixed_n(p_star, 1, seed=0)
        with pytest.raises(EstimationError):
            qc_fit(s, default_qc_config(7.0))


class TestQcConfig:
    def test_default_scales_with_horizon(self):
        cfg = default_qc_config(7.0)
        assert cfg.stage1_window == (0.001, 1.0)
        assert cfg.stage2_window == (3.0, 6.9)
        assert cfg.stage3_points == pytest.approx((7.0 - 2.0 / 1440, 7.0 - 1.0 / 1440))
        assert cfg.safe_points == pytest.approx((1.0, 3.0, 6.0, 7.0 - 2.0 / 1440))

    def test_ordering_enforced(self):
        with pytest.raises(ValueError):
            QcConfig((1.0, 0.5), (3.0, 6.9), (6.99, 6.999), (1.0, 3.0, 6.0, 6.99))
        with pytest.raises(ValueError):
            QcConfig((0.001, 1.0), (3.0, 6.9), (6.99, 6.999), (3.0, 1.0, 6.0, 6.99))


class TestLoglik:
    @pytest.mark.parametrize("seed", range(6))
    def test_equals_sum_of_log_densities(self, seed):
        s, p = _case(seed)
        direct = float(np.sum(np.log(pdf(p, s.times))))
        assert loglik(s, p) == pytest.approx(direct, rel=1e-12)

    def test_horizon_mismatch_rejected(self, p_star):
        s = BidSample(times=np.array([0.5]), T=5.0)
        with pytest.raises(ValueError):
            loglik(s, p_star)

    def test_empty_sample(self, p_star):
        assert loglik(BidSample(times=np.array([]), T=7.0), p_star) == 0.0

    def test_boundary_events_counted_consistently(self, p_star):
        # events exactly at the changepoints must not produce NaN or disagree
        # with the density identity
        times = np.sort(np.array([2.5, 2.5, 7.0 - 5.0 / 1440, 3.0, 1.0]))
        s = BidSample(times=times, T=7.0)
        direct = float(np.sum(np.log(pdf(p_star, s.times))))
        assert loglik(s, p_star) == pytest.approx(direct, rel=1e-12)


class TestGradient:
    @pytest.mark.parametrize("seed", range(25))
    def test_matches_finite_differences(self, seed):
        s, p = _case(seed)
        g = loglik_gradient(s, p)
        g_fd = fd_gradient(s, p)
        np.testing.assert_allclose(g, g_fd, rtol=1e-5, atol=1e-5 * max(1.0, np.abs(g).max()))

    @pytest.mark.parametrize("seed", range(10))
    def test_normalization_term_richardson(self, seed):
        """The model part of the gradient is n * d(log C); check it against a
        fourth-order difference of log C itself."""
        rng = np.random.default_rng(seed)
        p = random_params(rng)
        n = 100
        s = sample_fixed_n(p, n, seed=seed)
        g = loglik_gradient(s, p)
        # remove the data terms to isolate n * dlogC
        times = s.times
        logrem = np.log1p(-times / p.T)
        n1 = int(np.sum(times <= p.d1))
        n3 = int(np.sum(times > p.T - p.d2))
        S1 = float(np.sum(logrem[times <= p.d1]))
        S3 = float(np.sum(logrem[times > p.T - p.d2]))
        S2 = float(np.sum(logrem)) - S1 - S3
        L1 = math.log(1.0 - p.d1 / p.T)
        L2 = math.log(p.d2 / p.T) if (p.d2 > 0 and n3 > 0) else 0.0
        data = np.array([-n1 * L1 + S1, n1 * L1 + n3 * L2 + S2, -n3 * L2 + S3])
        model_term = g - data

        def logC(a1, a2, a3):
            return math.log(normalization_constant(perturbed(p, a1, a2, a3)))

        a = np.array([p.alpha1, p.alpha2, p.alpha3])
        for j in range(3):
            h = 1e-4 * max(1.0, a[j])
            e = np.zeros(3)
            e[j] = 1.0
            d4 = (8 * (logC(*(a + h * e)) - logC(*(a - h * e)))
                  - (logC(*(a + 2 * h * e)) - logC(*(a - 2 * h * e)))) / (12 * h)
            assert model_term[j] == pytest.approx(n * d4, rel=1e-8, abs=1e-8 * n)

    def test_vanishes_at_embedded_one_stage_mle(self):
        one = OneStage(alpha=0.8, c=3.0, T=2.0).as_barista()
        s = sample_fixed_n(one, 800, seed=5)
        alpha_hat, _ = mle_nhpp1(s)
        at_mle = OneStage(alpha=alpha_hat, c=3.0, T=2.0).as_barista()
        g = loglik_gradient(s, at_mle)
        # moving all three exponents together is the one-stage score
        assert float(np.sum(g)) == pytest.approx(0.0, abs=1e-6 * s.n)


class TestHessian:
    @pytest.mark.parametrize("seed", range(12))
    def test_matches_differenced_gradient(self, seed):
        s, p = _case(seed)
        h = loglik_hessian(s, p)
        h_fd = fd_hessian_of_gradient(s, p)
        np.testing.assert_allclose(h, h_fd, rtol=1e-4, atol=1e-6 * max(1.0, np.abs(h).max()))

    def test_symmetric(self, p_star):
        s = sample_fixed_n(p_star, 300, seed=1)
        h = loglik_hessian(s, p_star)
        np.testing.assert_array_equal(h, h.T)

    def test_degenerate_changepoints_finite(self):
        p = BaristaParams(1.5, 0.7, 2.0, 0.0, 0.0, 1.0, 3.0)
        s = sample_fixed_n(p, 200, seed=2)
        h = loglik_hessian(s, p)
        assert np.all(np.isfinite(h))
        # entries tied to the vanished stages are exactly zero; allow FD noise
        np.testing.assert_allclose(h, fd_hessian_of_gradient(s, p), rtol=1e-4, atol=1e-7)


class TestClosedForms:
    def test_one_stage_mle_example(self):
        s = BidSample(times=np.sort([1 - math.exp(-1), 1 - math.exp(-2)]), T=1.0)
        alpha_hat, c_hat = mle_nhpp1(s)
        assert alpha_hat == pytest.approx(2.0 / 3.0, rel=1e-15)
        assert c_hat == pytest.approx(4.0 / 3.0, rel=1e-15)

    def test_one_stage_mle_consistency(self):
        one = OneStage(alpha=1.7, c=5.0, T=4.0).as_barista()
        s = sample_fixed_n(one, 20_000, seed=3)
        alpha_hat, _ = mle_nhpp1(s)
        assert alpha_hat == pytest.approx(1.7, rel=0.05)

    def test_mle_rejects_degenerate(self):
        with pytest.raises(EstimationError):
            mle_nhpp1(BidSample(times=np.array([]), T=1.0))
        with pytest.raises(EstimationError):
            mle_nhpp1(BidSample(times=np.array([0.0, 0.0]), T=1.0))

    def test_estimate_c_flat_process(self):
        # all exponents 1: the intensity is flat, m(T; c=1) = T
        flat = BaristaParams(1.0, 1.0, 1.0, 2.0, 1.0, 123.0, 7.0)
        assert estimate_c(flat, 14) == pytest.approx(2.0, rel=1e-12)

    def test_estimate_c_matches_count(self, p_star):
        c_hat = estimate_c(p_star, 5000)
        assert c_hat * mean_count(p_star.with_c(1.0), p_star.T) == pytest.approx(5000.0)

    def test_estimate_c_needs_events(self, p_star):
        with pytest.raises(ValueError):
            estimate_c(p_star, 0)


class TestGridSearch:
    def test_finds_best_axis_point(self):
        one = OneStage(alpha=0.8, c=3.0, T=2.0).as_barista()
        s = sample_fixed_n(one, 2000, seed=4)
        alpha_hat, _ = mle_nhpp1(s)
        grid = {"alpha": np.linspace(0.5, 1.2, 141)}
        fit = grid_search(s, "one-stage", grid)
        # the grid winner brackets the closed-form optimum within one step
        assert abs(fit.params["alpha"] - alpha_hat) <= 0.005 + 1e-12
        assert fit.method == "grid"

    def test_three_stage_grid(self, p_star):
        s = sample_fixed_n(p_star, 3000, seed=6)
        grid = {
            "alpha1": [2.0, 3.0, 4.0],
            "alpha2": [0.3, 0.4, 0.5],
            "alpha3": [0.7, 1.0, 1.3],
            "d1": [2.0, 2.5, 3.0],
            "d2": [2.0 / 1440, 5.0 / 1440, 10.0 / 1440],
        }
        fit = grid_search(s, "three-stage", grid)
        assert fit.params["alpha1"] == 3.0
        assert fit.params["alpha2"] == 0.4
        assert fit.params["d1"] == 2.5
        assert fit.loglik == pytest.approx(loglik(s, fit.family.as_barista()), rel=1e-12)

    def test_infeasible_points_skipped(self):
        s = BidSample(times=np.array([0.5, 1.0]), T=2.0)
        grid = {"alpha1": [1.0], "alpha2": [1.0], "alpha3": [1.0],
                "d1": [1.5, 0.5], "d2": [1.0]}
        fit = grid_search(s, "three-stage", grid)  # d1=1.5 with d2=1.0 invalid
        assert fit.params["d1"] == 0.5

    def test_all_infeasible_rejected(self):
        s = BidSample(times=np.array([0.5]), T=2.0)
        grid = {"alpha1": [1.0], "alpha2": [1.0], "alpha3": [1.0],
                "d1": [1.5], "d2": [1.0]}
        with pytest.raises(EstimationError):
            grid_search(s, "three-stage", grid)

    def test_missing_axis_rejected(self):
        s = BidSample(times=np.array([0.5]), T=2.0)
        with pytest.raises(ValueError, match="alpha3"):
            grid_search(s, "two-stage", {"alpha2": [1.0], "d2": [0.0]})


class TestGa:
    def test_history_never_decreases(self, p_star):
        s = sample_fixed_n(p_star, 800, seed=8)
        cfg = GaConfig(bounds=default_bounds("three-stage", 7.0), generations=60, seed=0)
        fit = ga_fit(s, "three-stage", cfg)
        hist = np.asarray(fit.history)
        assert hist.size == 61
        assert np.all(np.diff(hist) >= 0)

    def test_deterministic(self, p_star):
        s = sample_fixed_n(p_star, 500, seed=9)
        cfg = GaConfig(bounds=default_bounds("three-stage", 7.0), generations=40, seed=3)
        a = ga_fit(s, "three-stage", cfg)
        b = ga_fit(s, "three-stage", cfg)
        assert a.params == b.params
        assert a.loglik == b.loglik

    def test_one_stage_recovery(self):
        one = OneStage(alpha=0.8, c=3.0, T=2.0).as_barista()
        s = sample_fixed_n(one, 2000, seed=10)
        alpha_hat, _ = mle_nhpp1(s)
        cfg = GaConfig(bounds=((0.1, 15.0),), generations=120, seed=0)
        fit = ga_fit(s, "one-stage", cfg)
        assert fit.params["alpha"] == pytest.approx(alpha_hat, rel=1e-3)
        assert fit.loglik <= loglik(s, OneStage(alpha_hat, 1.0, 2.0).as_barista()) + 1e-9

    def test_pinned_gene(self, p_star):
        s = sample_fixed_n(p_star, 400, seed=11)
        bounds = ((3.0, 3.0), (0.1, 1.0), (0.5, 15.0), (2.5, 2.5), (0.0, 0.01))
        fit = ga_fit(s, "three-stage", GaConfig(bounds=bounds, generations=30, seed=1))
        assert fit.params["alpha1"] == 3.0
        assert fit.params["d1"] == 2.5

    def test_bounds_length_checked(self, p_star):
        s = sample_fixed_n(p_star, 50, seed=0)
        with pytest.raises(ValueError):
            ga_fit(s, "two-stage", GaConfig(bounds=((0.1, 1.0),)))

    def test_config_validation(self):
        with pytest.raises(ValueError):
            GaConfig(bounds=((0.1, 1.0),), population_size=1)
        with pytest.raises(ValueError):
            GaConfig(bounds=((0.1, 1.0),), elite_fraction=0.0)
        with pytest.raises(ValueError):
            GaConfig(bounds=((1.0, 0.5),))
        with pytest.raises(ValueError):
            GaConfig(bounds=((0.1, 1.0),), mutation_scale=(0.1, 0.2))


class TestDefaultBounds:
    def test_cover_reference_regimes(self):
        lo_hi = default_bounds("three-stage", 7.0)
        truth = (3.0, 0.4, 1.0, 2.5, 5.0 / 1440)
        for (lo, hi), v in zip(lo_hi, truth):
            assert lo <= v <= hi
        two = default_bounds("two-stage", 5.0)
        for (lo, hi), v in zip(two, (0.3, 7.7, 1.0 / 1440)):
            assert lo <= v <= hi

    def test_unknown_family(self):
        with pytest.raises(ValueError):
            default_bounds("four-stage", 7.0)


class TestBootstrap:
    def test_deterministic(self):
        one = OneStage(alpha=0.9, c=2.0, T=3.0).as_barista()
        s = sample_fixed_n(one, 400, seed=12)

        def fitter(sample):
            a, c = mle_nhpp1(sample)
            from barista import FitResult

            fam = OneStage(a, c, sample.T)
            return FitResult(fam, loglik(sample, fam.as_barista()), "closed-form", c)

        se_a = bootstrap_se(s, fitter, 50, seed=7)
        se_b = bootstrap_se(s, fitter, 50, seed=7)
        assert se_a == se_b
        assert 0.0 < se_a["alpha"] < 0.5

    def test_matches_asymptotic_scale(self):
        # SE of the one-stage exponent is alpha/sqrt(n) asymptotically
        one = OneStage(alpha=1.2, c=8.0, T=5.0).as_barista()
        s = sample_fixed_n(one, 2500, seed=13)

        def fitter(sample):
            a, c = mle_nhpp1(sample)
            from barista import FitResult

            fam = OneStage(a, c, sample.T)
            return FitResult(fam, 0.0, "closed-form", c)

        se = bootstrap_se(s, fitter, 200, seed=1)
        assert se["alpha"] == pytest.approx(1.2 / math.sqrt(2500), rel=0.25)

    def test_failure_fraction_enforced(self, p_star):
        s = sample_fixed_n(p_star, 50, seed=0)

        def bad_fitter(sample):
            raise EstimationError("nope")

        with pytest.raises(EstimationError, match="replicates"):
            bootstrap_se(s, bad_fitter, 10, seed=0)

    def test_needs_two_replicates(self, p_star):
        s = sample_fixed_n(p_star, 10, seed=0)
        with pytest.raises(ValueError):
            bootstrap_se(s, lambda x: None, 1, seed=0)
