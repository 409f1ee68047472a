import logging
import math

import numpy as np
import pytest
from scipy import integrate, stats

from basketopt.core import ArmSpec, HyperPrior, ScaledInvChiSq, HalfCauchy, TrialSpec
from basketopt.inference import (
    McmcControl,
    ObservedData,
    PosteriorDraws,
    beta_binomial_posterior,
    beta_tail_prob,
    bhm_sample,
    posterior_efficacy_prob,
    posterior_futility_prob,
)

HYPER = HyperPrior()
IG28 = ScaledInvChiSq.from_inverse_gamma(2.0, 8.0)


def uniform_spec(J, p0=0.05, p1=0.20):
    return TrialSpec(arms=tuple(ArmSpec(p0, p1, 20, (10, 20)) for _ in range(J)))


class TestBetaBinomialPosterior:
    def test_paper_example(self):
        assert beta_binomial_posterior(3, 10, 0.1, 0.1) == (3.1, 7.1)

    def test_no_data_returns_prior(self):
        assert beta_binomial_posterior(0, 0, 0.1, 0.1) == (0.1, 0.1)

    def test_all_responders_uniform_prior(self):
        assert beta_binomial_posterior(10, 10, 1.0, 1.0) == (11.0, 1.0)

    def test_rejects_x_above_n(self):
        with pytest.raises(ValueError):
            beta_binomial_posterior(11, 10, 0.1, 0.1)


class TestBetaTailProb:
    def test_uniform_symmetry(self):
        assert beta_tail_prob((1.0, 1.0), 0.5, "greater") == pytest.approx(0.5, abs=1e-12)

    def test_against_adaptive_quadrature(self):
        val = beta_tail_prob((3.1, 7.1), 0.125, "greater")
        ref, err = integrate.quad(lambda p: stats.beta.pdf(p, 3.1, 7.1), 0.125, 1.0,
                                  epsabs=1e-12, limit=200)
        assert err < 1e-10
        assert val == pytest.approx(ref, abs=1e-8)

    def test_full_mass_at_zero_threshold(self):
        assert beta_tail_prob((3.1, 7.1), 1e-300, "greater") == pytest.approx(1.0, abs=1e-10)

    def test_directions_complementary(self):
        a = beta_tail_prob((2.5, 4.0), 0.3, "greater")
        b = beta_tail_prob((2.5, 4.0), 0.3, "leq")
        assert a + b == pytest.approx(1.0, abs=1e-12)


class TestSamplerBasics:
    def test_determinism_bit_identical(self, fast_control):
        spec = uniform_spec(3)
        data = ObservedData(n=(10, 10, 10), x=(2, 1, 4))
        ctrl = fast_control.with_seed(123)
        a = bhm_sample(data, spec, IG28, HYPER, ctrl)
        b = bhm_sample(data, spec, IG28, HYPER, ctrl)
        assert np.array_equal(a.p, b.p)
        assert np.array_equal(a.sigma2, b.sigma2)
        c = bhm_sample(data, spec, IG28, HYPER, fast_control.with_seed(124))
        assert not np.array_equal(a.p, c.p)

    def test_draw_ranges(self, fast_control):
        spec = uniform_spec(2)
        d = bhm_sample(ObservedData(n=(10, 0), x=(10, 0)), spec, IG28, HYPER, fast_control)
        assert np.all(d.p > 0.0) and np.all(d.p < 1.0)
        assert np.all(d.sigma2 > 0.0)
        assert d.n_draws == fast_control.kept_draws

    def test_arm_without_data_gets_hierarchy_draws(self, fast_control):
        spec = uniform_spec(3)
        d = bhm_sample(ObservedData(n=(10, 10, 0), x=(4, 5, 0)), spec, IG28, HYPER, fast_control)
        # the empty arm shrinks toward the others rather than the null rate
        assert d.p[:, 2].mean() > 0.10

    def test_thinning_changes_count_not_validity(self):
        spec = uniform_spec(2)
        ctrl = McmcControl(burn_in=100, kept_draws=200, thin=5, seed=3, min_kept=1)
        d = bhm_sample(ObservedData(n=(10, 10), x=(2, 2)), spec, IG28, HYPER, ctrl)
        assert d.n_draws == 200

    def test_tail_probability_helpers(self, fast_control):
        spec = uniform_spec(2)
        d = bhm_sample(ObservedData(n=(10, 10), x=(9, 9)), spec, IG28, HYPER, fast_control)
        assert posterior_futility_prob(d, 0, 1e-9) == 0.0
        assert posterior_futility_prob(d, 0, 1.0 - 1e-12) == 1.0
        fut = posterior_futility_prob(d, 0, 0.4)
        eff = posterior_efficacy_prob(d, 0, 0.4)
        assert fut + eff >= 1.0

    def test_half_cauchy_variant_runs(self, fast_control):
        spec = uniform_spec(2)
        d = bhm_sample(ObservedData(n=(10, 10), x=(2, 2)), spec, HalfCauchy(1.0),
                       HYPER, fast_control.with_seed(5))
        assert np.all(d.sigma2 > 0.0)
        assert 0.05 < d.p.mean() < 0.5

    def test_control_validation(self):
        with pytest.raises(ValueError):
            McmcControl(kept_draws=10)  # below the decision floor
        with pytest.raises(ValueError):
            McmcControl(step_scale=0.0)
        with pytest.raises(ValueError):
            McmcControl(thin=0)


class TestAcceptanceRateDiagnostics:
    def test_in_band_at_final_look_scale(self, paper4):
        # typical final-look data (responders near the target rates)
        ctrl = McmcControl(seed=42)
        d = bhm_sample(ObservedData(n=(20,) * 4, x=(4, 4, 4, 6)), paper4, IG28, HYPER, ctrl)
        assert np.all(d.accept_rate >= 0.1)
        assert np.all(d.accept_rate <= 0.6)

    def test_out_of_band_is_logged(self, caplog, fast_control):
        spec = uniform_spec(2)
        with caplog.at_level(logging.INFO, logger="basketopt.inference"):
            bhm_sample(ObservedData(n=(10, 10), x=(0, 0)), spec, IG28, HYPER,
                       fast_control.with_seed(9))
        assert any("acceptance rate" in m for m in caplog.messages)


class TestConjugateUpdates:
    """Freeze the arm effects with a vanishing step size; the common-mean
    and variance updates then sample their closed-form conditionals."""

    def test_common_mean_update(self):
        J = 4
        spec = uniform_spec(J)
        # variance pinned tightly at 4 by an overwhelming prior
        prior = ScaledInvChiSq(v0=1e8, sigma0_sq=4.0)
        ctrl = McmcControl(burn_in=500, kept_draws=20000, seed=21, step_scale=1e-12, min_kept=1)
        hyper = HyperPrior(alpha0=1.0, tau0_sq=25.0)
        d = bhm_sample(ObservedData(n=(10,) * J, x=(2,) * J), spec, prior, hyper, ctrl)
        assert np.all(np.abs(d.theta_arms) < 1e-6)
        prec = J / 4.0 + 1.0 / 25.0
        mean = (hyper.alpha0 / 25.0) / prec
        sd = math.sqrt(1.0 / prec)
        se_mean = sd / math.sqrt(d.n_draws)
        assert abs(d.theta.mean() - mean) < 3 * se_mean
        # variance of the variance estimate of a normal: 2 sigma^4 / n
        se_var = math.sqrt(2.0 * sd**4 / d.n_draws)
        assert abs(d.theta.var() - sd**2) < 3 * se_var

    def test_variance_update(self):
        J = 3
        spec = uniform_spec(J)
        prior = ScaledInvChiSq.from_inverse_gamma(3.0, 5.0)
        # common mean pinned at zero by a tiny hyperprior variance
        hyper = HyperPrior(alpha0=0.0, tau0_sq=1e-12)
        ctrl = McmcControl(burn_in=500, kept_draws=20000, seed=22, step_scale=1e-12, min_kept=1)
        d = bhm_sample(ObservedData(n=(10,) * J, x=(2,) * J), spec, prior, hyper, ctrl)
        a_post = 3.0 + J / 2.0
        b_post = 5.0  # sum of squared deviations is ~0
        mean = b_post / (a_post - 1.0)
        var = b_post**2 / ((a_post - 1.0) ** 2 * (a_post - 2.0))
        se_mean = math.sqrt(var / d.n_draws)
        assert abs(d.sigma2.mean() - mean) < 3 * se_mean
        skew_heavy_se = math.sqrt(np.var(d.sigma2) / d.n_draws)
        assert abs(d.sigma2.mean() - mean) < 4 * skew_heavy_se


class TestShrinkageLimits:
    @pytest.mark.parametrize("J", [2, 3, 4])
    def test_pooling_limit(self, J):
        spec = uniform_spec(J)
        prior = ScaledInvChiSq(v0=200.0, sigma0_sq=1e-6)
        x = tuple([1] + [3] * (J - 1))
        d = bhm_sample(ObservedData(n=(10,) * J, x=x), spec, prior, HYPER,
                       McmcControl(seed=31))
        means = d.p.mean(axis=0)
        assert abs(means[0] - means[1]) < 0.005

    @pytest.mark.parametrize("J", [2, 3, 4])
    def test_independence_limit(self, J):
        spec = uniform_spec(J)
        prior = ScaledInvChiSq(v0=200.0, sigma0_sq=1e4)
        x = tuple([2] + [5] * (J - 1))
        d = bhm_sample(ObservedData(n=(10,) * J, x=x), spec, prior, HYPER,
                       McmcControl(seed=32))
        ref = 2.1 / (2.1 + 8.1)  # Beta(x + 0.1, n - x + 0.1) posterior mean
        assert abs(d.p[:, 0].mean() - ref) < 0.01


class TestQuadratureOracle:
    def test_sampler_matches_frozen_oracle_values(self):
        # frozen from the dense tensor-grid quadrature in quad_oracle.py
        # (801/801/481 nodes, ranges [-16,10] x [-35,35] x [-9,9]):
        #   mean_p = 0.1993335, P(p <= p0) = 0.0590694, P(p >= p1) = 0.4345273
        spec = uniform_spec(2)
        ctrl = McmcControl(burn_in=2000, kept_draws=50000, seed=77)
        d = bhm_sample(ObservedData(n=(10, 10), x=(2, 2)), spec, IG28, HYPER, ctrl)
        for j in range(2):
            assert abs(d.p[:, j].mean() - 0.1993335) < 0.01
            assert abs(posterior_futility_prob(d, j, 0.05) - 0.0590694) < 0.01
            assert abs(posterior_efficacy_prob(d, j, 0.20) - 0.4345273) < 0.01
