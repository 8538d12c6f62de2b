from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st
from scipy.special import expit

from conftest import simulate_family
from residuum.regression import (
    Family,
    FitError,
    ModelSpec,
    RankDeficientError,
    fit,
    loglik,
    predictive_laws,
    score,
)

COUNT_FAMILIES = [Family.POISSON, Family.NEGBIN, Family.ZIP, Family.ZINB]


def central_difference(spec, params, y, h=1e-5):
    grad = np.empty(params.size)
    for j in range(params.size):
        step = np.zeros(params.size)
        step[j] = h
        grad[j] = (loglik(spec, params + step, y) - loglik(spec, params - step, y)) / (2 * h)
    return grad


@pytest.fixture(scope="module")
def small_data():
    out = {}
    for i, family in enumerate(COUNT_FAMILIES):
        out[family] = simulate_family(family, 300, 500 + i)
    return out


class TestSpec:
    def test_rank_deficient(self):
        x = np.linspace(0, 1, 20)
        X = np.column_stack([np.ones(20), x, 2 * x])
        with pytest.raises(RankDeficientError):
            ModelSpec(Family.POISSON, X)

    def test_too_few_observations(self):
        with pytest.raises(FitError):
            ModelSpec(Family.ZIP, np.column_stack([np.ones(2), [0.0, 1.0]]))

    def test_zero_design_only_for_zero_inflated(self):
        with pytest.raises(FitError):
            ModelSpec(Family.POISSON, np.ones((10, 1)), np.ones((10, 1)))

    def test_defaults(self):
        spec = ModelSpec(Family.ZINB, np.ones((10, 1)))
        assert spec.q == 1 and spec.n_params == 3

    def test_non_integer_response(self):
        spec = ModelSpec(Family.POISSON, np.ones((5, 1)))
        with pytest.raises(FitError):
            fit(spec, [0, 1, 2.5, 1, 0])


class TestLoglik:
    def test_single_zero(self):
        spec = ModelSpec(Family.POISSON, np.ones((2, 1)))
        assert loglik(spec, np.array([0.0]), [0, 0]) == pytest.approx(-2.0, abs=1e-15)

    def test_zip_without_inflation_is_poisson(self, small_data):
        spec, y = small_data[Family.ZIP]
        beta = np.array([0.8, 1.7])
        pois = loglik(ModelSpec(Family.POISSON, spec.mean_design), beta, y)
        # logit(p) = -800 puts p far below double-precision resolution
        assert loglik(spec, np.array([0.8, 1.7, -800.0]), y) == pytest.approx(pois, abs=1e-12)

    @pytest.mark.parametrize("family", COUNT_FAMILIES)
    def test_matches_distribution_module(self, family, small_data):
        spec, y = small_data[family]
        rng = np.random.default_rng(7)
        params = rng.normal(0.0, 0.3, size=spec.n_params) + np.r_[1.0, 2.0, np.zeros(spec.n_params - 2)]
        model = fit(spec, y)
        model = type(model)(**{**model.__dict__, "beta": params[: spec.p],
                               "gamma": params[spec.p:spec.p + spec.q] if spec.q else None,
                               "k": math.exp(params[-1]) if family.has_k else None})
        laws = predictive_laws(model, spec)
        assert loglik(spec, params, y) == pytest.approx(float(np.sum(laws.logpmf(y))), abs=1e-10)


class TestScore:
    @pytest.mark.parametrize("family", COUNT_FAMILIES)
    def test_finite_differences(self, family, small_data):
        spec, y = small_data[family]
        rng = np.random.default_rng(42)
        base = np.r_[1.0, 2.0, np.full(spec.n_params - 2, -0.5)]
        for _ in range(10):
            params = base + rng.normal(0.0, 0.25, size=base.size)
            analytic = score(spec, params, y)
            numeric = central_difference(spec, params, y)
            tol = 1e-4 * np.maximum(1.0, np.abs(numeric))
            assert np.all(np.abs(analytic - numeric) <= tol), (analytic, numeric)

    def test_normal_family(self):
        rng = np.random.default_rng(3)
        X = np.column_stack([np.ones(50), rng.normal(size=50)])
        y = X @ [1.0, -0.5] + rng.normal(0, 0.7, size=50)
        spec = ModelSpec(Family.NORMAL, X)
        params = np.array([0.9, -0.4, math.log(0.8)])
        assert np.allclose(score(spec, params, y), central_difference(spec, params, y), rtol=1e-6, atol=1e-6)

    @pytest.mark.parametrize("family", COUNT_FAMILIES)
    def test_vanishes_at_fit(self, family, small_data):
        spec, y = small_data[family]
        model = fit(spec, y)
        assert model.converged
        assert np.max(np.abs(score(spec, model.params, y))) < 1e-5


class TestFit:
    def test_intercept_only_poisson(self):
        rng = np.random.default_rng(1)
        y = rng.poisson(3.3, size=400)
        model = fit(ModelSpec(Family.POISSON, np.ones((400, 1))), y)
        assert model.beta[0] == pytest.approx(math.log(y.mean()), abs=1e-8)

    def test_negbin_on_poisson_data(self):
        rng = np.random.default_rng(2)
        y = rng.poisson(4.0, size=2000)
        model = fit(ModelSpec(Family.NEGBIN, np.ones((2000, 1))), y)
        assert model.k_at_bound or model.k >= 1e3

    def test_negbin_underdispersed_flags_bound(self):
        y = np.tile([2, 3, 4], 100)
        model = fit(ModelSpec(Family.NEGBIN, np.ones((300, 1))), y)
        assert model.k_at_bound and model.k == pytest.approx(1e6)
        assert "bound" in model.message

    def test_all_zero_zip(self):
        with pytest.raises(FitError):
            fit(ModelSpec(Family.ZIP, np.ones((20, 1))), np.zeros(20))

    @pytest.mark.parametrize("name", ["poisson", "negbin", "zip", "zinb"])
    def test_recovery_within_three_se(self, name, recovery_fits):
        rec = recovery_fits[name]
        assert rec.model.converged
        z = np.abs(rec.model.params - rec.truth) / rec.model.std_errors
        assert np.all(z <= 3.0), z

    @pytest.mark.parametrize("name", ["poisson", "negbin", "zip", "zinb"])
    def test_aic_consistency(self, name, recovery_fits):
        model = recovery_fits[name].model
        assert model.aic == -2.0 * model.loglik + 2.0 * model.n_params
        assert np.all(model.std_errors > 0)

    @pytest.mark.parametrize("name", ["zip", "zinb"])
    def test_em_monotone(self, name, recovery_fits):
        trace = np.asarray(recovery_fits[name].model.trace)
        assert trace.size > 2
        assert np.all(np.diff(trace) >= -1e-8)

    def test_nesting(self, small_data):
        for inflated, plain in [(Family.ZIP, Family.POISSON), (Family.ZINB, Family.NEGBIN)]:
            spec, y = small_data[inflated]
            big = fit(spec, y)
            small = fit(ModelSpec(plain, spec.mean_design), y)
            assert big.loglik >= small.loglik - 1e-6

    @pytest.mark.parametrize("family", COUNT_FAMILIES)
    def test_rescaling_covariate(self, family, small_data):
        spec, y = small_data[family]
        c = 7.5
        X2 = spec.mean_design.copy()
        X2[:, 1] *= c
        a = fit(spec, y)
        b = fit(ModelSpec(family, X2), y)
        assert b.beta[1] == pytest.approx(a.beta[1] / c, rel=1e-5)
        assert b.loglik == pytest.approx(a.loglik, abs=1e-6)
        assert b.aic == pytest.approx(a.aic, abs=1e-6)

    def test_zero_covariate(self):
        rng = np.random.default_rng(9)
        n = 3000
        x = rng.uniform(-1, 1, n)
        z = rng.uniform(-1, 1, n)
        p = expit(-0.5 + 1.5 * z)
        y = np.where(rng.random(n) < p, 0, rng.poisson(np.exp(1.0 + x)))
        spec = ModelSpec(Family.ZIP, np.column_stack([np.ones(n), x]), np.column_stack([np.ones(n), z]))
        model = fit(spec, y)
        assert model.converged
        assert np.all(np.abs(model.gamma - [-0.5, 1.5]) <= 3 * model.gamma_se)

    def test_normal_ols(self):
        rng = np.random.default_rng(4)
        X = np.column_stack([np.ones(100), rng.normal(size=100)])
        y = X @ [2.0, 1.0] + rng.normal(size=100)
        model = fit(ModelSpec(Family.NORMAL, X), y)
        ols, *_ = np.linalg.lstsq(X, y, rcond=None)
        assert np.allclose(model.beta, ols, atol=1e-8)
        resid = y - X @ ols
        assert model.sigma == pytest.approx(math.sqrt(resid @ resid / 100), rel=1e-8)


class TestPredictiveLaws:
    def test_zero_coefficient_gives_unit_mean(self):
        y = np.array([0, 1, 2, 1, 0, 1, 2, 1])  # mean 1 so beta_hat = 0
        spec = ModelSpec(Family.POISSON, np.ones((8, 1)))
        laws = predictive_laws(fit(spec, y), spec)
        assert np.allclose(laws.lam, 1.0, atol=1e-12)

    def test_zip_inverse_link(self, recovery_fits):
        rec = recovery_fits["zip"]
        model = rec.model
        gamma = np.array([math.log(0.3 / 0.7)])
        forced = type(model)(**{**model.__dict__, "gamma": gamma})
        laws = predictive_laws(forced, rec.spec)
        assert np.allclose(laws.p, 0.3, atol=1e-10)

    def test_negbin_means_by_hand(self, recovery_fits):
        rec = recovery_fits["negbin"]
        laws = predictive_laws(rec.model, rec.spec)
        b0, b1 = rec.model.beta
        for i in (0, 17, 4999):
            x = rec.spec.mean_design[i, 1]
            assert laws.mean()[i] == pytest.approx(math.exp(b0 + b1 * x), rel=1e-13)


@settings(max_examples=15, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(st.integers(0, 10_000), st.floats(0.2, 8.0))
def test_intercept_only_poisson_property(seed, lam):
    y = np.random.default_rng(seed).poisson(lam, size=60)
    if y.sum() == 0:
        return
    model = fit(ModelSpec(Family.POISSON, np.ones((60, 1))), y)
    assert model.beta[0] == pytest.approx(math.log(y.mean()), abs=1e-8)
