from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from residuum.distributions import (
    ZINB,
    ZIP,
    Bernoulli,
    FinitePMF,
    NegBinomial,
    Normal,
    Poisson,
    nb_size_prob,
)
from residuum.special import DomainError, std_normal_cdf

ZIP_ZERO = 0.3 + 0.7 * math.exp(-1.0)


def nb_pmf_direct(y: int, mu: float, k: float) -> float:
    """Hand-written NB pmf under the mean/size parameterization."""
    log = (
        math.lgamma(y + k) - math.lgamma(k) - math.lgamma(y + 1)
        + k * math.log(k / (k + mu)) + y * math.log(mu / (k + mu))
    )
    return math.exp(log)


COUNT_LAWS = {
    "poisson": Poisson(3.7),
    "negbin": NegBinomial(4.2, 1.3),
    "zip": ZIP(2.5, 0.35),
    "zinb": ZINB(3.1, 0.8, 0.2),
    "bernoulli": Bernoulli(0.3),
}


@pytest.fixture(params=sorted(COUNT_LAWS))
def count_law(request):
    return COUNT_LAWS[request.param]


class TestPmf:
    def test_zip_zero(self):
        assert ZIP(1.0, 0.3).pmf(0) == pytest.approx(ZIP_ZERO, abs=1e-14)
        assert ZIP_ZERO == pytest.approx(0.5575156088, abs=1e-10)

    def test_poisson_zero(self):
        assert Poisson(2.0).pmf(0) == pytest.approx(math.exp(-2.0), rel=1e-14)

    def test_normal_has_no_mass(self):
        assert Normal(0.0, 1.0).pmf(0.7) == 0.0

    def test_non_integer_has_no_mass(self):
        assert Poisson(2.0).pmf(1.5) == 0.0

    def test_negative_rejected(self):
        with pytest.raises(DomainError):
            Poisson(2.0).pmf(-1)

    def test_negbin_matches_direct_formula(self):
        for y in range(25):
            assert NegBinomial(2.0, 2.0).pmf(y) == pytest.approx(nb_pmf_direct(y, 2.0, 2.0), rel=1e-12)

    def test_negbin_variance_convention(self):
        mu, k = 3.0, 2.0
        ys = np.arange(400)
        p = NegBinomial(mu, k).pmf(ys)
        mean = np.sum(ys * p)
        var = np.sum((ys - mean) ** 2 * p)
        assert mean == pytest.approx(mu, rel=1e-10)
        assert var == pytest.approx(mu + mu**2 / k, rel=1e-10)

    def test_pmf_sums_to_one(self, count_law):
        assert np.sum(count_law.pmf(np.arange(300))) == pytest.approx(1.0, abs=1e-12)


class TestCdf:
    def test_zip_at_zero(self):
        assert ZIP(1.0, 0.3).cdf(0) == pytest.approx(ZIP_ZERO, abs=1e-14)

    def test_poisson_tail(self):
        assert Poisson(3.0).cdf(50) >= 1.0 - 1e-12

    def test_negbin_finite_sum(self):
        law = NegBinomial(2.0, 2.0)
        direct = math.fsum(nb_pmf_direct(j, 2.0, 2.0) for j in range(4))
        assert law.cdf(3) == pytest.approx(direct, abs=1e-12)

    def test_brute_force_equivalence(self, count_law):
        ys = np.arange(61)
        cum = np.cumsum(count_law.pmf(ys))
        assert np.max(np.abs(count_law.cdf(ys) - cum)) <= 1e-10

    def test_non_integer_floors(self):
        law = Poisson(2.0)
        assert law.cdf(2.7) == law.cdf(2)

    def test_negbin_approaches_poisson(self):
        ys = np.arange(31)
        for mu in (0.5, 2.0, 6.0, 10.0):
            diff = np.abs(NegBinomial(mu, 1e6).cdf(ys) - Poisson(mu).cdf(ys))
            assert diff.max() <= 1e-4

    def test_zip_without_inflation_is_poisson(self):
        ys = np.arange(40)
        for lam in (0.3, 4.0, 12.0):
            assert np.allclose(ZIP(lam, 0.0).pmf(ys), Poisson(lam).pmf(ys), rtol=0, atol=1e-12)
            assert np.allclose(ZIP(lam, 0.0).cdf(ys), Poisson(lam).cdf(ys), rtol=0, atol=1e-12)


class TestLeftLimit:
    def test_poisson_below_support(self):
        assert Poisson(2.0).cdf_left_limit(0) == 0.0

    def test_zip_at_one(self):
        assert ZIP(1.0, 0.3).cdf_left_limit(1) == pytest.approx(ZIP_ZERO, abs=1e-14)

    def test_normal_is_continuous(self):
        assert Normal(0.0, 1.0).cdf_left_limit(1.0) == pytest.approx(std_normal_cdf(1.0), abs=1e-15)

    def test_gap_is_pmf(self, count_law):
        ys = np.arange(30)
        gap = count_law.cdf(ys) - count_law.cdf_left_limit(ys)
        assert np.allclose(gap, count_law.pmf(ys), atol=1e-12)

    def test_finite_pmf_off_support(self):
        law = FinitePMF([0, 2], [0.4, 0.6])
        assert law.cdf_left_limit(1) == law.cdf(1) == pytest.approx(0.4)
        assert law.pmf(1) == 0.0

    @given(st.floats(0.05, 30.0), st.floats(0.05, 50.0), st.floats(0.0, 0.95), st.integers(0, 80))
    def test_ordering_property(self, mu, k, p, y):
        law = ZINB(mu, k, p)
        lo, hi, mass = law.cdf_left_limit(y), law.cdf(y), law.pmf(y)
        assert lo <= hi
        if mass > 1e-15:
            assert lo < hi


class TestMoments:
    def test_zip_variance_formula(self):
        law = ZIP(2.0, 0.5)
        ys = np.arange(200)
        p = law.pmf(ys)
        m = np.sum(ys * p)
        assert law.mean() == pytest.approx(m, rel=1e-12)
        assert law.var() == pytest.approx(np.sum((ys - m) ** 2 * p), rel=1e-10)

    @pytest.mark.parametrize("mu, k, p", [(3.0, 2.0, 0.3), (0.7, 0.5, 0.6), (12.0, 25.0, 0.1)])
    def test_zinb_variance_by_summation(self, mu, k, p):
        law = ZINB(mu, k, p)
        ys = np.arange(3000)
        mass = law.pmf(ys)
        m = np.sum(ys * mass)
        assert law.var() == pytest.approx(np.sum((ys - m) ** 2 * mass), rel=1e-9)


class TestSampling:
    def test_bernoulli_near_one(self):
        rng = np.random.default_rng(11)
        draws = Bernoulli(1 - 1e-9).sample(rng, size=10_000)
        assert draws.mean() >= 0.99

    def test_poisson_mean(self):
        rng = np.random.default_rng(12)
        assert Poisson(5.0).sample(rng, size=100_000).mean() == pytest.approx(5.0, abs=0.05)

    def test_finite_pmf_frequencies(self):
        rng = np.random.default_rng(13)
        draws = FinitePMF([0, 1, 2], [0.25, 0.5, 0.25]).sample(rng, size=10_000)
        freq = np.bincount(draws.astype(int), minlength=3) / draws.size
        assert np.allclose(freq, [0.25, 0.5, 0.25], atol=0.02)

    def test_negbin_sampler_convention(self):
        n, prob = nb_size_prob(3.0, 2.0)
        assert float(n) == 2.0 and float(prob) == pytest.approx(0.4)
        rng = np.random.default_rng(14)
        draws = NegBinomial(3.0, 2.0).sample(rng, size=200_000)
        assert draws.mean() == pytest.approx(3.0, rel=0.02)
        assert draws.var() == pytest.approx(3.0 + 9.0 / 2.0, rel=0.03)

    def test_zinb_sample_zero_fraction(self):
        rng = np.random.default_rng(15)
        law = ZINB(3.0, 2.0, 0.3)
        draws = law.sample(rng, size=100_000)
        assert np.mean(draws == 0) == pytest.approx(law.pmf(0), abs=0.01)

    def test_vector_shape(self):
        rng = np.random.default_rng(16)
        assert Poisson(np.array([1.0, 2.0, 3.0])).sample(rng).shape == (3,)


class TestValidation:
    @pytest.mark.parametrize(
        "factory",
        [
            lambda: Poisson(0.0),
            lambda: NegBinomial(1.0, 0.0),
            lambda: NegBinomial(-1.0, 1.0),
            lambda: ZIP(1.0, 1.0),
            lambda: ZIP(1.0, -0.1),
            lambda: ZINB(1.0, 1.0, 1.0),
            lambda: Bernoulli(1.0),
            lambda: Normal(0.0, 0.0),
            lambda: FinitePMF([0, 1], [0.5, 0.6]),
            lambda: FinitePMF([1, 0], [0.5, 0.5]),
            lambda: Poisson(float("inf")),
        ],
    )
    def test_bad_parameters(self, factory):
        with pytest.raises(DomainError):
            factory()

    def test_vector_indexing(self):
        law = ZIP(np.array([1.0, 2.0]), 0.3)
        assert len(law) == 2
        assert law[1].pmf(0) == pytest.approx(0.3 + 0.7 * math.exp(-2.0))
        assert [sub.pmf(0) for sub in law] == pytest.approx(list(law.pmf(np.zeros(2))))
