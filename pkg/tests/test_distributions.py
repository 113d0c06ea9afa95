import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, stats

from biastol.distributions import (
    BetaParams,
    GenGammaSpec,
    chisq_quantile,
    gengamma_cdf,
    gengamma_pdf,
    gengamma_quantile,
    make_rng,
    pbeta,
    qbeta,
    sample,
    sample_size_biased,
    size_bias,
)
from biastol.errors import DomainError, UnboundedQuantileError


def binomial_tail(x: Fraction, a: int, b: int) -> Fraction:
    """I_x(a, b) = P(Bin(a+b-1, x) >= a), exact in rationals."""
    n = a + b - 1
    return sum(Fraction(math.comb(n, i)) * x**i * (1 - x) ** (n - i) for i in range(a, n + 1))


class TestPbeta:
    def test_symmetric_midpoint(self):
        assert pbeta(0.5, 2, 2) == pytest.approx(0.5, abs=1e-15)

    def test_binomial_oracle(self):
        want = float(binomial_tail(Fraction(1, 5), 2, 21))
        assert pbeta(0.2, 2, 21) == pytest.approx(want, rel=1e-10)
        assert want == pytest.approx(0.9520384654083551, abs=1e-15)

    def test_left_endpoint(self):
        assert pbeta(0.0, 3, 7) == 0.0

    @pytest.mark.parametrize("a,b", [(1, 1), (2, 5), (5, 2), (10, 12), (22, 979)])
    @pytest.mark.parametrize("x", ["1/100", "1/7", "1/2", "9/10"])
    def test_integer_parameters_exact(self, a, b, x):
        fx = Fraction(x)
        want = float(binomial_tail(fx, a, b))
        assert pbeta(float(fx), a, b) == pytest.approx(want, rel=1e-10, abs=1e-300)

    @pytest.mark.parametrize("x", [-0.1, 1.1, float("nan")])
    def test_domain(self, x):
        with pytest.raises(DomainError):
            pbeta(x, 2, 2)

    def test_bad_parameters(self):
        with pytest.raises(DomainError):
            BetaParams(0.0, 1.0)
        with pytest.raises(DomainError):
            pbeta(0.5, -1.0, 2.0)

    @given(st.floats(0, 1), st.floats(0.3, 300), st.floats(0.3, 300))
    def test_reflection(self, x, a, b):
        y = 1.0 - x
        x = 1.0 - y  # exact complementary pair in floating point
        assert pbeta(x, a, b) == pytest.approx(1.0 - pbeta(y, b, a), abs=1e-12)

    @given(st.floats(0, 1), st.floats(0, 1), st.floats(0.3, 50), st.floats(0.3, 50))
    def test_monotone(self, x1, x2, a, b):
        lo, hi = sorted((x1, x2))
        assert pbeta(lo, a, b) <= pbeta(hi, a, b) + 1e-15


class TestQbeta:
    def test_symmetric(self):
        assert qbeta(0.5, 2, 2) == pytest.approx(0.5, abs=1e-14)

    def test_bisection_oracle(self):
        x = qbeta(0.95, 2, 21)
        lo, hi = 0.0, 1.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            lo, hi = (mid, hi) if pbeta(mid, 2, 21) < 0.95 else (lo, mid)
        assert x == pytest.approx(lo, abs=1e-12)

    def test_right_endpoint(self):
        assert qbeta(1.0, 5, 1) == 1.0
        assert qbeta(0.0, 5, 1) == 0.0

    @pytest.mark.parametrize("a", [0.5, 1, 2, 21, 100])
    @pytest.mark.parametrize("b", [0.5, 1, 2, 21, 100])
    def test_round_trip_grid(self, a, b):
        for p in np.linspace(0.001, 0.999, 41):
            assert pbeta(qbeta(p, a, b), a, b) == pytest.approx(p, abs=1e-9)

    @given(st.floats(1e-9, 1 - 1e-9), st.floats(0.5, 2000), st.floats(0.5, 2000))
    def test_round_trip_property(self, p, a, b):
        assert pbeta(qbeta(p, a, b), a, b) == pytest.approx(p, abs=1e-9)

    def test_domain(self):
        with pytest.raises(DomainError):
            qbeta(1.5, 2, 2)


class TestChisq:
    def test_df2_closed_form(self):
        assert chisq_quantile(0.95, 2) == pytest.approx(-2 * math.log(0.05), abs=1e-12)
        assert chisq_quantile(0.5, 2) == pytest.approx(1.3862943611198906, abs=1e-12)

    def test_df4_against_quadrature(self):
        x = chisq_quantile(0.95, 4)
        assert x == pytest.approx(9.487729036781154, abs=1e-9)
        area, _ = integrate.quad(lambda t: t * math.exp(-t / 2) / 4, 0, x)
        assert area == pytest.approx(0.95, abs=1e-10)

    @pytest.mark.parametrize("df", [2, 4, 10, 44, 100])
    @pytest.mark.parametrize("p", [0.01, 0.5, 0.9, 0.99])
    def test_scipy(self, df, p):
        assert chisq_quantile(p, df) == pytest.approx(stats.chi2.ppf(p, df), rel=1e-10)

    @pytest.mark.parametrize("p", [0.0, 1.0, -1.0])
    def test_domain(self, p):
        with pytest.raises(DomainError):
            chisq_quantile(p, 4)


class TestGenGamma:
    def test_validation(self):
        with pytest.raises(DomainError):
            GenGammaSpec(0.0, 1.0)
        with pytest.raises(DomainError):
            GenGammaSpec(1.0, 1.0, -2.0)

    def test_exponential(self):
        x = np.linspace(0, 5, 50)
        np.testing.assert_allclose(gengamma_cdf(x, GenGammaSpec(1, 2)), 1 - np.exp(-2 * x), atol=1e-14)

    def test_zero(self):
        assert gengamma_cdf(0.0, GenGammaSpec(0.5, 3.0, 2.0)) == 0.0

    def test_gamma22_at_one(self):
        val = gengamma_cdf(1.0, GenGammaSpec(2, 2))
        assert val == pytest.approx(1 - 3 * math.exp(-2), abs=1e-14)
        area, _ = integrate.quad(lambda t: 4 * t * math.exp(-2 * t), 0, 1)
        assert val == pytest.approx(area, abs=1e-12)

    def test_negative_x(self):
        with pytest.raises(DomainError):
            gengamma_cdf(-1.0, GenGammaSpec(1, 1))

    @pytest.mark.parametrize("spec", [GenGammaSpec(0.5, 2), GenGammaSpec(2, 2), GenGammaSpec(3, 0.7, 1.7)])
    def test_cdf_against_scipy(self, spec):
        x = np.geomspace(1e-4, 20, 200)
        want = stats.gengamma.cdf(x, spec.shape_alpha / spec.shape_delta, spec.shape_delta,
                                  scale=1 / spec.rate_beta)
        np.testing.assert_allclose(gengamma_cdf(x, spec), want, atol=1e-10)

    def test_pdf_integrates_to_cdf(self):
        spec = GenGammaSpec(2.5, 1.5, 1.3)
        area, _ = integrate.quad(lambda t: gengamma_pdf(t, spec), 0, 1.7)
        assert area == pytest.approx(gengamma_cdf(1.7, spec), abs=1e-9)

    def test_delta_one_is_gamma(self):
        x = np.linspace(0.01, 4, 30)
        np.testing.assert_allclose(gengamma_pdf(x, GenGammaSpec(2, 3)), stats.gamma.pdf(x, 2, scale=1 / 3), rtol=1e-12)

    def test_quantiles(self):
        assert gengamma_quantile(0.5, GenGammaSpec(1, 2)) == pytest.approx(math.log(2) / 2, abs=1e-12)
        assert gengamma_quantile(0.0, GenGammaSpec(2, 2)) == 0.0
        y = gengamma_quantile(0.8, GenGammaSpec(2, 2))
        lo, hi = 0.0, 20.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            lo, hi = (mid, hi) if 1 - math.exp(-2 * mid) * (1 + 2 * mid) < 0.8 else (lo, mid)
        assert y == pytest.approx(lo, abs=1e-10)

    def test_quantile_at_one(self):
        with pytest.raises(UnboundedQuantileError):
            gengamma_quantile(1.0, GenGammaSpec(1, 1))

    @given(st.floats(1e-6, 1 - 1e-6), st.floats(0.2, 20), st.floats(0.1, 10), st.floats(0.5, 3))
    def test_quantile_round_trip(self, p, a, b, d):
        spec = GenGammaSpec(a, b, d)
        assert gengamma_cdf(gengamma_quantile(p, spec), spec) == pytest.approx(p, abs=1e-10)


class TestSizeBias:
    def test_closure(self):
        assert size_bias(GenGammaSpec(1, 2), 1) == GenGammaSpec(2, 2)
        assert size_bias(GenGammaSpec(0.5, 2), 1) == GenGammaSpec(1.5, 2)

    def test_vanishing_degree(self):
        s = size_bias(GenGammaSpec(0.7, 2, 1.5), 1e-12)
        assert s.shape_alpha == pytest.approx(0.7, abs=1e-11)

    def test_bad_degree(self):
        with pytest.raises(DomainError):
            size_bias(GenGammaSpec(1, 1), 0.0)

    def test_density_identity(self):
        spec, kappa = GenGammaSpec(1.5, 2.0, 1.3), 2.0
        x = np.linspace(0.05, 3, 40)
        weighted = x**kappa * gengamma_pdf(x, spec) / spec.moment(kappa)
        np.testing.assert_allclose(gengamma_pdf(x, size_bias(spec, kappa)), weighted, rtol=1e-10)

    @pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
    def test_accept_reject_matches_closure(self, alpha):
        spec = GenGammaSpec(alpha, 2.0)
        x = sample_size_biased(spec, 1.0, 100_000, seed=101)
        biased = size_bias(spec, 1.0)
        assert stats.kstest(x, lambda t: gengamma_cdf(t, biased)).pvalue > 0.01


class TestSampling:
    def test_exponential_ks(self):
        x = sample(GenGammaSpec(1, 2), 100_000, seed=7)
        d = stats.kstest(x, lambda t: 1 - np.exp(-2 * t)).statistic
        assert d < 1.63 / math.sqrt(100_000)

    def test_determinism(self):
        assert sample(GenGammaSpec(2, 2), 1, 99)[0] == sample(GenGammaSpec(2, 2), 1, 99)[0]

    def test_mean(self):
        x = sample(GenGammaSpec(2, 2), 1_000_000, seed=3)
        assert abs(x.mean() - 1.0) < 3 * math.sqrt(0.5) / 1000

    def test_generalized_power(self):
        spec = GenGammaSpec(2.0, 1.5, 2.5)
        x = sample(spec, 50_000, seed=5)
        assert stats.kstest(x, lambda t: gengamma_cdf(t, spec)).pvalue > 0.01

    def test_seed_required(self):
        with pytest.raises(TypeError):
            make_rng(None)

    def test_philox(self):
        assert isinstance(make_rng(1).bit_generator, np.random.Philox)
