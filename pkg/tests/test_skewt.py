import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate as spi
from scipy import special, stats

from gaarch.exceptions import DomainError
from gaarch.skewt import (
    NU_CAP,
    SkewTParams,
    raw_cdf,
    raw_logpdf,
    raw_pdf,
    raw_quantile,
    sample,
    standardize,
    std_logpdf,
    std_pdf,
)

GRID = (2.5, 4.0, 8.0, 15.0, 50.0, 200.0)
PAIRS = [(m, p) for m in GRID for p in GRID]
nu = st.floats(min_value=2.05, max_value=200.0)


def jf_oracle(p: SkewTParams):
    return stats.jf_skew_t(p.a, p.b)


def jf_moments(a: float, b: float) -> tuple[float, float]:
    """Closed-form mean and variance of the raw law (finite for a, b > 1)."""
    lg = special.gammaln
    mean = (a - b) * math.sqrt(a + b) / 2.0 * math.exp(
        lg(a - 0.5) + lg(b - 0.5) - lg(a) - lg(b)
    )
    second = (a + b) * ((a - b) ** 2 + a + b - 2.0) / (4.0 * (a - 1.0) * (b - 1.0))
    return mean, second - mean * mean


class TestParams:
    @pytest.mark.parametrize("bad", [(2.0, 5.0), (5.0, 1.5), (5.0, 200.5), (math.nan, 5.0)])
    def test_rejects(self, bad):
        with pytest.raises(DomainError):
            SkewTParams(*bad)

    def test_derived_fields(self):
        p = SkewTParams(5.0, 20.0)
        assert (p.nu, p.a, p.b) == (12.5, 2.5, 10.0)
        assert not p.is_symmetric and SkewTParams(4, 4).is_symmetric

    def test_cap_allowed(self):
        assert SkewTParams(NU_CAP, NU_CAP).nu == NU_CAP


class TestRawDensity:
    def test_t4_at_zero(self):
        exact = math.gamma(2.5) / (math.sqrt(4 * math.pi) * math.gamma(2.0))
        assert raw_pdf(0.0, SkewTParams(4, 4)) == pytest.approx(exact, rel=1e-13)
        assert exact == pytest.approx(0.375)

    @pytest.mark.parametrize("pair", PAIRS)
    def test_matches_scipy_jf(self, pair):
        p = SkewTParams(*pair)
        x = np.linspace(-30.0, 30.0, 601)
        np.testing.assert_allclose(raw_logpdf(x, p), jf_oracle(p).logpdf(x), rtol=1e-12, atol=1e-12)

    @pytest.mark.parametrize("pair", PAIRS)
    def test_normalizes(self, pair):
        p = SkewTParams(*pair)
        total = sum(
            spi.quad(lambda x: raw_pdf(x, p), lo, hi, epsabs=1e-14, epsrel=1e-13, limit=200)[0]
            for lo, hi in [(-np.inf, -10.0), (-10.0, 0.0), (0.0, 10.0), (10.0, np.inf)]
        )
        assert abs(total - 1.0) <= 1e-8

    @pytest.mark.parametrize("nu_", GRID)
    def test_student_t_nesting(self, nu_):
        p = SkewTParams(nu_, nu_)
        x = np.linspace(-8.0, 8.0, 1601)
        assert np.max(np.abs(raw_pdf(x, p) - stats.t(nu_).pdf(x))) <= 1e-10

    @settings(max_examples=200)
    @given(nu, nu, st.floats(min_value=-1e6, max_value=1e6))
    def test_mirror(self, a, b, x):
        lhs = raw_logpdf(x, SkewTParams(a, b))
        rhs = raw_logpdf(-x, SkewTParams(b, a))
        assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)

    @pytest.mark.parametrize("pair", PAIRS)
    def test_tail_exponents(self, pair):
        p = SkewTParams(*pair)
        x = np.geomspace(1e2, 1e4, 200)
        left = np.polyfit(np.log(x), raw_logpdf(-x, p), 1)[0]
        right = np.polyfit(np.log(x), raw_logpdf(x, p), 1)[0]
        assert abs(left / -(p.nu_minus + 1.0) - 1.0) <= 0.02
        assert abs(right / -(p.nu_plus + 1.0) - 1.0) <= 0.02

    def test_finite_far_out(self):
        p = SkewTParams(3.0, 150.0)
        values = raw_logpdf(np.array([-1e300, -1e150, 1e150, 1e300]), p)
        assert np.all(np.isfinite(values))

    def test_scalar_and_shape(self):
        p = SkewTParams(6, 9)
        assert isinstance(raw_pdf(0.3, p), float)
        assert raw_pdf(np.zeros((3, 2)), p).shape == (3, 2)


class TestRawCdf:
    def test_examples(self):
        t4 = SkewTParams(4, 4)
        assert raw_cdf(0.0, SkewTParams(7.3, 7.3)) == pytest.approx(0.5, abs=1e-12)
        assert raw_cdf(-np.inf, t4) == 0.0 and raw_cdf(np.inf, t4) == 1.0
        assert raw_cdf(1.0, t4) == pytest.approx(stats.t(4).cdf(1.0), abs=1e-13)
        assert raw_cdf(1.0, t4) == pytest.approx(0.813049, abs=1e-6)

    @pytest.mark.parametrize("pair", PAIRS)
    def test_matches_scipy_jf(self, pair):
        p = SkewTParams(*pair)
        x = np.linspace(-40.0, 40.0, 321)
        np.testing.assert_allclose(raw_cdf(x, p), jf_oracle(p).cdf(x), rtol=0, atol=1e-11)

    @pytest.mark.parametrize("pair", [(2.5, 200.0), (5.0, 20.0), (15.0, 4.0), (50.0, 50.0)])
    def test_derivative_is_density(self, pair):
        p = SkewTParams(*pair)
        x = np.linspace(-8.0, 8.0, 161)
        h = 1e-5
        deriv = (raw_cdf(x + h, p) - raw_cdf(x - h, p)) / (2 * h)
        assert np.max(np.abs(deriv - raw_pdf(x, p))) <= 1e-5

    @settings(max_examples=200)
    @given(nu, nu, st.floats(min_value=-1e4, max_value=1e4))
    def test_mirror(self, a, b, t):
        assert abs(raw_cdf(t, SkewTParams(a, b)) - (1.0 - raw_cdf(-t, SkewTParams(b, a)))) <= 1e-10

    @given(nu, nu)
    def test_monotone(self, a, b):
        values = raw_cdf(np.linspace(-50, 50, 2001), SkewTParams(a, b))
        assert np.all(np.diff(values) >= 0.0)
        assert 0.0 <= values.min() and values.max() <= 1.0

    def test_far_tail_has_relative_accuracy(self):
        # a naive 1 - I(...) evaluation would return 0 here
        p = SkewTParams(4.0, 4.0)
        assert raw_cdf(-1e4, p) == pytest.approx(stats.t(4).cdf(-1e4), rel=1e-10)
        assert 1.0 - raw_cdf(30.0, p) == pytest.approx(stats.t(4).sf(30.0), rel=1e-8)


class TestRawQuantile:
    def test_examples(self):
        assert raw_quantile(0.5, SkewTParams(9, 9)) == pytest.approx(0.0, abs=1e-14)
        assert raw_quantile(0.813049, SkewTParams(4, 4)) == pytest.approx(1.0, abs=1e-5)
        assert raw_quantile(stats.t(4).cdf(1.0), SkewTParams(4, 4)) == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("pair", [(2.5, 2.5), (4.0, 50.0), (200.0, 3.0), (15.24, 16.95)])
    def test_round_trip(self, pair):
        p = SkewTParams(*pair)
        x = np.linspace(-10.0, 10.0, 201)
        u = raw_cdf(x, p)
        # drop levels that round to 0 or 1, and allow for the rounding of u
        # itself where the density is tiny
        keep = (u > 0.0) & (u < 1.0)
        slack = 2.0 * np.spacing(u) / raw_pdf(x, p)
        err = np.abs(raw_quantile(u[keep], p) - x[keep])
        assert np.all(err <= 1e-7 + slack[keep])
        assert keep.sum() >= 120

    @settings(max_examples=200)
    @given(nu, nu, st.floats(min_value=1e-12, max_value=1 - 1e-12))
    def test_probability_residual(self, a, b, u):
        p = SkewTParams(a, b)
        assert abs(raw_cdf(raw_quantile(u, p), p) - u) <= 1e-9

    def test_matches_scipy_ppf(self):
        p = SkewTParams(5.0, 20.0)
        u = np.array([1e-9, 1e-3, 0.1, 0.5, 0.9, 0.999, 1 - 1e-9])
        np.testing.assert_allclose(raw_quantile(u, p), jf_oracle(p).ppf(u), rtol=1e-9)

    @pytest.mark.parametrize("u", [0.0, 1.0, -0.1, math.nan])
    def test_domain(self, u):
        with pytest.raises(DomainError):
            raw_quantile(u, SkewTParams(4, 4))


class TestStandardize:
    @pytest.mark.parametrize("pair", PAIRS)
    def test_moments_match_closed_form(self, pair):
        p = SkewTParams(*pair)
        s = standardize(p)
        mean, var = jf_moments(p.a, p.b)
        assert s.location == pytest.approx(mean, rel=1e-9, abs=1e-10)
        assert s.scale == pytest.approx(math.sqrt(var), rel=1e-9)

    @pytest.mark.parametrize("pair", PAIRS)
    def test_truncated_moments_by_independent_quadrature(self, pair):
        # density written out in mpmath straight from the formula, integrated
        # with tanh-sinh quadrature at 30 digits
        p = SkewTParams(*pair)
        s = standardize(p)
        with mpmath.workdps(30):
            nm, np_ = mpmath.mpf(pair[0]), mpmath.mpf(pair[1])
            v = (nm + np_) / 2
            c = 1 / (2 ** (v - 1) * mpmath.sqrt(v) * mpmath.beta(nm / 2, np_ / 2))

            def pdf(x):
                r = mpmath.sqrt(v + x * x)
                return c * (1 + x / r) ** ((nm + 1) / 2) * (1 - x / r) ** ((np_ + 1) / 2)

            loc = mpmath.quad(lambda x: x * pdf(x), [-mpmath.inf, -10, 0, 10, mpmath.inf])
            below = mpmath.quad(lambda x: (x - loc) ** 2 * pdf(x), [-mpmath.inf, -10, loc])
            above = mpmath.quad(lambda x: (x - loc) ** 2 * pdf(x), [loc, 10, mpmath.inf])
            var = below + above
            assert s.location == pytest.approx(float(loc), rel=1e-9, abs=1e-12)
            assert s.m2_minus == pytest.approx(float(below / var), abs=1e-8)
            assert s.m2_plus == pytest.approx(float(above / var), abs=1e-8)

    @pytest.mark.parametrize("pair", PAIRS)
    def test_identities(self, pair):
        s = standardize(SkewTParams(*pair))
        assert abs(s.m2_minus + s.m2_plus - 1.0) <= 1e-8
        assert 0.0 < s.m2_minus < 1.0 and 0.0 < s.m2_plus < 1.0
        if pair[0] == pair[1]:
            assert abs(s.location) <= 1e-12
            assert abs(s.m2_minus - 0.5) <= 1e-8 and abs(s.m2_plus - 0.5) <= 1e-8

    @pytest.mark.parametrize("pair", [(2.5, 8.0), (5.0, 20.0), (50.0, 4.0), (200.0, 200.0)])
    def test_standardized_density_moments(self, pair):
        s = standardize(SkewTParams(*pair))
        f = lambda e, k: e**k * std_pdf(e, s)
        parts = lambda k: sum(
            spi.quad(f, lo, hi, args=(k,), epsabs=1e-13, epsrel=1e-12, limit=400)[0]
            for lo, hi in [(-np.inf, -5.0), (-5.0, 0.0), (0.0, 5.0), (5.0, np.inf)]
        )
        assert abs(parts(0) - 1.0) <= 1e-8
        assert abs(parts(1)) <= 1e-8
        assert abs(parts(2) - 1.0) <= 1e-8

    def test_mpmath_high_precision(self):
        mpmath.mp.dps = 30
        a, b = mpmath.mpf(2.5), mpmath.mpf(10)
        mean = (a - b) * mpmath.sqrt(a + b) / 2 * mpmath.gamma(a - 0.5) * mpmath.gamma(b - 0.5) / (mpmath.gamma(a) * mpmath.gamma(b))
        mpmath.mp.dps = 15
        assert standardize(SkewTParams(5.0, 20.0)).location == pytest.approx(float(mean), rel=1e-11)

    def test_left_heavy_tail_direction(self):
        # heavier left tail pulls the raw mean below zero and puts more
        # second moment on the downside of the standardized residual
        s = standardize(SkewTParams(5.0, 20.0))
        assert s.location < 0.0
        assert s.m2_minus > s.m2_plus
        assert s.location == pytest.approx(jf_oracle(s.params).mean(), rel=1e-9)

    def test_near_floor_is_finite(self):
        s = standardize(SkewTParams(2.05, 2.05))
        mean, var = jf_moments(1.025, 1.025)
        assert s.scale == pytest.approx(math.sqrt(var), rel=1e-8)

    def test_cached(self):
        assert standardize(SkewTParams(7, 11)) is standardize(SkewTParams(7.0, 11.0))


class TestStandardizedDensity:
    def test_student_t_scaling(self):
        s = standardize(SkewTParams(4, 4))
        c = math.sqrt(2.0)  # t(4) has variance 2
        e = np.linspace(-8, 8, 161)
        np.testing.assert_allclose(std_logpdf(e, s), stats.t(4).logpdf(c * e) + math.log(c), rtol=0, atol=1e-10)

    def test_gaussian_limit(self):
        s = standardize(SkewTParams(200, 200))
        e = np.linspace(-5, 5, 2001)
        assert np.max(np.abs(std_pdf(e, s) - stats.norm.pdf(e))) <= 2e-3

    def test_value_at_zero_near_normal(self):
        s = standardize(SkewTParams(200, 200))
        scale = math.sqrt(200.0 / 198.0)
        exact = stats.t(200).logpdf(0.0) + math.log(scale)
        assert std_logpdf(0.0, s) == pytest.approx(exact, abs=1e-12)
        assert abs(std_logpdf(0.0, s) - stats.norm.logpdf(0.0)) <= 5e-3


class TestSample:
    def test_reproducible(self):
        s = standardize(SkewTParams(5, 20))
        a = sample(s, np.random.default_rng(3), 1000)
        b = sample(s, np.random.default_rng(3), 1000)
        assert np.array_equal(a, b)
        assert isinstance(sample(s, np.random.default_rng(3)), float)

    @pytest.mark.parametrize("pair", [(5.0, 20.0), (15.24, 16.95), (8.0, 8.0)])
    def test_moments(self, pair):
        s = standardize(SkewTParams(*pair))
        n = 10**6
        x = sample(s, np.random.default_rng(11), n)
        mean_se = 1.0 / math.sqrt(n)
        assert abs(x.mean()) <= 4 * mean_se
        var_se = math.sqrt((np.mean(x**4) - 1.0) / n)
        assert abs(x.var() - 1.0) <= 4 * var_se

    def test_symmetric_skewness(self):
        s = standardize(SkewTParams(9.0, 9.0))
        n = 10**6
        x = sample(s, np.random.default_rng(5), n)
        se = math.sqrt(np.mean(x**6) / n)
        assert abs(np.mean(x**3)) <= 5 * se

    def test_sign_frequency(self):
        s = standardize(SkewTParams(5.0, 20.0))
        n = 10**6
        x = sample(s, np.random.default_rng(7), n)
        prob = raw_cdf(s.location, s.params)
        se = math.sqrt(prob * (1 - prob) / n)
        assert abs(np.mean(x < 0) - prob) <= 3 * se
