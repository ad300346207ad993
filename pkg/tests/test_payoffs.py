"""Reward and running-payoff families, their transforms, and the
exponential-mode convolution that backs the derivative kernels."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

import oracles
from levystop import (
    DegenerateExponent,
    DomainError,
    exp_cap,
    f_eval,
    g_eval,
    linear_floor,
    make_context,
    psi_derivative,
    reward,
    simple,
    varpi,
    weighted_sum,
)
from levystop.payoffs import (
    convolve_modes,
    g_prime,
    g_second,
    psi_f,
    segments,
    theta_f,
    theta_prime,
    theta_second,
)


class TestReward:
    def test_rejects_negative_slope(self):
        with pytest.raises(DomainError):
            reward(1.0, -0.5)

    def test_rejects_nonpositive_exponent(self):
        with pytest.raises(DomainError):
            reward(1.0, 0.0, [(0.0, 1.0)])

    def test_rejects_nonpositive_coefficient(self):
        with pytest.raises(DomainError):
            reward(1.0, 0.0, [(0.5, -1.0)])

    def test_rejects_repeated_exponents(self):
        with pytest.raises(DomainError):
            reward(1.0, 0.0, [(0.5, 1.0), (0.5, 2.0)])

    def test_hand_value(self):
        g = reward(10.0, 2.0, [(0.5, 1.0), (1.0, 3.0)])
        x = 0.4
        expected = 10.0 - 0.8 - math.exp(0.2) - 3.0 * math.exp(0.4)
        assert g_eval(g, x) == pytest.approx(expected, rel=1e-15)

    def test_vector_evaluation(self):
        g = reward(1.0, 1.0, [(0.3, 0.5)])
        xs = np.array([-1.0, 0.0, 2.0])
        vals = g_eval(g, xs)
        assert vals.shape == (3,)
        for x, v in zip(xs, vals):
            assert v == pytest.approx(g_eval(g, float(x)))

    def test_derivatives_match_finite_differences(self):
        g = reward(5.0, 1.5, [(0.2, 2.0), (0.7, 0.3)])
        h1, h2 = 1e-6, 1e-4  # wider step for the second difference
        for x in (-2.0, 0.0, 1.0):
            fd1 = (g_eval(g, x + h1) - g_eval(g, x - h1)) / (2 * h1)
            fd2 = (
                g_eval(g, x + h2) - 2 * g_eval(g, x) + g_eval(g, x - h2)
            ) / h2**2
            assert g_prime(g, x) == pytest.approx(fd1, rel=1e-8)
            assert g_second(g, x) == pytest.approx(fd2, rel=1e-5, abs=1e-7)

    def test_decreasing_when_terms_present(self):
        g = reward(10.0, 0.0, [(0.1, 4.0)])
        xs = np.linspace(-5, 3, 50)
        vals = g_eval(g, xs)
        assert (np.diff(vals) < 0).all()


class TestSimple:
    def test_rejects_length_mismatch(self):
        with pytest.raises(DomainError):
            simple((0.0,), (1.0,))

    def test_rejects_unordered_breakpoints(self):
        with pytest.raises(DomainError):
            simple((1.0, 0.0), (1.0, 2.0, 3.0))

    def test_rejects_nonincreasing_values(self):
        with pytest.raises(DomainError):
            simple((0.0,), (2.0, 2.0))

    def test_rejects_infinite_breakpoints(self):
        with pytest.raises(DomainError):
            simple((math.inf,), (1.0, 2.0))

    def test_left_closed_on_the_right(self):
        f = simple((0.0,), (-10.0, 10.0))
        assert f_eval(f, 0.0) == -10.0
        assert f_eval(f, 1e-9) == 10.0
        assert f_eval(f, -5.0) == -10.0

    def test_three_levels(self):
        f = simple((-1.0, 1.0), (0.0, 5.0, 9.0))
        got = f_eval(f, np.array([-2.0, -1.0, 0.0, 1.0, 3.0]))
        assert got.tolist() == [0.0, 0.0, 5.0, 5.0, 9.0]


class TestLinearFloor:
    def test_rejects_nonpositive_slope(self):
        with pytest.raises(DomainError):
            linear_floor(0.0, 0.0, -math.inf)

    def test_rejects_infinite_intercept(self):
        with pytest.raises(DomainError):
            linear_floor(1.0, math.inf, 0.0)

    def test_rejects_positive_infinite_floor(self):
        with pytest.raises(DomainError):
            linear_floor(1.0, 0.0, math.inf)

    def test_values(self):
        f = linear_floor(2.0, 1.0, 0.5)
        assert f_eval(f, 3.0) == pytest.approx(8.0)
        assert f_eval(f, -4.0) == pytest.approx(1.0)  # floored at b3

    def test_floorless(self):
        f = linear_floor(1.0, 0.0, -math.inf)
        assert f_eval(f, -7.5) == -7.5
        assert f_eval(f, 2.5) == 2.5


class TestExpCap:
    def test_rejects_nonpositive_rate(self):
        with pytest.raises(DomainError):
            exp_cap(-1.0, 1.0)

    def test_rejects_infinite_cap(self):
        with pytest.raises(DomainError):
            exp_cap(1.0, math.inf)

    def test_values(self):
        f = exp_cap(2.0, 1.0)
        assert f_eval(f, 0.25) == pytest.approx(math.exp(0.5))
        assert f_eval(f, 3.0) == pytest.approx(math.e)  # capped at e^B


class TestWeightedSum:
    def test_rejects_negative_weight(self):
        with pytest.raises(DomainError):
            weighted_sum([(-0.1, exp_cap(1.0, 1.0))])

    def test_rejects_foreign_part(self):
        with pytest.raises(DomainError):
            weighted_sum([(1.0, "not a payoff")])

    def test_linearity(self):
        a = simple((0.0,), (-1.0, 1.0))
        b = exp_cap(1.0, 2.0)
        f = weighted_sum([(0.3, a), (0.6, b)])
        for y in (-1.0, 0.5, 4.0):
            assert f_eval(f, y) == pytest.approx(
                0.3 * f_eval(a, y) + 0.6 * f_eval(b, y), rel=1e-15
            )


class TestVarpi:
    def test_value(self, weibull):
        from levystop import laplace_exponent, solve_phi

        r = 0.5
        phi = solve_phi(weibull, r)
        for a in (0.1, 0.9, 2.0):
            expected = (r - float(laplace_exponent(weibull, a).real)) / (phi - a)
            assert varpi(weibull, r, a) == pytest.approx(expected, rel=1e-13)

    def test_positive_by_convexity(self, weibull):
        for a in np.linspace(0.05, 6.0, 40):
            assert varpi(weibull, 0.5, float(a)) > 0

    def test_tie_limit_is_slope(self, weibull):
        from levystop import solve_phi

        phi = solve_phi(weibull, 0.5)
        slope = float(psi_derivative(weibull, phi).real)
        assert varpi(weibull, 0.5, phi) == pytest.approx(slope, rel=1e-12)
        assert varpi(weibull, 0.5, phi + 1e-11) == pytest.approx(slope, rel=1e-9)


FAMILIES = {
    "step": simple((-0.5, 1.0), (-4.0, 0.5, 3.0)),
    "linear": linear_floor(1.5, 0.3, -math.inf),
    "floored": linear_floor(2.0, 0.0, -1.0),
    "capped_exp": exp_cap(0.8, 1.2),
    "mixture": weighted_sum(
        [
            (0.4, simple((0.0,), (-10.0, 10.0))),
            (0.35, linear_floor(1.0, 0.0, -2.0)),
            (0.25, exp_cap(1.0, 1.0)),
        ]
    ),
}


class TestPsiF:
    @pytest.mark.parametrize("name", sorted(FAMILIES))
    def test_matches_quadrature(self, ctx_005, name):
        f = FAMILIES[name]
        sd = ctx_005.spectral
        for A in (-3.0, -0.5, 0.7, 2.0):
            quad = oracles.psi_f_quadrature(f, sd.phi_r, A)
            assert psi_f(f, sd, A) == pytest.approx(quad, rel=1e-7, abs=1e-9)

    def test_positive_payoff_gives_positive_transform(self, ctx_2):
        sd = ctx_2.spectral
        assert psi_f(exp_cap(1.0, 1.0), sd, -10.0) > 0

    def test_rate_collision_refused(self, ctx_005):
        phi = ctx_005.spectral.phi_r
        with pytest.raises(DegenerateExponent):
            psi_f(exp_cap(phi, 5.0), ctx_005.spectral, 0.0)


class TestThetaF:
    @pytest.mark.parametrize("name", sorted(FAMILIES))
    def test_matches_quadrature(self, ctx_005, name):
        f = FAMILIES[name]
        for A, x in ((-2.0, -0.4), (-2.0, 1.5), (0.5, 3.0)):
            quad = oracles.theta_f_quadrature(f, ctx_005, x, A)
            assert theta_f(f, ctx_005, x, A) == pytest.approx(
                quad, rel=1e-8, abs=1e-10
            )

    def test_zero_at_and_below_level(self, ctx_005):
        f = FAMILIES["mixture"]
        assert theta_f(f, ctx_005, -1.0, -1.0) == 0.0
        assert theta_f(f, ctx_005, -2.0, -1.0) == 0.0

    def test_derivatives_match_finite_differences(self, ctx_005):
        A = -1.0
        h = 1e-5
        for name in ("linear", "capped_exp", "mixture"):
            f = FAMILIES[name]
            for x in (0.2, 1.4):
                fd1 = (
                    theta_f(f, ctx_005, x + h, A) - theta_f(f, ctx_005, x - h, A)
                ) / (2 * h)
                fd2 = (
                    theta_f(f, ctx_005, x + h, A)
                    - 2 * theta_f(f, ctx_005, x, A)
                    + theta_f(f, ctx_005, x - h, A)
                ) / h**2
                assert theta_prime(f, ctx_005, x, A) == pytest.approx(
                    fd1, rel=1e-6
                )
                assert theta_second(f, ctx_005, x, A) == pytest.approx(
                    fd2, rel=1e-4
                )


class TestSegments:
    @pytest.mark.parametrize("name", sorted(FAMILIES))
    def test_reconstructs_payoff(self, name):
        f = FAMILIES[name]
        pieces = segments(f)
        for y in np.linspace(-4.0, 4.0, 37):
            total = 0.0
            for lo, hi, c0, c1, ce, L in pieces:
                if lo < y <= hi:
                    total += c0 + c1 * y + ce * math.exp(L * y)
            assert total == pytest.approx(float(f_eval(f, y)), rel=1e-12, abs=1e-12)


class TestConvolveModes:
    def test_against_quadrature_with_custom_kernel(self):
        # kernel 1.3 e^{-0.5 u} + 0.2 e^{0.4 u} on u = x - y
        weights = np.array([1.3 + 0.0j, 0.2 + 0.0j])
        rates = np.array([-0.5 + 0.0j, 0.4 + 0.0j])
        f = FAMILIES["mixture"]
        A, x = -1.5, 2.0

        def kernel(y):
            u = x - y
            k = sum((w * np.exp(rho * u)).real for w, rho in zip(weights, rates))
            return k * float(f_eval(f, y))

        expected, _ = integrate.quad(kernel, A, x, limit=300,
                                     points=[-1.0, 0.0, 1.0])
        total, _ = convolve_modes(f, weights, rates, x, A)
        assert total.real == pytest.approx(expected, rel=1e-9)
        assert total.imag == pytest.approx(0.0, abs=1e-12)

    def test_empty_below_level(self):
        total, mag = convolve_modes(
            FAMILIES["step"], np.array([1.0 + 0j]), np.array([0.5 + 0j]), 0.0, 0.0
        )
        assert total == 0.0
        assert mag == 0.0


@settings(max_examples=25, deadline=None)
@given(
    gamma1=st.floats(0.0, 2.0),
    gamma2=st.floats(0.0, 2.0),
    A=st.floats(-3.0, 1.0),
)
def test_psi_f_is_linear_in_the_mixture(gamma1, gamma2, A):
    from levystop import fixtures, spectral_data

    sd = spectral_data(fixtures.weibull_model(), 0.5)
    a = simple((0.0,), (-1.0, 2.0))
    b = exp_cap(0.7, 1.0)
    combined = psi_f(weighted_sum([(gamma1, a), (gamma2, b)]), sd, A)
    split = gamma1 * psi_f(a, sd, A) + gamma2 * psi_f(b, sd, A)
    assert combined == pytest.approx(split, rel=1e-12, abs=1e-12)
