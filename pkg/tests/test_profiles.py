"""Profile families: exact derivatives, window sups, structural checks."""

import math

import numpy as np
import pytest

from pseudowave.profiles import (check_damping, check_potential,
                                 custom_damping, eval_deriv,
                                 exponential_damping, exponential_potential,
                                 logarithmic_damping, logarithmic_potential,
                                 monomial_damping, monomial_potential,
                                 window_sup, zero_potential)

ALL_FAMILIES = [
    monomial_damping(2.0),
    monomial_damping(3.0, scale=0.5),
    exponential_damping(1.0),
    exponential_damping(2.0),
    logarithmic_damping(),
]


def central_diff(fn, x, h=1e-6):
    return (fn(x + h) - fn(x - h)) / (2.0 * h)


class TestEvalDeriv:
    def test_monomial_first(self):
        assert eval_deriv(monomial_damping(2.0), 1, 3.0) == pytest.approx(6.0)

    def test_monomial_vanishing_higher(self):
        assert eval_deriv(monomial_damping(2.0), 3, 5.0) == 0.0

    def test_exponential_chain_rule(self):
        # oracle: hand chain rule 2x e^{x^2} and a central difference
        a = exponential_damping(2.0)
        x = 1.5
        exact = 3.0 * math.exp(2.25)
        assert eval_deriv(a, 1, x) == pytest.approx(exact, rel=1e-14)
        fd = central_diff(lambda t: a.value(t), x)
        assert eval_deriv(a, 1, x) == pytest.approx(fd, rel=1e-8)

    def test_logarithmic_ladder(self):
        a = logarithmic_damping()
        x = 3.7
        assert eval_deriv(a, 1, x) == pytest.approx(1 / x)
        assert eval_deriv(a, 2, x) == pytest.approx(-1 / x**2)
        assert eval_deriv(a, 3, x) == pytest.approx(2 / x**3)

    @pytest.mark.parametrize("profile", ALL_FAMILIES,
                             ids=lambda p: f"{p.family.value}-p{p.p:g}")
    @pytest.mark.parametrize("m", [1, 2, 3, 4])
    def test_consistent_with_finite_differences(self, profile, m):
        # eval_deriv(m) must match the difference quotient of eval_deriv(m-1)
        for x in (1.5, 2.5, 4.0):
            fd = central_diff(lambda t: profile.deriv(m - 1, t), x)
            exact = profile.deriv(m, x)
            if abs(exact) > 1e-8:
                assert exact == pytest.approx(fd, rel=1e-6)
            else:
                assert abs(fd - exact) < 1e-6

    def test_order_capped(self):
        a = monomial_damping(2.0, max_order=3)
        with pytest.raises(ValueError, match="max_order"):
            a.deriv(4, 2.0)

    def test_log_domain(self):
        with pytest.raises(ValueError, match="x > 0"):
            logarithmic_damping().value(-1.0)

    def test_vectorized(self):
        a = exponential_damping(1.0)
        xs = np.array([1.0, 2.0, 3.0])
        assert np.allclose(a.deriv(1, xs), np.exp(xs))


class TestWindowSup:
    def test_zero_potential(self):
        assert window_sup(zero_potential(), 0, 10.0, 2.0) == 0.0

    def test_constant_derivative(self):
        assert window_sup(monomial_potential(1.0), 1, 10.0, 2.0) == \
            pytest.approx(1.0)

    def test_monotone_endpoint(self):
        # monotone on the window, so the sup sits at the right endpoint
        assert window_sup(monomial_potential(2.0), 0, 10.0, 2.0) == \
            pytest.approx(144.0, rel=1e-14)

    def test_interior_maximum_refined(self):
        # |q''| of x^3 is 6x, monotone; but |q'''| = 6 constant
        q = monomial_potential(3.0)
        assert window_sup(q, 3, 10.0, 2.0) == pytest.approx(6.0)

    def test_domain_guard(self):
        with pytest.raises(ValueError, match="domain"):
            window_sup(logarithmic_potential(), 0, 1.0, 2.0)


class TestStructuralChecks:
    def test_monomial_control_constants(self):
        # |a^(m)(x)| <= C x^{-m} a(x) with C the falling-factorial product
        a = monomial_damping(3.0)
        xs = np.geomspace(1.0, 1e3, 200)
        for m in (1, 2):
            cexp = abs(math.prod(3.0 - i for i in range(m)))
            ratio = np.abs(a.deriv(m, xs)) / (xs ** (-m) * a.value(xs))
            assert np.max(ratio) <= cexp * (1 + 1e-12)
            assert np.max(ratio) == pytest.approx(cexp, rel=1e-10)

    def test_exponential_derivative_growth(self):
        # |a'(x)| tracks p x^{p-1} a(x) within a factor of 2 on the grid
        a = exponential_damping(2.0)
        xs = np.geomspace(1.0, 25.0, 100)  # e^{x^2} overflows past x ~ 26.6
        model = 2.0 * xs * a.value(xs)
        ratio = a.deriv(1, xs) / model
        assert np.all(ratio < 2.0) and np.all(ratio > 0.5)

    @pytest.mark.parametrize("profile", ALL_FAMILIES,
                             ids=lambda p: f"{p.family.value}-p{p.p:g}")
    def test_damping_assumptions_hold(self, profile):
        chk = check_damping(profile)
        assert chk.ok
        assert all(c > 0 for c in chk.control_constants)

    def test_potential_nonnegative(self):
        assert check_potential(monomial_potential(2.0))
        assert check_potential(zero_potential())


class TestCustomProfiles:
    def test_requires_closed_form_derivatives(self):
        with pytest.raises(ValueError, match="closed-form"):
            custom_damping([], nu=-1.0, x_min=1.0)

    def test_custom_ladder_used(self):
        a = custom_damping(
            [lambda x: x**2 + x, lambda x: 2 * x + 1, lambda x: 2.0 + 0 * x],
            nu=-1.0, x_min=1.0)
        assert a.max_order == 2
        assert a.deriv(1, 2.0) == pytest.approx(5.0)
        assert check_damping(a).ok
