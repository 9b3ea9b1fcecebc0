"""Grid calculus: stencil exactness, anchored quadrature, norms."""

import numpy as np
import pytest

from pseudowave.gridfn import (GridFunction, GridSpec, cumulative_integral,
                               derivative, inner_product, l2_norm, sup_norm,
                               to_csv)


def make(fn, x0, x1, n):
    h = (x1 - x0) / (n - 1)
    spec = GridSpec(x0, h, n)
    return GridFunction.from_callable(spec, fn)


class TestLayout:
    def test_even_node_count_rejected(self):
        with pytest.raises(ValueError, match="odd"):
            GridSpec(0.0, 0.1, 10)

    def test_too_short_rejected(self):
        with pytest.raises(ValueError, match="short"):
            GridSpec(0.0, 0.1, 7)

    def test_center_index(self):
        spec = GridSpec(-1.0, 0.25, 9)
        assert spec.center_index == 4
        assert spec.xs()[4] == pytest.approx(0.0, abs=1e-15)

    def test_values_immutable(self):
        f = make(lambda x: x, 0.0, 1.0, 11)
        with pytest.raises(ValueError):
            f.values[0] = 1.0


class TestDerivative:
    def test_quadratic_first_derivative_exact(self):
        f = make(lambda x: x**2, 0.0, 2.0, 201)  # h = 0.01
        df = derivative(f, 1)
        assert np.max(np.abs(df.values - 2.0 * f.xs())) < 1e-8

    def test_constant_second_derivative_zero(self):
        f = make(lambda x: np.ones_like(x), 0.0, 1.0, 101)
        d2 = derivative(f, 2)
        assert np.max(np.abs(d2.values)) < 1e-12

    def test_oscillatory_second_derivative(self):
        # k h = 0.1 keeps even the one-sided edge stencils under 1e-4
        k = 50.0
        h = 0.1 / k
        n = 2001
        spec = GridSpec(0.0, h, n)
        f = GridFunction.from_callable(spec, lambda x: np.exp(1j * k * x))
        d2 = derivative(f, 2)
        exact = -k**2 * f.values
        rel = np.max(np.abs(d2.values - exact)) / k**2
        assert rel < 1e-4

    def test_bad_order(self):
        f = make(lambda x: x, 0.0, 1.0, 11)
        with pytest.raises(ValueError, match="order"):
            derivative(f, 3)

    def test_fourth_order_convergence(self):
        errs = []
        for n in (201, 401):
            f = make(np.cos, 0.0, 3.0, n)
            df = derivative(f, 1)
            errs.append(np.max(np.abs(df.values + np.sin(f.xs()))))
        assert errs[1] < errs[0] / 12.0  # ~16x for a 4th-order scheme


class TestCumulativeIntegral:
    def test_constant_integrand(self):
        f = make(lambda x: np.ones_like(x), -2.0, 2.0, 401)
        F = cumulative_integral(f, f.center_index)
        assert np.max(np.abs(F.values - f.xs())) < 1e-13

    def test_linear_integrand_closed_form(self):
        f = make(lambda x: 2.0 * x, -1.0, 1.0, 2001)  # h = 1e-3
        F = cumulative_integral(f, f.center_index)
        assert np.max(np.abs(F.values - f.xs() ** 2)) < 1e-10

    def test_odd_integrand_gives_even_antiderivative(self):
        f = make(lambda x: np.sin(3 * x) + x**3, -2.0, 2.0, 801)
        F = cumulative_integral(f, f.center_index)
        assert np.max(np.abs(F.values - F.values[::-1])) < 1e-12

    def test_derivative_inverts_integral(self):
        # round trip error is O(h^4) away from the edges
        errs = []
        for n in (401, 801):
            f = make(lambda x: np.exp(np.sin(x)), 0.0, 3.0, n)
            F = cumulative_integral(f, f.center_index)
            back = derivative(F, 1)
            errs.append(np.max(np.abs(back.values[4:-4] - f.values[4:-4])))
        assert errs[0] < 1e-8
        assert errs[1] < errs[0] / 10.0

    def test_anchor_validated(self):
        f = make(lambda x: x, 0.0, 1.0, 11)
        with pytest.raises(ValueError, match="anchor"):
            cumulative_integral(f, 11)


class TestNorms:
    def test_unit_constant(self):
        f = make(lambda x: np.ones_like(x), 0.0, 1.0, 101)
        assert l2_norm(f) == pytest.approx(1.0, abs=1e-14)

    def test_sine_half_power(self):
        f = make(lambda x: np.sin(np.pi * x), 0.0, 1.0, 1001)
        assert l2_norm(f) == pytest.approx(1.0 / np.sqrt(2.0), abs=1e-6)

    def test_zero_function(self):
        f = make(lambda x: np.zeros_like(x), 0.0, 1.0, 11)
        assert l2_norm(f) == 0.0
        assert sup_norm(f) == 0.0

    def test_scalar_homogeneity_and_triangle(self):
        rng = np.random.default_rng(7)
        spec = GridSpec(0.0, 0.01, 301)
        for _ in range(10):
            u = rng.standard_normal(301) + 1j * rng.standard_normal(301)
            v = rng.standard_normal(301) + 1j * rng.standard_normal(301)
            fu = GridFunction(spec.x0, spec.h, u)
            fv = GridFunction(spec.x0, spec.h, v)
            fsum = GridFunction(spec.x0, spec.h, u + v)
            assert l2_norm(GridFunction(spec.x0, spec.h, 3.5 * u)) == \
                pytest.approx(3.5 * l2_norm(fu), rel=1e-12)
            assert l2_norm(fsum) <= l2_norm(fu) + l2_norm(fv) + 1e-12

    def test_inner_product_matches_norm(self):
        f = make(lambda x: np.sin(x) + 1j * np.cos(2 * x), 0.0, 2.0, 201)
        assert inner_product(f, f).real == pytest.approx(l2_norm(f) ** 2,
                                                         rel=1e-12)


def test_csv_round_trip(tmp_path):
    f = make(lambda x: np.exp(1j * x), 0.0, 1.0, 11)
    path = tmp_path / "f.csv"
    to_csv(f, path)
    rows = np.genfromtxt(path, delimiter=",", names=True)
    assert set(rows.dtype.names) == {"x", "re_f", "im_f"}
    assert np.allclose(rows["x"], f.xs())
    assert np.allclose(rows["re_f"] + 1j * rows["im_f"], f.values)
