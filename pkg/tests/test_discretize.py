"""Matrix route: block operator, weighted sigma_min, scans, eigenvalues."""

import numpy as np
import pytest
from scipy import linalg as sla

from pseudowave.discretize import (ScanRect, build_operator, grid_csv_rows,
                                   interpolate_to_operator,
                                   pseudospectrum_scan, residual_quotient,
                                   sigma_min_weighted, spectrum, weighted_norm)
from pseudowave.profiles import (custom_damping, monomial_damping,
                                 zero_potential)
from pseudowave.pseudomode import BetaCurve, PseudomodeConfig, assemble_at_b
from pseudowave.residual import report_for

A_X2 = monomial_damping(2.0)
Q_ZERO = zero_potential()


def constant_damping(c):
    return custom_damping(
        [lambda x, c=c: c + 0.0 * x, lambda x: 0.0 * x, lambda x: 0.0 * x],
        nu=-1.0, x_min=1.0)


class TestBuildOperator:
    def test_undamped_spectrum_is_imaginary(self):
        # a = 0: eigenvalues are +-i sqrt(mu_k) for the discrete Laplacian
        disc = build_operator(constant_damping(0.0), Q_ZERO, L=5.0, N=120)
        vals = np.linalg.eigvals(disc.A)
        assert np.max(np.abs(vals.real)) < 1e-8
        mu = np.sort(sla.eigvalsh(disc.K))
        freqs = np.sort(vals.imag[vals.imag > 0])
        assert np.allclose(freqs, np.sqrt(mu), rtol=1e-8)

    def test_constant_damping_modes_solve_scalar_quadratic(self):
        # each Laplacian mode gives lam^2 + 2 c lam + mu_k = 0
        c = 0.7
        disc = build_operator(constant_damping(c), Q_ZERO, L=5.0, N=120)
        vals = np.linalg.eigvals(disc.A)
        mu = sla.eigvalsh(disc.K)
        expected = []
        for m in mu:
            disc_root = np.sqrt(complex(c * c - m))
            expected.extend([-c + disc_root, -c - disc_root])
        key = lambda z: (round(z.real, 9), z.imag)  # noqa: E731
        expected = np.array(sorted(expected, key=key))
        got = np.array(sorted(vals, key=key))
        assert np.allclose(got, expected, atol=1e-7)

    def test_numerical_range_in_left_half_plane(self):
        disc = build_operator(A_X2, Q_ZERO, L=8.0, N=150)
        rng = np.random.default_rng(5)
        for _ in range(20):
            w = rng.standard_normal(2 * disc.N) \
                + 1j * rng.standard_normal(2 * disc.N)
            k2 = disc.K + np.diag(disc.q_diag)
            m_blocks = disc.h * np.block(
                [[k2, np.zeros((disc.N, disc.N))],
                 [np.zeros((disc.N, disc.N)), np.eye(disc.N)]])
            num = np.vdot(w, m_blocks @ (disc.A @ w)).real
            assert num <= 1e-10 * np.vdot(w, m_blocks @ w).real

    def test_eigenvalues_in_conjugate_pairs(self):
        disc = build_operator(A_X2, Q_ZERO, L=6.0, N=110)
        vals = np.linalg.eigvals(disc.A)
        nonreal = vals[vals.imag > 1e-8]
        for lam in nonreal[:20]:
            assert np.min(np.abs(vals - lam.conjugate())) < 1e-6 * abs(lam)

    def test_size_guards(self):
        with pytest.raises(ValueError, match="N too small|at least 100"):
            build_operator(A_X2, Q_ZERO, L=5.0, N=50)
        with pytest.raises(ValueError, match="budget"):
            build_operator(A_X2, Q_ZERO, L=5.0, N=1500)


class TestSigmaMin:
    def test_vanishes_at_eigenvalue(self):
        disc = build_operator(A_X2, Q_ZERO, L=8.0, N=150)
        rep = spectrum(disc)
        up = rep.values[rep.values.imag > 0.1]
        lam1 = up[np.argmin(np.abs(up.imag))]
        s = sigma_min_weighted(disc, lam1)
        scale = sla.svdvals(disc.A)[0]
        assert s < 1e-8 * scale

    def test_conjugate_symmetry(self):
        disc = build_operator(A_X2, Q_ZERO, L=8.0, N=150)
        s1 = sigma_min_weighted(disc, complex(-2.5, 1.3))
        s2 = sigma_min_weighted(disc, complex(-2.5, -1.3))
        assert abs(s1 - s2) < 1e-10 * s1

    def test_left_right_boundary_asymmetry(self):
        # the qualitative shape: sigma_min far left (off the real axis) is
        # orders of magnitude below anything on the right edge
        disc = build_operator(A_X2, Q_ZERO, L=12.0, N=300)
        ims = np.linspace(0.0, 6.0, 7)
        left = min(sigma_min_weighted(disc, complex(-8.0, y))
                   for y in ims if abs(y) >= 1.0)
        right = min(sigma_min_weighted(disc, complex(3.0, y)) for y in ims)
        assert left < 1e-3 * right

    def test_theorem_curve_monotone(self):
        disc = build_operator(A_X2, Q_ZERO, L=12.0, N=240)
        vals = [sigma_min_weighted(disc, complex(-al, al ** (-0.3)))
                for al in (2.0, 4.0, 6.0)]
        assert vals[0] > vals[1] > vals[2]


class TestSpectrumReport:
    def test_sorted_by_imaginary_magnitude(self):
        disc = build_operator(A_X2, Q_ZERO, L=8.0, N=150)
        rep = spectrum(disc)
        mags = np.abs(rep.values.imag)
        assert np.all(np.diff(mags) >= -1e-12)

    def test_mesh_convergence_of_first_pair(self):
        pairs = []
        for nn in (300, 600):
            disc = build_operator(A_X2, Q_ZERO, L=12.0, N=nn)
            rep = spectrum(disc)
            up = rep.values[rep.values.imag > 0.1]
            pairs.append(up[np.argmin(np.abs(up.imag))])
        assert abs(pairs[1] - pairs[0]) / abs(pairs[0]) < 0.01

    def test_first_modes_not_boundary_flagged(self):
        disc = build_operator(A_X2, Q_ZERO, L=10.0, N=200)
        rep = spectrum(disc)
        up = np.flatnonzero(rep.values.imag > 0.1)
        first = up[np.argmin(np.abs(rep.values[up].imag))]
        assert not rep.boundary_flags[first]


class TestScan:
    def test_single_cell_equals_direct_call(self):
        disc = build_operator(A_X2, Q_ZERO, L=6.0, N=110)
        rect = ScanRect(-2.0, -2.0, 1.0, 1.0, nx=1, ny=1)
        grid = pseudospectrum_scan(disc, rect)
        assert grid.values.shape == (1, 1)
        assert grid.values[0, 0] == pytest.approx(
            sigma_min_weighted(disc, complex(-2.0, 1.0)), rel=1e-12)

    def test_grid_csv_header_and_rows(self):
        disc = build_operator(A_X2, Q_ZERO, L=6.0, N=110)
        rect = ScanRect(-2.0, 0.0, 0.5, 1.5, nx=3, ny=2)
        grid = pseudospectrum_scan(disc, rect, max_workers=2)
        preamble, rows = grid_csv_rows(grid)
        assert preamble.startswith("# rect=-2,0,0.5,1.5 nx=3 ny=2")
        assert len(rows) == 6
        assert float(rows[0][2]) == pytest.approx(grid.values[0, 0])

    def test_parallel_matches_serial(self):
        disc = build_operator(A_X2, Q_ZERO, L=6.0, N=110)
        rect = ScanRect(-3.0, 0.0, 0.5, 2.0, nx=2, ny=2)
        serial = pseudospectrum_scan(disc, rect)
        parallel = pseudospectrum_scan(disc, rect, max_workers=4)
        assert np.array_equal(serial.values, parallel.values)

    def test_degenerate_rectangle_rejected(self):
        with pytest.raises(ValueError, match="degenerate|resolution"):
            ScanRect(0.0, -1.0, 0.0, 1.0, nx=2, ny=2)


class TestResolventConsistency:
    def test_wkb_mode_upper_bounds_sigma_min(self):
        # sigma_min(lam) <= ||(A - lam) Psi||_M / ||Psi||_M for the
        # interpolated pseudomode, and the matrix route roughly agrees with
        # the grid-function route at matched lambda
        cfg = PseudomodeConfig(n=0, epsilon=0.1,
                               beta_curve=BetaCurve("power", s=1.0))
        asm = assemble_at_b(A_X2, Q_ZERO, cfg, 2.2)
        disc = build_operator(A_X2, Q_ZERO, L=12.0, N=600)
        psi = interpolate_to_operator(disc, asm.f.xs(), asm.f.values, asm.lam)
        quot = residual_quotient(disc, asm.lam, psi)
        smin = sigma_min_weighted(disc, asm.lam)
        assert smin <= quot * (1.0 + 1e-9)
        wkb_ratio = report_for(A_X2, Q_ZERO, asm).ratio
        assert quot == pytest.approx(wkb_ratio, rel=0.5)

    def test_support_inside_interval_enforced(self):
        disc = build_operator(A_X2, Q_ZERO, L=4.0, N=120)
        xs = np.linspace(-5.0, 5.0, 100)
        with pytest.raises(ValueError, match="support"):
            interpolate_to_operator(disc, xs, np.exp(-xs**2), -1 + 1j)

    def test_weighted_norm_positive(self):
        disc = build_operator(A_X2, Q_ZERO, L=5.0, N=100)
        rng = np.random.default_rng(9)
        w = rng.standard_normal(200) + 1j * rng.standard_normal(200)
        assert weighted_norm(disc, w) > 0
