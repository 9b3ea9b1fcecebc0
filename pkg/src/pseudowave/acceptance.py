"""Acceptance suite: every shipping criterion as a callable check.

Each criterion returns a CriterionResult; tests/test_acceptance.py asserts
them and the CLI `selftest` mode prints one pass/fail line per criterion.
Tolerances are pinned here, not in the callers. Expected values for the
explicit-spectrum check are the closed-form eigenvalues
2^(1/3) e^(+-i 2pi/3) (2k+1)^(2/3) of the quadratic pencil with a = x^2.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np

from . import discretize, pseudomode, profiles, residual, wkb

# closed-form nonreal eigenvalues for a = x^2, q = 0 (second quadrant)
SPECTRUM_X2_FIRST = complex(-0.6299605249474365, 1.0911236359717214)
SPECTRUM_X2_SECOND = complex(-1.3103706971044482, 2.2696286241343516)


@dataclass(frozen=True)
class CriterionResult:
    index: int
    name: str
    passed: bool
    detail: str
    seconds: float


def _result(index: int, name: str, t0: float, passed: bool,
            detail: str) -> CriterionResult:
    return CriterionResult(index=index, name=name, passed=bool(passed),
                           detail=detail, seconds=time.time() - t0)


@lru_cache(maxsize=1)
def _x2_discretization_600() -> discretize.OperatorDiscretization:
    a = profiles.monomial_damping(2.0)
    q = profiles.zero_potential()
    return discretize.build_operator(a, q, L=12.0, N=600)


@lru_cache(maxsize=1)
def _rate_sweep() -> tuple:
    """The shared polynomial-damping sweep: x^2, q = 0, n = 3, beta = b."""
    a = profiles.monomial_damping(2.0)
    q = profiles.zero_potential()
    cfg = pseudomode.PseudomodeConfig(
        n=3, epsilon=0.1, beta_curve=pseudomode.BetaCurve("power", s=1.0))
    reports = residual.sweep(a, q, cfg, [8.0, 12.0, 16.0, 24.0, 32.0])
    assemblies = [pseudomode.assemble_at_b(a, q, cfg, b)
                  for b in [8.0, 12.0, 16.0, 24.0, 32.0]]
    return a, q, cfg, reports, assemblies


def criterion_explicit_spectrum() -> CriterionResult:
    """Discretized spectrum reproduces the closed-form nonreal pairs (5%)."""
    t0 = time.time()
    rep = discretize.spectrum(_x2_discretization_600())
    vals = rep.values
    upper = vals[(vals.imag > 0.1)]
    upper = upper[np.argsort(np.abs(upper.imag))]
    err1 = abs(upper[0] - SPECTRUM_X2_FIRST) / abs(SPECTRUM_X2_FIRST)
    err2 = abs(upper[1] - SPECTRUM_X2_SECOND) / abs(SPECTRUM_X2_SECOND)
    cluster = int(np.sum((np.abs(vals.imag) < 1e-3) & (vals.real < 0)))
    elapsed = time.time() - t0
    passed = err1 < 0.05 and err2 < 0.05 and cluster >= 10 and elapsed < 120
    detail = (f"pair1 {upper[0]:.6f} (rel err {err1:.2e}), "
              f"pair2 {upper[1]:.6f} (rel err {err2:.2e}), "
              f"negative-real cluster {cluster}, {elapsed:.0f}s")
    return _result(1, "explicit spectrum, a = x^2 (L=12, N=600)", t0, passed,
                   detail)


def criterion_polynomial_rate() -> CriterionResult:
    """n = 3 sweep with beta = b: ratio strictly decreasing, slope <= -6."""
    t0 = time.time()
    a, q, cfg, reports, _ = _rate_sweep()
    ratios = [r.ratio for r in reports]
    decreasing = all(y < x for x, y in zip(ratios, ratios[1:]))
    fit = residual.fit_rate(reports, a)
    elapsed = time.time() - t0
    passed = decreasing and fit.slope <= -6.0 and elapsed < 120
    detail = (f"ratios {['%.2e' % r for r in ratios]}, "
              f"slope {fit.slope:.2f} (need <= -6), R^2 {fit.r2:.3f}, "
              f"{elapsed:.0f}s")
    return _result(2, "polynomial damping rate (n=3, beta=b)", t0, passed,
                   detail)


def criterion_basic_ansatz_decay() -> CriterionResult:
    """Basic ansatz: halving for x^2 + linear potential; decay for ln x."""
    t0 = time.time()
    a = profiles.monomial_damping(2.0)
    qx = profiles.monomial_potential(1.0)
    cfg = pseudomode.PseudomodeConfig(
        n=0, epsilon=0.1, beta_curve=pseudomode.BetaCurve("constant", c=1.0))
    r10 = residual.report_for(a, qx, pseudomode.assemble_at_b(a, qx, cfg, 10.0))
    r40 = residual.report_for(a, qx, pseudomode.assemble_at_b(a, qx, cfg, 40.0))
    half_ok = r40.ratio <= 0.5 * r10.ratio

    alog = profiles.logarithmic_damping()
    q0 = profiles.zero_potential()
    log_ratios = []
    for alpha in [3.0, 4.0, 5.0, 6.0]:
        asm = pseudomode.assemble(alog, q0, cfg, alpha)
        log_ratios.append(residual.report_for(alog, q0, asm).ratio)
    log_ok = all(y < x for x, y in zip(log_ratios, log_ratios[1:]))
    elapsed = time.time() - t0
    passed = half_ok and log_ok and elapsed < 120
    detail = (f"x^2+x: ratio(10) {r10.ratio:.3e} -> ratio(40) {r40.ratio:.3e} "
              f"(halving {half_ok}); ln x ratios "
              f"{['%.2e' % r for r in log_ratios]} decreasing {log_ok}, "
              f"{elapsed:.0f}s")
    return _result(3, "basic-ansatz decay (n=0)", t0, passed, detail)


def criterion_expansion_gain() -> CriterionResult:
    """At fixed b = 16 the n = 3 residual beats n = 0 by >= 10x."""
    t0 = time.time()
    a = profiles.monomial_damping(2.0)
    q = profiles.zero_potential()
    ratios = {}
    for n in (0, 3):
        cfg = pseudomode.PseudomodeConfig(
            n=n, epsilon=0.1, beta_curve=pseudomode.BetaCurve("power", s=1.0))
        asm = pseudomode.assemble_at_b(a, q, cfg, 16.0)
        ratios[n] = residual.report_for(a, q, asm).ratio
    factor = ratios[0] / ratios[3]
    passed = factor >= 10.0
    detail = (f"n=0 ratio {ratios[0]:.3e}, n=3 ratio {ratios[3]:.3e}, "
              f"factor {factor:.1e} (need >= 10)")
    return _result(4, "phase-expansion gain at b = 16", t0, passed, detail)


def criterion_pencil_identity() -> CriterionResult:
    """Two routes to T(lam) f agree to 1e-6, improving under 2x refinement."""
    t0 = time.time()
    a = profiles.monomial_damping(2.0)
    qx = profiles.monomial_potential(1.0)
    ok = True
    lines = []
    for n in (0, 1, 2):
        errs = {}
        for mult in (4.0, 8.0):
            cfg = pseudomode.PseudomodeConfig(
                n=n, epsilon=0.1,
                beta_curve=pseudomode.BetaCurve("constant", c=5.0),
                grid_multiplier=mult)
            asm = pseudomode.assemble_at_b(a, qx, cfg, 10.0, beta=5.0)
            errs[mult] = residual.two_route_discrepancy(a, qx, asm)
        ok = ok and errs[8.0] < 1e-6 and errs[8.0] < errs[4.0]
        lines.append(f"n={n}: {errs[4.0]:.2e} -> {errs[8.0]:.2e}")
    detail = "; ".join(lines) + " (refined must be < 1e-6 and improve)"
    return _result(5, "pencil identity, two routes (b=10, beta=5)", t0, ok,
                   detail)


def criterion_zeta_anchor() -> CriterionResult:
    """zeta(b) = alpha^2 + beta^2 - q(b); sign of Im zeta flips at b."""
    t0 = time.time()
    rng = np.random.default_rng(20260808)
    cases = [
        (profiles.monomial_damping(2.0), profiles.monomial_potential(1.0)),
        (profiles.exponential_damping(1.0), profiles.zero_potential()),
        (profiles.logarithmic_damping(), profiles.logarithmic_potential()),
    ]
    worst = 0.0
    signs_ok = True
    for a, q in cases:
        lo = float(np.log(1.5 * a.value(a.x_min) + 1.0))
        for _ in range(100):
            alpha = float(np.exp(rng.uniform(lo, np.log(200.0))))
            beta = float(np.exp(rng.uniform(np.log(0.1), np.log(50.0))))
            b = pseudomode.solve_b(a, alpha)
            sp = wkb.SpectralPoint(alpha=alpha, beta=beta, b=b)
            zb = complex(wkb.zeta(a, q, sp, b))
            scale = alpha**2 + beta**2
            target = scale - float(q.value(b))
            worst = max(worst, abs(zb.imag) / scale,
                        abs(zb.real - target) / scale)
            quarter = 0.25 * pseudomode.window_half_width(a, b, 0.1)
            signs_ok = signs_ok \
                and complex(wkb.zeta(a, q, sp, b + quarter)).imag < 0 \
                and complex(wkb.zeta(a, q, sp, b - quarter)).imag > 0
    passed = worst <= 1e-10 and signs_ok
    detail = (f"300 random points, worst anchor error {worst:.2e} "
              f"(need <= 1e-10), sign flips hold: {signs_ok}")
    return _result(6, "zeta anchor identity and sign structure", t0, passed,
                   detail)


def criterion_gaussian_localization() -> CriterionResult:
    """-log|g| against beta/(alpha+beta) a'(b) s^2 fits a line, R^2 >= 0.99.

    Checked on every sweep point of the polynomial rate criterion, over the
    full two-sided half-window |s| <= delta/2 as specified.
    """
    t0 = time.time()
    a, q, cfg, reports, assemblies = _rate_sweep()
    ok = True
    lines = []
    for asm in assemblies:
        c1, c2, slope, r2 = residual.fit_gaussian_constants(asm, a)
        ok = ok and r2 >= 0.99 and slope > 0.0
        lines.append(f"b={asm.sp.b:g}: R^2={r2:.3f} slope={slope:.2f}")
    detail = "; ".join(lines) + " (need R^2 >= 0.99, slope > 0)"
    return _result(7, "Gaussian localization fit on the rate sweep", t0, ok,
                   detail)


def criterion_conjugation_symmetry() -> CriterionResult:
    """Residual ratio and sigma_min invariant under lam -> conj(lam)."""
    t0 = time.time()
    a = profiles.monomial_damping(2.0)
    q = profiles.zero_potential()
    cfg = pseudomode.PseudomodeConfig(
        n=1, epsilon=0.1, beta_curve=pseudomode.BetaCurve("constant", c=3.0))
    asm = pseudomode.assemble_at_b(a, q, cfg, 6.0, beta=3.0)
    lam = asm.lam
    r_up = residual.residual_ratio(a, q, lam, asm.f).ratio
    f_conj = asm.f.with_values(np.conj(asm.f.values))
    r_dn = residual.residual_ratio(a, q, lam.conjugate(), f_conj).ratio
    resid_rel = abs(r_up - r_dn) / r_up

    disc = discretize.build_operator(a, q, L=12.0, N=240)
    s_up = discretize.sigma_min_weighted(disc, complex(-3.0, 1.7))
    s_dn = discretize.sigma_min_weighted(disc, complex(-3.0, -1.7))
    sigma_rel = abs(s_up - s_dn) / s_up
    passed = resid_rel <= 1e-10 and sigma_rel <= 1e-10
    detail = (f"residual rel diff {resid_rel:.2e}, sigma_min rel diff "
              f"{sigma_rel:.2e} (need <= 1e-10)")
    return _result(8, "conjugation symmetry", t0, passed, detail)


def criterion_pseudospectral_asymmetry() -> CriterionResult:
    """sigma_min(-6+i) <= 1e-2 sigma_min(6+i); decreasing along the curve
    beta = alpha^(-0.3) through alpha = 2, 4, 6. Runtime < 5 min."""
    t0 = time.time()
    disc = _x2_discretization_600()
    s_left = discretize.sigma_min_weighted(disc, complex(-6.0, 1.0))
    s_right = discretize.sigma_min_weighted(disc, complex(6.0, 1.0))
    asym_ok = s_left <= 1e-2 * s_right
    curve = [discretize.sigma_min_weighted(disc, complex(-al, al ** (-0.3)))
             for al in (2.0, 4.0, 6.0)]
    curve_ok = curve[0] > curve[1] > curve[2]
    elapsed = time.time() - t0
    passed = asym_ok and curve_ok and elapsed < 300
    detail = (f"sigma(-6+i) {s_left:.3e} vs 1e-2 * sigma(6+i) "
              f"{1e-2 * s_right:.3e} -> {asym_ok}; curve "
              f"{['%.3e' % s for s in curve]} decreasing {curve_ok}, "
              f"{elapsed:.0f}s")
    return _result(9, "pseudospectral left/right asymmetry + curve", t0,
                   passed, detail)


def criterion_hypothesis_checker() -> CriterionResult:
    """q = x^5 over a = x^2: beta = 1 flags the q-condition, beta = b^3 clears."""
    t0 = time.time()
    a = profiles.monomial_damping(2.0)
    q5 = profiles.monomial_potential(5.0)
    b_list = [8.0, 16.0, 32.0]
    cfg_flat = pseudomode.PseudomodeConfig(
        n=0, epsilon=0.1, beta_curve=pseudomode.BetaCurve("constant", c=1.0))
    _, flags_flat = residual.check_hypotheses(a, q5, cfg_flat, b_list)
    cfg_steep = pseudomode.PseudomodeConfig(
        n=0, epsilon=0.1, beta_curve=pseudomode.BetaCurve("power", s=3.0))
    _, flags_steep = residual.check_hypotheses(a, q5, cfg_steep, b_list)
    passed = flags_flat.q0_failed and not flags_steep.q0_failed
    detail = (f"beta=1: q0 flag {flags_flat.q0_failed} (need True); "
              f"beta=b^3: q0 flag {flags_steep.q0_failed} (need False)")
    return _result(10, "hypothesis checker on a dominating potential", t0,
                   passed, detail)


ALL_CRITERIA: Sequence[Callable[[], CriterionResult]] = (
    criterion_explicit_spectrum,
    criterion_polynomial_rate,
    criterion_basic_ansatz_decay,
    criterion_expansion_gain,
    criterion_pencil_identity,
    criterion_zeta_anchor,
    criterion_gaussian_localization,
    criterion_conjugation_symmetry,
    criterion_pseudospectral_asymmetry,
    criterion_hypothesis_checker,
)


def run_all(printer: Optional[Callable[[str], None]] = print
            ) -> list[CriterionResult]:
    """Run every criterion, printing one pass/fail line each."""
    results = []
    for fn in ALL_CRITERIA:
        res = fn()
        results.append(res)
        if printer is not None:
            status = "PASS" if res.passed else "FAIL"
            printer(f"[{status}] criterion {res.index}: {res.name} "
                    f"({res.seconds:.1f}s)\n       {res.detail}")
    return results
