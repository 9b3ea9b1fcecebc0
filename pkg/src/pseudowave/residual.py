"""Pseudomode quality measurement and rate prediction.

The block residual of Psi = (f, lam*f) collapses to the pencil residual:
||(G - lam) Psi||_H / ||Psi||_H = ||T(lam) f|| / (||f'||^2 + ||q^(1/2) f||^2
+ |lam|^2 ||f||^2)^(1/2). The numerator is evaluated from the assembled
components -xi''g - 2 xi' g' + xi r_n g, which stays meaningful down to
ratios of 1e-15 and beyond; direct grid differentiation of f (apply_pencil)
is kept as the independent oracle for the two-route identity checks.

Rate predictions: kappa1(b, c) collects the cutoff-induced terms,
kappa2(b) the phase-recursion remainder; measured ratios are regressed
against b along sweeps and compared with both.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .gridfn import GridFunction, _diff_arrays, l2_norm
from .profiles import DampingProfile, Family, PotentialProfile, window_sup
from .pseudomode import (PseudomodeAssembly, PseudomodeConfig, assemble_at_b,
                         window_half_width)

#: an O(1) hypothesis ratio is flagged once it grows by more than this factor
O1_GROWTH_LIMIT = 2.0
#: edge band (in nodes) that must be empty for a compactly supported f
SUPPORT_EDGE_NODES = 4
SUPPORT_EDGE_REL = 1e-9


def _d2_oracle(v: np.ndarray, h: float) -> np.ndarray:
    """Second derivative for the oracle route: 6th-order central stencil in
    the interior (extended-precision accumulation), 4th-order at the edges.

    One order above the production stencils so that two-route comparisons
    measure formula errors, not the oracle's own truncation.
    """
    out = np.asarray(_diff_arrays(v, h, 2), dtype=np.clongdouble)
    w = np.asarray(v, dtype=np.clongdouble)
    h2 = np.clongdouble(h) * np.clongdouble(h)
    out[3:-3] = (
        (w[:-6] + w[6:]) / 90.0
        - 0.15 * (w[1:-5] + w[5:-1])
        + 1.5 * (w[2:-4] + w[4:-2])
        - (49.0 / 18.0) * w[3:-3]
    ) / h2
    return np.asarray(out, dtype=np.complex128)


def apply_pencil(a: DampingProfile, q: PotentialProfile, lam: complex,
                 f: GridFunction) -> GridFunction:
    """T(lam) f = -f'' + (q + 2*lam*a + lam^2) f via grid differentiation.

    This is the oracle route; profiles are evaluated with even reflection
    so whole-line grids work. Raises if the support of f touches the grid
    boundary.
    """
    vals = f.values
    peak = np.max(np.abs(vals))
    if peak == 0.0:
        raise ValueError("empty pseudomode: f is identically zero")
    edge = max(np.max(np.abs(vals[:SUPPORT_EDGE_NODES])),
               np.max(np.abs(vals[-SUPPORT_EDGE_NODES:])))
    if edge > SUPPORT_EDGE_REL * peak:
        raise ValueError("support of f touches the grid boundary")
    xs = np.abs(f.xs())
    poly = np.asarray(q.value(xs)) + 2.0 * lam * np.asarray(a.value(xs)) + lam * lam
    return f.with_values(-_d2_oracle(vals, f.h) + poly * vals)


@dataclass(frozen=True)
class HypothesisRatios:
    """Numeric values of the smallness conditions at one sweep point.

    q0      : q_b^(0) / (alpha^2 + beta^2)                  -- must be o(1)
    qj      : max_j q_b^(j) / (alpha (alpha+beta) b^(j nu))  -- must be O(1)
    cutoff2 : b^nu / (alpha + beta)                          -- must be O(1)
    kappa1  : cutoff rate factor at the default constant     -- must be o(1)
    """

    q0: float
    qj: float
    cutoff2: float
    kappa1: float


@dataclass(frozen=True)
class HypothesisFlags:
    """True means the corresponding condition FAILED along the sweep."""

    q0_failed: bool
    qj_failed: bool
    cutoff2_failed: bool
    kappa1_failed: bool

    @property
    def any_failed(self) -> bool:
        return (self.q0_failed or self.qj_failed or self.cutoff2_failed
                or self.kappa1_failed)


@dataclass
class ResidualReport:
    """Everything measured for one spectral point."""

    b: float
    alpha: float
    beta: float
    delta: float
    n: int
    numerator: float
    norm_fprime_sq: float
    norm_qhalf_f_sq: float
    norm_lam_f_sq: float
    ratio: float
    comp_xi2_g: float
    comp_xi1_gprime: float
    comp_xi_rn_g: float
    kappa1: float
    kappa1_c: float
    kappa2: float
    c1_fit: float
    c2_fit: float
    gauss_slope: float
    gauss_r2: float
    resolvent_lower_bound: float
    hypothesis: Optional[HypothesisRatios] = None
    flags: Optional[HypothesisFlags] = None


def predict_kappas(a: DampingProfile, q: PotentialProfile, lam: complex,
                   b: float, delta: float, n: int,
                   c: float) -> tuple[float, float]:
    """Rate factors (kappa1, kappa2) for the theorem bound ratio <~ k1 + k2.

    kappa1(b, c) = (1/delta + 1/((alpha+beta) delta^2))
                   * exp(-c * beta/(alpha+beta) * a'(b) * delta^2)
    kappa2(b)    = alpha b^(nu (n+1)) / (alpha+beta)^n
                   + sum_{k=1}^{n-1} b^(nu (n+k+1)) alpha^2 / (alpha+beta)^(n+1+k)
    (empty sum for n <= 1; n = 0 reduces to the basic-remainder scale
    alpha b^nu).
    """
    if c <= 0.0:
        raise ValueError("kappa1 constant c must be positive")
    alpha, beta = -lam.real, abs(lam.imag)
    nu = a.nu
    ab = alpha + beta
    expo = -c * (beta / ab) * float(a.deriv(1, b)) * delta**2
    kappa1 = (1.0 / delta + 1.0 / (ab * delta**2)) * math.exp(expo)
    kappa2 = alpha * b ** (nu * (n + 1)) / ab**n
    for k in range(1, n):
        kappa2 += b ** (nu * (n + k + 1)) * alpha**2 / ab ** (n + 1 + k)
    return kappa1, kappa2


def fit_gaussian_constants(asm: PseudomodeAssembly,
                           a: DampingProfile) -> tuple[float, float, float, float]:
    """Fit the localization of g around b on |s| <= delta/2.

    Returns (c1, c2, slope, r2):
      * c1/c2 bound the pure phase part Re(i lam psi_{-1}) by
        c2 * z <= . <= c1 * z with z = beta/(alpha+beta) a'(b) s^2, measured
        as extreme pointwise quotients on delta/8 <= |s| <= delta/2 (the
        constants of the two-sided Gaussian sandwich, fitted per profile);
      * slope/r2 are the least-squares line of -log|g| against z over the
        whole half-window, the empirical Gaussian-shape diagnostic.
    """
    return _gaussian_fit(asm, a)


def _gaussian_fit(asm: PseudomodeAssembly, a: DampingProfile):
    sp = asm.sp
    s = asm.f.xs() - sp.b
    half = 0.5 * asm.delta
    weight = (sp.beta / (sp.alpha + sp.beta)) * float(a.deriv(1, sp.b))
    z = weight * s**2
    y_full = -asm.exponent.values.real          # -log|g|, exact from the exponent
    lam = sp.lam
    y_phase = (1j * lam * asm.phases.psi[-1].values).real

    sel = (np.abs(s) <= half) & (s != 0.0)
    zz, yy = z[sel], y_full[sel]
    slope, intercept = np.polyfit(zz, yy, 1)
    resid = yy - (slope * zz + intercept)
    ss_tot = float(np.sum((yy - yy.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0

    ann = (np.abs(s) >= asm.delta / 8.0) & (np.abs(s) <= half)
    quot = y_phase[ann] / z[ann]
    c1, c2 = float(np.max(quot)), float(np.min(quot))
    return c1, c2, float(slope), float(r2)


def hypothesis_ratios(a: DampingProfile, q: PotentialProfile, lam: complex,
                      b: float, delta: float, n: int,
                      c: Optional[float] = None) -> HypothesisRatios:
    """Evaluate the theorem's smallness conditions numerically at one point."""
    alpha, beta = -lam.real, abs(lam.imag)
    ab2 = alpha**2 + beta**2
    q0 = window_sup(q, 0, b, delta) / ab2 if q.family is not Family.ZERO else 0.0
    qj = 0.0
    if q.family is not Family.ZERO:
        for j in range(1, max(n, 1) + 1):
            scalefac = alpha * (alpha + beta) * b ** (j * a.nu)
            qj = max(qj, window_sup(q, j, b, delta) / scalefac)
    cutoff2 = b**a.nu / (alpha + beta)
    k1, _ = predict_kappas(a, q, lam, b, delta, n, c if c else 0.25)
    return HypothesisRatios(q0=q0, qj=qj, cutoff2=cutoff2, kappa1=k1)


def flag_hypotheses(seq: Sequence[HypothesisRatios]) -> HypothesisFlags:
    """Flags from consecutive sweep points.

    o(1) conditions (q0, kappa1) fail when the ratio does not shrink from
    the first to the last point; O(1) conditions (qj, cutoff2) fail when
    they grow by more than O1_GROWTH_LIMIT.
    """
    if len(seq) < 2:
        return HypothesisFlags(False, False, False, False)

    def shrinks(vals):
        return vals[-1] < vals[0] or vals[0] == 0.0

    def bounded(vals):
        base = max(vals[0], 1e-300)
        return vals[-1] <= O1_GROWTH_LIMIT * base or vals[-1] == 0.0

    q0s = [r.q0 for r in seq]
    qjs = [r.qj for r in seq]
    cut = [r.cutoff2 for r in seq]
    k1s = [r.kappa1 for r in seq]
    return HypothesisFlags(
        q0_failed=not shrinks(q0s),
        qj_failed=not bounded(qjs),
        cutoff2_failed=not bounded(cut),
        kappa1_failed=not shrinks(k1s),
    )


def check_hypotheses(a: DampingProfile, q: PotentialProfile,
                     cfg: PseudomodeConfig, b_list: Sequence[float],
                     beta_list: Optional[Sequence[float]] = None
                     ) -> tuple[list[HypothesisRatios], HypothesisFlags]:
    """Hypothesis ratios along a b-sweep plus the resulting flags.

    Diagnostics only: a failed flag warns that the decay guarantee does not
    apply on this curve, it does not abort any computation.
    """
    ratios = []
    for i, b in enumerate(b_list):
        beta = beta_list[i] if beta_list is not None else cfg.beta_curve(b)
        lam = complex(-float(a.value(b)), beta)
        delta = window_half_width(a, b, cfg.epsilon)
        ratios.append(hypothesis_ratios(a, q, lam, b, delta, cfg.n))
    return ratios, flag_hypotheses(ratios)


def pencil_components(asm: PseudomodeAssembly) -> GridFunction:
    """T(lam) f assembled from the parts: -xi'' g - 2 xi' g' + xi r_n g."""
    xi = asm.cutoff.xi.values
    xi1 = asm.cutoff.xi_prime.values
    xi2 = asm.cutoff.xi_dprime.values
    g = asm.g.values
    gp = asm.exponent_prime.values * g
    return asm.f.with_values(-xi2 * g - 2.0 * xi1 * gp + xi * asm.rn.values * g)


def two_route_discrepancy(a: DampingProfile, q: PotentialProfile,
                          asm: PseudomodeAssembly) -> float:
    """|| apply_pencil(f) - component route || / ||f||.

    The two computations of T(lam) f share no differentiation path, so this
    is the end-to-end oracle for the phase recursion and remainder assembly;
    it converges under grid refinement when only discretization error is
    left.
    """
    direct = apply_pencil(a, q, asm.lam, asm.f)
    parts = pencil_components(asm)
    diff = direct.with_values(direct.values - parts.values)
    return l2_norm(diff) / l2_norm(asm.f)


def residual_ratio(a: DampingProfile, q: PotentialProfile, lam: complex,
                   f: GridFunction,
                   assembly: Optional[PseudomodeAssembly] = None
                   ) -> ResidualReport:
    """Residual ratio ||T(lam) f|| / ||Psi||_H with all components logged.

    With an assembly the numerator uses the analytic component route
    -xi'' g - 2 xi' g' + xi r_n g (no large-cancellation noise floor);
    for a bare f the pencil is applied by grid differentiation.
    """
    if assembly is not None:
        xi = assembly.cutoff.xi.values
        g = assembly.g.values
        gp = assembly.exponent_prime.values * g
        t_xi2 = f.with_values(assembly.cutoff.xi_dprime.values * g)
        t_xi1 = f.with_values(assembly.cutoff.xi_prime.values * gp)
        t_rn = f.with_values(xi * assembly.rn.values * g)
        tf = pencil_components(assembly)
        comp = (l2_norm(t_xi2), l2_norm(t_xi1), l2_norm(t_rn))
        fprime = assembly.f_prime()
    else:
        tf = apply_pencil(a, q, lam, f)
        comp = (math.nan, math.nan, math.nan)
        fprime = f.with_values(_diff_arrays(f.values, f.h, 1))

    qvals = np.asarray(q.value(np.abs(f.xs())))
    qhalf_f = f.with_values(np.sqrt(np.maximum(qvals, 0.0)) * f.values)
    num = l2_norm(tf)
    nf2 = l2_norm(f) ** 2
    den_sq = l2_norm(fprime) ** 2 + l2_norm(qhalf_f) ** 2 + abs(lam) ** 2 * nf2
    if den_sq == 0.0:
        raise ValueError("empty pseudomode: zero denominator")
    ratio = num / math.sqrt(den_sq)

    alpha, beta = -lam.real, lam.imag
    if assembly is not None:
        b, delta, n = assembly.sp.b, assembly.delta, assembly.config.n
        c1, c2, slope, r2 = _gaussian_fit(assembly, a)
        c_used = max(c2 / 8.0, 1e-12)
        k1, k2 = predict_kappas(a, q, complex(-alpha, abs(beta)), b, delta, n,
                                c_used)
        hyp = hypothesis_ratios(a, q, complex(-alpha, abs(beta)), b, delta, n,
                                c_used)
    else:
        b = delta = math.nan
        n = -1
        c1 = c2 = slope = r2 = math.nan
        k1 = k2 = c_used = math.nan
        hyp = None
    return ResidualReport(
        b=b, alpha=alpha, beta=beta, delta=delta, n=n, numerator=num,
        norm_fprime_sq=l2_norm(fprime) ** 2, norm_qhalf_f_sq=l2_norm(qhalf_f) ** 2,
        norm_lam_f_sq=abs(lam) ** 2 * nf2, ratio=ratio,
        comp_xi2_g=comp[0], comp_xi1_gprime=comp[1], comp_xi_rn_g=comp[2],
        kappa1=k1, kappa1_c=c_used, kappa2=k2, c1_fit=c1, c2_fit=c2,
        gauss_slope=slope, gauss_r2=r2,
        resolvent_lower_bound=1.0 / ratio if ratio > 0 else math.inf,
        hypothesis=hyp)


def report_for(a: DampingProfile, q: PotentialProfile,
               asm: PseudomodeAssembly) -> ResidualReport:
    """Residual report for an assembled pseudomode."""
    return residual_ratio(a, q, asm.lam, asm.f, assembly=asm)


def sweep(a: DampingProfile, q: PotentialProfile, cfg: PseudomodeConfig,
          b_list: Sequence[float], beta_list: Optional[Sequence[float]] = None,
          max_workers: Optional[int] = None) -> list[ResidualReport]:
    """Residual reports along increasing b, evaluated concurrently.

    Inputs are immutable and shared; results are collected by index so the
    output order (and any CSV written from it) is deterministic.
    """
    b_list = list(b_list)
    if len(b_list) == 0:
        raise ValueError("empty b list")
    if any(b2 <= b1 for b1, b2 in zip(b_list, b_list[1:])):
        raise ValueError("b list must be strictly increasing")

    def one(i: int) -> ResidualReport:
        beta = beta_list[i] if beta_list is not None else None
        asm = assemble_at_b(a, q, cfg, b_list[i], beta=beta)
        return report_for(a, q, asm)

    if max_workers is not None and max_workers > 1 and len(b_list) > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            reports = list(pool.map(one, range(len(b_list))))
    else:
        reports = [one(i) for i in range(len(b_list))]

    flags = flag_hypotheses([r.hypothesis for r in reports]) \
        if len(reports) >= 2 else HypothesisFlags(False, False, False, False)
    for r in reports:
        r.flags = flags
    return reports


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    r2: float
    points_used: int
    abscissa: str


def fit_rate(reports: Sequence[ResidualReport], a: DampingProfile) -> RateFit:
    """Least-squares decay rate of log(ratio).

    Abscissa log b for polynomial/logarithmic dampings, b^p for exponential
    ones. When the fit over all points has R^2 < 0.98 the smallest b is
    dropped once (pre-asymptotic contamination) and the fit repeated.
    """
    if len(reports) < 3:
        raise ValueError("rate fit needs at least 3 sweep points")
    ratios = np.array([r.ratio for r in reports])
    if not np.all(np.isfinite(ratios)) or np.any(ratios <= 0.0):
        raise ValueError("non-finite ratios in sweep table")
    bs = np.array([r.b for r in reports])
    if a.family is Family.EXPONENTIAL:
        xs, label = bs**a.p, "b_pow_p"
    else:
        xs, label = np.log(bs), "log_b"
    ys = np.log(ratios)

    def do_fit(x, y):
        slope, intercept = np.polyfit(x, y, 1)
        resid = y - (slope * x + intercept)
        ss_tot = float(np.sum((y - y.mean()) ** 2))
        r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
        return float(slope), float(intercept), r2

    slope, intercept, r2 = do_fit(xs, ys)
    used = len(reports)
    if r2 < 0.98 and len(reports) > 3:
        slope, intercept, r2 = do_fit(xs[1:], ys[1:])
        used -= 1
    return RateFit(slope, intercept, r2, used, label)
