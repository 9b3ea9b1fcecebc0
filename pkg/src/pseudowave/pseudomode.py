"""Pseudomode assembly: turning point, cutoff, window and the function f = xi * g.

The quasimode for the generator is Psi = (f, lam*f); only f and lam are
materialized because the residual of the full block system reduces to the
pencil residual of f. Assembly solves a(b) = alpha, sets the window
half-width delta = b^(-nu - eps), builds the phase family on a grid dense
enough for the oscillation exp(-i*lam*psi_{-1}), and multiplies by a
smooth compactly supported cutoff.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .gridfn import GridFunction, GridSpec, _cumulative_arrays
from .profiles import DampingProfile, Family, PotentialProfile
from .wkb import SpectralPoint, WkbPhases, build_phases, remainder_rn

#: grid rule: resolve the local wavenumber ~ alpha + beta with this many
#: nodes per wavelength, and the cutoff transition layer with >= 100 nodes
POINTS_PER_WAVELENGTH = 20
LAYER_NODES = 200
MAX_GRID_NODES = 40_000_000


def solve_b(a: DampingProfile, alpha: float) -> float:
    """Solve a(b) = alpha to relative 1e-12.

    Uses the analytic inverse of the family when there is one, otherwise
    bisection on a bracket grown geometrically from x_min.
    """
    if alpha <= a.value(a.x_min):
        raise ValueError(
            f"alpha = {alpha} is below a(x_min) = {a.value(a.x_min)}; "
            "no turning point beyond the monotone threshold"
        )
    if a.family is Family.MONOMIAL:
        b = (alpha / a.scale) ** (1.0 / a.p)
    elif a.family is Family.EXPONENTIAL:
        b = math.log(alpha / a.scale) ** (1.0 / a.p)
    elif a.family is Family.LOGARITHMIC:
        b = math.exp(alpha / a.scale)
    elif a.inverse is not None:
        b = float(a.inverse(alpha))
    else:
        lo, hi = a.x_min, 2.0 * a.x_min
        for _ in range(200):
            if a.value(hi) >= alpha:
                break
            lo, hi = hi, 2.0 * hi
        else:
            raise ValueError("could not bracket a(b) = alpha; profile not unbounded?")
        b = brentq(lambda x: a.value(x) - alpha, lo, hi, rtol=8.9e-16)
    resid = abs(a.value(b) - alpha)
    if resid > 1e-12 * max(1.0, alpha):
        raise ValueError(
            f"turning point solve failed: |a(b) - alpha| = {resid:g} "
            "(non-monotone custom profile?)"
        )
    return float(b)


@dataclass(frozen=True)
class BetaCurve:
    """Spectral curve beta(b): constant c, power b^s, or b^s * exp(b^p)."""

    kind: str = "constant"  # constant | power | exp_matched
    c: float = 1.0
    s: float = 0.0
    p: float = 1.0

    def __call__(self, b: float) -> float:
        if self.kind == "constant":
            return self.c
        if self.kind == "power":
            return b**self.s
        if self.kind == "exp_matched":
            return b**self.s * math.exp(b**self.p)
        raise ValueError(f"unknown beta curve kind {self.kind!r}")


def default_beta_curve(a: DampingProfile, q: PotentialProfile,
                       n: int) -> BetaCurve:
    """Curve presets per damping/potential family.

    Monomial damping x^p with potential growth r: free choice (beta = 1)
    when r < 2p, beta = b^(r-p+0.1) when the potential dominates;
    exponential damping with p >= 1 needs beta matched to exp(b^p);
    logarithmic damping is unconstrained.
    """
    if a.family is Family.MONOMIAL:
        r = q.r if isinstance(q, PotentialProfile) else 0.0
        if r >= 2.0 * a.p:
            return BetaCurve(kind="power", s=r - a.p + 0.1)
        return BetaCurve(kind="power", s=0.0)
    if a.family is Family.EXPONENTIAL:
        if a.p >= 1.0:
            return BetaCurve(kind="exp_matched", s=a.p - 1.0 + 0.1, p=a.p)
        return BetaCurve(kind="constant", c=1.0)
    return BetaCurve(kind="constant", c=1.0)


@dataclass(frozen=True)
class PseudomodeConfig:
    """Assembly parameters: expansion order, window exponent, curve, grid density."""

    n: int = 0
    epsilon: float = 0.1
    beta_curve: BetaCurve = field(default_factory=BetaCurve)
    grid_multiplier: float = 1.0

    def __post_init__(self):
        if self.epsilon <= 0.0:
            raise ValueError("epsilon must be positive")
        if self.n < 0:
            raise ValueError("expansion order must be >= 0")
        if self.grid_multiplier < 1.0:
            raise ValueError("grid multiplier must be >= 1")


def window_half_width(a: DampingProfile, b: float, epsilon: float) -> float:
    """delta = b^(-nu - epsilon)."""
    return b ** (-a.nu - epsilon)


# -- smooth cutoff ------------------------------------------------------------

def _phi(u: np.ndarray) -> np.ndarray:
    out = np.zeros_like(u)
    pos = u > 0.0
    out[pos] = np.exp(-1.0 / u[pos])
    return out


def _phi1(u: np.ndarray) -> np.ndarray:
    out = np.zeros_like(u)
    pos = u > 0.0
    up = u[pos]
    out[pos] = np.exp(-1.0 / up) / up**2
    return out


def _phi2(u: np.ndarray) -> np.ndarray:
    out = np.zeros_like(u)
    pos = u > 0.0
    up = u[pos]
    out[pos] = np.exp(-1.0 / up) * (1.0 - 2.0 * up) / up**4
    return out


def _smoothstep(u: np.ndarray):
    """S = phi(u) / (phi(u) + phi(1-u)) with S', S''; 0 below 0, 1 above 1."""
    u = np.asarray(u, dtype=float)
    s = np.zeros_like(u)
    s1 = np.zeros_like(u)
    s2 = np.zeros_like(u)
    s[u >= 1.0] = 1.0
    mid = (u > 0.0) & (u < 1.0)
    um = u[mid]
    a_val, b_val = _phi(um), _phi(1.0 - um)
    a1, b1 = _phi1(um), -_phi1(1.0 - um)
    a2, b2 = _phi2(um), _phi2(1.0 - um)
    d = a_val + b_val
    num1 = a1 * b_val - a_val * b1
    s[mid] = a_val / d
    s1[mid] = num1 / d**2
    s2[mid] = ((a2 * b_val - a_val * b2) * d - 2.0 * num1 * (a1 + b1)) / d**3
    return s, s1, s2


@dataclass(frozen=True)
class CutoffSpec:
    """Smooth cutoff xi: 1 on |s| < delta/2, 0 on |s| > delta, with xi', xi''."""

    b: float
    delta: float
    xi: GridFunction
    xi_prime: GridFunction
    xi_dprime: GridFunction

    @property
    def plateau_half_width(self) -> float:
        return 0.5 * self.delta


def build_cutoff(b: float, delta: float, grid: GridSpec) -> CutoffSpec:
    """Sample the canonical exponential-bump cutoff and its two derivatives.

    The transition bands [delta/2, delta] on each side are rescalings of one
    fixed smoothstep, so sup|xi^(j)| * delta^j is independent of delta.
    """
    if delta <= 0:
        raise ValueError("cutoff half-width must be positive")
    if 0.5 * delta / grid.h < 100.0 * (1.0 - 1e-9):
        raise ValueError(
            f"under-resolved cutoff layer: {0.5 * delta / grid.h:.0f} nodes "
            "in the transition band, need >= 100"
        )
    s = grid.xs() - b
    half = 0.5 * delta
    xi = np.zeros(grid.n)
    xi1 = np.zeros(grid.n)
    xi2 = np.zeros(grid.n)
    xi[np.abs(s) <= half] = 1.0

    right = (s > half) & (s < delta)
    u = (delta - s[right]) / half
    sv, s1v, s2v = _smoothstep(u)
    xi[right] = sv
    xi1[right] = -s1v / half
    xi2[right] = s2v / half**2

    left = (s < -half) & (s > -delta)
    u = (delta + s[left]) / half
    sv, s1v, s2v = _smoothstep(u)
    xi[left] = sv
    xi1[left] = s1v / half
    xi2[left] = s2v / half**2

    mk = lambda arr: GridFunction(grid.x0, grid.h, arr)  # noqa: E731
    return CutoffSpec(b=b, delta=delta, xi=mk(xi), xi_prime=mk(xi1),
                      xi_dprime=mk(xi2))


# -- assembly -----------------------------------------------------------------

def default_grid(sp: SpectralPoint, delta: float,
                 multiplier: float = 1.0) -> GridSpec:
    """Grid rule: h <= min(2*pi/(alpha+beta)/20, delta/200), densified by
    the multiplier; padded so the support sits strictly inside the grid."""
    k = sp.alpha + abs(sp.beta)
    h = min(2.0 * math.pi / k / POINTS_PER_WAVELENGTH, delta / LAYER_NODES)
    h /= multiplier
    half_span = delta * 1.02 + 8.0 * h
    if 2.0 * half_span / h > MAX_GRID_NODES:
        raise ValueError("grid rule would exceed the node budget; lower the "
                         "multiplier or the spectral parameter")
    return GridSpec.centered(sp.b, half_span, h)


@dataclass(frozen=True)
class PseudomodeAssembly:
    """Everything produced for one spectral point: phases, cutoff, f = xi*g.

    The pair Psi = (f, lam*f) is represented implicitly; downstream residual
    code consumes f and lam.
    """

    sp: SpectralPoint
    config: PseudomodeConfig
    delta: float
    phases: WkbPhases
    cutoff: CutoffSpec
    exponent: GridFunction
    exponent_prime: GridFunction
    g: GridFunction
    f: GridFunction
    rn: GridFunction
    conjugated: bool = False

    @property
    def lam(self) -> complex:
        lam = self.sp.lam
        return lam.conjugate() if self.conjugated else lam

    def f_prime(self) -> GridFunction:
        """f' = (xi' + xi * w') g, assembled analytically."""
        vals = (self.cutoff.xi_prime.values
                + self.cutoff.xi.values * self.exponent_prime.values) * self.g.values
        return self.f.with_values(vals)


def _conjugate_assembly(asm: PseudomodeAssembly) -> PseudomodeAssembly:
    conj = lambda gf: gf.with_values(np.conj(gf.values))  # noqa: E731
    return PseudomodeAssembly(
        sp=asm.sp, config=asm.config, delta=asm.delta, phases=asm.phases,
        cutoff=asm.cutoff, exponent=conj(asm.exponent),
        exponent_prime=conj(asm.exponent_prime), g=conj(asm.g), f=conj(asm.f),
        rn=conj(asm.rn), conjugated=True)


def assemble_at_b(a: DampingProfile, q: PotentialProfile, cfg: PseudomodeConfig,
                  b: float, beta: Optional[float] = None) -> PseudomodeAssembly:
    """Assemble the pseudomode at turning point b (alpha = a(b)).

    beta defaults to the configured curve. Negative beta is served by
    building the mirror point and conjugating the result.
    """
    beta_val = cfg.beta_curve(b) if beta is None else float(beta)
    if beta_val == 0.0:
        raise ValueError("beta = 0 is rejected; choose a curve with beta > 0")
    if beta_val < 0.0:
        return _conjugate_assembly(assemble_at_b(a, q, cfg, b, -beta_val))

    sp = SpectralPoint.from_b(a, b, beta_val)
    delta = window_half_width(a, b, cfg.epsilon)
    grid = default_grid(sp, delta, cfg.grid_multiplier)
    floor = 0.0 if a.family is Family.MONOMIAL and a.p == round(a.p) else 1e-12
    if grid.x0 <= floor:
        raise ValueError(
            f"window [{grid.x0:.3g}, {grid.x1:.3g}] leaves the profile domain; "
            "b too small for this epsilon"
        )
    phases = build_phases(a, q, sp, cfg.n, grid)
    cut = build_cutoff(b, delta, grid)
    # The exponent reaches hundreds of radians; accumulating it in extended
    # precision keeps the phase jitter of the f samples at the value-rounding
    # level instead of eps * |w|, which matters once f is differentiated.
    lam_ld = np.clongdouble(sp.lam)
    w_ld = -1j * lam_ld * _cumulative_arrays(
        np.asarray(phases.psi_prime[-1].values, dtype=np.clongdouble),
        grid.h, grid.center_index)
    for k in range(cfg.n):
        w_ld = w_ld - lam_ld ** (-k) * _cumulative_arrays(
            np.asarray(phases.psi_prime[k].values, dtype=np.clongdouble),
            grid.h, grid.center_index)
    g_ld = np.exp(w_ld)
    w = GridFunction(grid.x0, grid.h, np.asarray(w_ld, dtype=np.complex128))
    wp = phases.exponent_prime()
    g = w.with_values(np.asarray(g_ld, dtype=np.complex128))
    f = g.with_values(np.asarray(cut.xi.values.real * g_ld,
                                 dtype=np.complex128))
    rn = remainder_rn(phases)
    return PseudomodeAssembly(sp=sp, config=cfg, delta=delta, phases=phases,
                              cutoff=cut, exponent=w, exponent_prime=wp,
                              g=g, f=f, rn=rn)


def assemble(a: DampingProfile, q: PotentialProfile, cfg: PseudomodeConfig,
             alpha: float) -> PseudomodeAssembly:
    """Assemble the pseudomode for a target alpha = |Re lam|."""
    return assemble_at_b(a, q, cfg, solve_b(a, alpha))


def dump_csv(asm: PseudomodeAssembly, path) -> None:
    """Pseudomode dump: columns x, Re f, Im f, xi, |g|."""
    import csv

    xs = asm.f.xs()
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "re_f", "im_f", "xi", "abs_g"])
        for x, fv, xv, gv in zip(xs, asm.f.values, asm.cutoff.xi.values,
                                 np.abs(asm.g.values)):
            writer.writerow([f"{x:.17g}", f"{fv.real:.17g}", f"{fv.imag:.17g}",
                             f"{xv.real:.17g}", f"{gv:.17g}"])
