"""WKB phase family and exact remainder for the quadratic pencil.

For the pencil T(lam) = -d^2/dx^2 + q + 2*lam*a + lam^2 acting on
g = exp(w), w = -i*lam*psi_{-1} - sum_{k=0}^{n-1} lam^{-k} psi_k, the
phase derivatives are generated by the standard recursion that cancels
powers of lam in T(lam)g / g. What survives the cancellation is the
remainder r_n with T(lam)g = r_n g identically.

Branch convention: lam = -alpha + i*beta sits in the second quadrant
(alpha, beta > 0); the third quadrant is reached by conjugation, never by
rebuilding with the opposite branch. beta = 0 is rejected because the
localization mechanism degenerates there.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict

import numpy as np

from .gridfn import GridFunction, GridSpec, _diff_arrays, cumulative_integral
from .profiles import DampingProfile, PotentialProfile


class BranchCutError(ValueError):
    """The pseudomode window touched the negative real axis of zeta."""


def principal_sqrt(z):
    """Principal complex square root, cut along (-infty, 0].

    sqrt(z) = sqrt((|z|+Re z)/2) + sgn(Im z) * i * sqrt((|z|-Re z)/2);
    the result has nonnegative real part and squares back to z.
    """
    arr = np.asarray(z, dtype=np.complex128)
    re, im = arr.real, arr.imag
    if np.any((im == 0.0) & (re <= 0.0)):
        raise BranchCutError(
            "argument on the branch cut (-infty, 0]; the pseudomode window "
            "left the admissible region"
        )
    mag = np.abs(arr)
    out = np.sqrt(0.5 * (mag + re)) + 1j * np.sign(im) * np.sqrt(0.5 * (mag - re))
    return out if arr.ndim else complex(out)


@dataclass(frozen=True)
class SpectralPoint:
    """lam = -alpha + i*beta with alpha = a(b); carries the turning point b."""

    alpha: float
    beta: float
    b: float

    def __post_init__(self):
        if self.alpha <= 0.0:
            raise ValueError("alpha must be positive (left half-plane)")
        if self.beta == 0.0:
            raise ValueError(
                "beta = 0 is rejected: the Gaussian localization degenerates"
            )

    @property
    def lam(self) -> complex:
        return complex(-self.alpha, self.beta)

    @classmethod
    def from_b(cls, a: DampingProfile, b: float, beta: float) -> "SpectralPoint":
        sp = cls(alpha=float(a.value(b)), beta=beta, b=b)
        sp.validate(a)
        return sp

    def validate(self, a: DampingProfile, rtol: float = 1e-12) -> None:
        """Re-check the defining equation a(b) = alpha."""
        resid = abs(a.value(self.b) - self.alpha)
        if resid > rtol * max(1.0, abs(self.alpha)):
            raise ValueError(
                f"a(b) = {a.value(self.b)!r} does not match alpha = {self.alpha!r}"
            )


def zeta(a: DampingProfile, q: PotentialProfile, sp: SpectralPoint, t):
    """zeta(t) = -lam^2 - 2*lam*a(t) - q(t).

    At t = b this is alpha^2 + beta^2 - q(b) with vanishing imaginary part;
    sgn(Im zeta(t)) = sgn(b - t) wherever a is increasing.
    """
    lam = sp.lam
    return -lam * lam - 2.0 * lam * np.asarray(a.value(t)) - np.asarray(q.value(t))


def zeta_prime(a: DampingProfile, q: PotentialProfile, sp: SpectralPoint, t):
    """d zeta / dt = -2*lam*a'(t) - q'(t), in closed form."""
    lam = sp.lam
    return -2.0 * lam * np.asarray(a.deriv(1, t)) - np.asarray(q.deriv(1, t))


@dataclass(frozen=True)
class WkbPhases:
    """Sampled phase derivatives psi_k' (k = -1..n-1) and their antiderivatives.

    Every psi_k is anchored with psi_k(b) = 0, so the assembled g satisfies
    g(b) = 1. psi_dprime holds the second derivatives used by the recursion
    (analytic for k = -1, one grid differentiation for k >= 0).
    """

    sp: SpectralPoint
    n: int
    grid: GridSpec
    psi_prime: Dict[int, GridFunction]
    psi: Dict[int, GridFunction]
    psi_dprime: Dict[int, GridFunction]
    zeta_values: GridFunction
    sqrt_zeta: GridFunction

    @property
    def b(self) -> float:
        return self.sp.b

    def exponent(self) -> GridFunction:
        """w = -i*lam*psi_{-1} - sum_k lam^{-k} psi_k (so g = exp(w))."""
        lam = self.sp.lam
        w = -1j * lam * self.psi[-1].values
        for k in range(self.n):
            w = w - lam ** (-k) * self.psi[k].values
        return self.psi[-1].with_values(w)

    def exponent_prime(self) -> GridFunction:
        """w' assembled analytically from the phase derivatives."""
        lam = self.sp.lam
        wp = -1j * lam * self.psi_prime[-1].values
        for k in range(self.n):
            wp = wp - lam ** (-k) * self.psi_prime[k].values
        return self.psi_prime[-1].with_values(wp)

    def g(self) -> GridFunction:
        return self.psi[-1].with_values(np.exp(self.exponent().values))


def build_phases(a: DampingProfile, q: PotentialProfile, sp: SpectralPoint,
                 n: int, grid: GridSpec) -> WkbPhases:
    """Generate psi_{-1}', ..., psi_{n-1}' on the grid and anchor psi_k(b) = 0.

    The recursion (k = 0..n-2):
        psi_0'    = -(2*lam*a' + q') / (4*zeta)
        psi_{k+1}' = (psi_k'' - sum_{i+j=k, i,j>=0} psi_i' psi_j')
                     / (2i * psi_{-1}')
    with psi_k'' obtained by grid differentiation of the smooth psi_k'
    (the oscillation lives entirely in the lam*psi_{-1} term).
    """
    if n < 0:
        raise ValueError("expansion order n must be >= 0")
    if n + 1 > a.max_order or (q.family.value != "zero" and n + 1 > q.max_order):
        raise ValueError(
            f"profiles expose derivatives only to order "
            f"{min(a.max_order, q.max_order)}, need {n + 1}"
        )
    xs = grid.xs()
    lam = sp.lam
    zt = zeta(a, q, sp, xs)
    sq = principal_sqrt(zt)

    psi_prime: Dict[int, GridFunction] = {}
    psi_dprime: Dict[int, GridFunction] = {}
    mk = lambda arr: GridFunction(grid.x0, grid.h, arr)  # noqa: E731

    psi_prime[-1] = mk(sq / lam)
    # analytic psi_{-1}'' = zeta' / (2 lam sqrt(zeta))
    ztp = zeta_prime(a, q, sp, xs)
    psi_dprime[-1] = mk(ztp / (2.0 * lam * sq))

    if n >= 1:
        psi_prime[0] = mk(-0.25 * (2.0 * lam * a.deriv(1, xs) + q.deriv(1, xs)) / zt)
        for k in range(0, n - 1):
            dpk = _diff_arrays(psi_prime[k].values, grid.h, 1)
            psi_dprime[k] = mk(dpk)
            conv = np.zeros_like(dpk)
            for i in range(0, k + 1):
                conv = conv + psi_prime[i].values * psi_prime[k - i].values
            psi_prime[k + 1] = mk((dpk - conv) / (2j * psi_prime[-1].values))
        psi_dprime[n - 1] = mk(_diff_arrays(psi_prime[n - 1].values, grid.h, 1))

    center = grid.center_index
    psi = {k: cumulative_integral(fp, center) for k, fp in psi_prime.items()}
    return WkbPhases(sp=sp, n=n, grid=grid, psi_prime=psi_prime, psi=psi,
                     psi_dprime=psi_dprime, zeta_values=mk(zt), sqrt_zeta=mk(sq))


def remainder_rn(phases: WkbPhases) -> GridFunction:
    """Exact remainder r_n with T(lam) g = r_n g.

    Equal to -w'' - (w')^2 + (q + 2*lam*a + lam^2), but assembled in the
    algebraically reduced form in which the powers of lam cancelled by the
    recursion are dropped before any arithmetic happens:

        r_0 = i*lam*psi_{-1}''
        r_n = lam^{-(n-1)} (psi_{n-1}'' - sum_{i+j=n-1} psi_i' psi_j')
              - sum_{m=n}^{2n-2} lam^{-m} sum_{i+j=m} psi_i' psi_j'

    (indices i, j over 0..n-1). The naive form loses the small remainder to
    float cancellation of size eps*|zeta| once |lam| is large; this form has
    no large intermediate terms.
    """
    lam = phases.sp.lam
    n = phases.n
    if n == 0:
        return phases.psi_dprime[-1].with_values(
            1j * lam * phases.psi_dprime[-1].values
        )
    pp = phases.psi_prime

    def pair_sum(m: int) -> np.ndarray:
        acc = np.zeros(phases.grid.n, dtype=np.complex128)
        for i in range(max(0, m - (n - 1)), min(n - 1, m) + 1):
            acc = acc + pp[i].values * pp[m - i].values
        return acc

    r = lam ** (-(n - 1)) * (phases.psi_dprime[n - 1].values - pair_sum(n - 1))
    for m in range(n, 2 * n - 1):
        r = r - lam ** (-m) * pair_sum(m)
    return phases.psi_dprime[-1].with_values(r)


def remainder_rn_direct(phases: WkbPhases, a: DampingProfile,
                        q: PotentialProfile) -> GridFunction:
    """Remainder via the defining identity -w'' - (w')^2 + (q + 2*lam*a + lam^2).

    w' is assembled analytically from the phase derivatives and w'' comes
    from one grid differentiation. Used as a cross-check route: it agrees
    with remainder_rn up to discretization error plus a float-cancellation
    floor of order eps * |zeta|.
    """
    lam = phases.sp.lam
    xs = phases.grid.xs()
    wp = phases.exponent_prime()
    wpp = _diff_arrays(wp.values, phases.grid.h, 1)
    poly = np.asarray(q.value(xs)) + 2.0 * lam * np.asarray(a.value(xs)) + lam * lam
    return wp.with_values(-wpp - wp.values * wp.values + poly)
