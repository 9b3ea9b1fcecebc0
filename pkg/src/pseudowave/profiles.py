"""Damping and potential function families with closed-form derivatives.

Each family (monomial x^p, exponential e^{x^p}, logarithmic ln x, zero,
custom) evaluates its m-th derivative exactly; no numeric differentiation
happens here, which protects the accuracy of the downstream phase
recursion. Profiles also carry the structural metadata the asymptotic
machinery needs: the derivative-growth exponent nu and the threshold
x_min beyond which positivity and monotonicity hold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Sequence

import numpy as np

DEFAULT_MAX_ORDER = 8


class Family(str, Enum):
    MONOMIAL = "monomial"
    EXPONENTIAL = "exponential"
    LOGARITHMIC = "logarithmic"
    ZERO = "zero"
    CUSTOM = "custom"


def _falling_factorial(p: float, m: int) -> float:
    out = 1.0
    for i in range(m):
        out *= p - i
    return out


def _exp_family_terms(p: float, max_order: int) -> list[dict[float, float]]:
    """Derivative ladder for e^{x^p} as sums c * x^e * e^{x^p}.

    terms[m] maps exponent e -> coefficient c for the m-th derivative.
    """
    terms: list[dict[float, float]] = [{0.0: 1.0}]
    for _ in range(max_order):
        nxt: dict[float, float] = {}
        for e, c in terms[-1].items():
            # d/dx [c x^e e^{x^p}] = c e x^{e-1} e^{x^p} + c p x^{e+p-1} e^{x^p}
            if e != 0.0:
                nxt[e - 1.0] = nxt.get(e - 1.0, 0.0) + c * e
            nxt[e + p - 1.0] = nxt.get(e + p - 1.0, 0.0) + c * p
        terms.append(nxt)
    return terms


@dataclass(frozen=True)
class Profile:
    """Shared layout of damping and potential profiles.

    For the monomial/exponential families `p` is the growth exponent; the
    logarithmic and zero families ignore it. Custom profiles supply the
    full derivative ladder themselves (callables, one per order).
    """

    family: Family
    p: float = 1.0
    scale: float = 1.0
    max_order: int = DEFAULT_MAX_ORDER
    nu: float = -1.0
    x_min: float = 1.0
    derivs: Optional[tuple] = None          # custom only
    inverse: Optional[Callable] = None      # custom only, analytic a^{-1}
    _exp_terms: Optional[tuple] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.family is Family.CUSTOM:
            if not self.derivs:
                raise ValueError(
                    "custom profiles must supply closed-form derivatives; "
                    "numeric differentiation of user callables is refused"
                )
            object.__setattr__(self, "max_order", len(self.derivs) - 1)
        if self.family is Family.EXPONENTIAL:
            object.__setattr__(
                self, "_exp_terms", tuple(_exp_family_terms(self.p, self.max_order))
            )

    # -- evaluation ---------------------------------------------------------

    def deriv(self, m: int, x):
        """m-th derivative at x (scalar or array), in closed form."""
        if not 0 <= m <= self.max_order:
            raise ValueError(f"order {m} exceeds max_order {self.max_order}")
        x = np.asarray(x, dtype=float)
        self._check_domain(x)
        fam = self.family
        if fam is Family.ZERO:
            out = np.zeros_like(x)
        elif fam is Family.MONOMIAL:
            out = self.scale * _falling_factorial(self.p, m) * x ** (self.p - m)
        elif fam is Family.EXPONENTIAL:
            acc = np.zeros_like(x)
            for e, c in self._exp_terms[m].items():
                acc = acc + c * x**e
            out = self.scale * acc * np.exp(x**self.p)
        elif fam is Family.LOGARITHMIC:
            if m == 0:
                out = self.scale * np.log(x)
            else:
                out = self.scale * ((-1.0) ** (m - 1)) * math.factorial(m - 1) / x**m
        else:  # CUSTOM
            out = np.asarray(self.derivs[m](x), dtype=float)
        return out if out.ndim else float(out)

    def value(self, x):
        return self.deriv(0, x)

    def _check_domain(self, x: np.ndarray) -> None:
        fam = self.family
        if fam is Family.ZERO:
            return
        needs_positive = (
            fam is Family.LOGARITHMIC
            or fam is Family.EXPONENTIAL
            or (fam is Family.MONOMIAL and self.p != round(self.p))
        )
        if needs_positive and np.any(x <= 0.0):
            raise ValueError(f"{fam.value} family requires x > 0")


class DampingProfile(Profile):
    """Nonnegative, eventually increasing and unbounded damping a(x)."""


class PotentialProfile(Profile):
    """Nonnegative potential q(x); the zero potential is allowed."""

    @property
    def r(self) -> float:
        """Growth parameter of the example families (0 for the zero potential)."""
        return 0.0 if self.family is Family.ZERO else self.p


# -- factories ---------------------------------------------------------------

def monomial_damping(p: float, scale: float = 1.0,
                     max_order: int = DEFAULT_MAX_ORDER) -> DampingProfile:
    if p <= 0 or scale <= 0:
        raise ValueError("monomial damping needs p > 0 and scale > 0")
    return DampingProfile(Family.MONOMIAL, p=p, scale=scale, max_order=max_order,
                          nu=-1.0, x_min=1.0)


def exponential_damping(p: float, scale: float = 1.0,
                        max_order: int = DEFAULT_MAX_ORDER) -> DampingProfile:
    if p <= 0 or scale <= 0:
        raise ValueError("exponential damping needs p > 0 and scale > 0")
    return DampingProfile(Family.EXPONENTIAL, p=p, scale=scale, max_order=max_order,
                          nu=p - 1.0, x_min=1.0)


def logarithmic_damping(scale: float = 1.0,
                        max_order: int = DEFAULT_MAX_ORDER) -> DampingProfile:
    if scale <= 0:
        raise ValueError("logarithmic damping needs scale > 0")
    # x_min = 2 keeps ln x (and thus a) strictly positive on the working range
    return DampingProfile(Family.LOGARITHMIC, scale=scale, max_order=max_order,
                          nu=-1.0, x_min=2.0)


def custom_damping(derivs: Sequence[Callable], nu: float, x_min: float,
                   inverse: Optional[Callable] = None) -> DampingProfile:
    return DampingProfile(Family.CUSTOM, nu=nu, x_min=x_min,
                          derivs=tuple(derivs), inverse=inverse)


def zero_potential() -> PotentialProfile:
    return PotentialProfile(Family.ZERO, nu=-1.0, x_min=0.0)


def monomial_potential(r: float, scale: float = 1.0,
                       max_order: int = DEFAULT_MAX_ORDER) -> PotentialProfile:
    if r <= 0 or scale <= 0:
        raise ValueError("monomial potential needs r > 0 and scale > 0")
    return PotentialProfile(Family.MONOMIAL, p=r, scale=scale, max_order=max_order,
                            nu=-1.0, x_min=1.0)


def exponential_potential(r: float, scale: float = 1.0,
                          max_order: int = DEFAULT_MAX_ORDER) -> PotentialProfile:
    if r <= 0 or scale <= 0:
        raise ValueError("exponential potential needs r > 0 and scale > 0")
    return PotentialProfile(Family.EXPONENTIAL, p=r, scale=scale, max_order=max_order,
                            nu=r - 1.0, x_min=1.0)


def logarithmic_potential(scale: float = 1.0,
                          max_order: int = DEFAULT_MAX_ORDER) -> PotentialProfile:
    if scale <= 0:
        raise ValueError("logarithmic potential needs scale > 0")
    return PotentialProfile(Family.LOGARITHMIC, scale=scale, max_order=max_order,
                            nu=-1.0, x_min=2.0)


def custom_potential(derivs: Sequence[Callable], nu: float,
                     x_min: float) -> PotentialProfile:
    return PotentialProfile(Family.CUSTOM, nu=nu, x_min=x_min, derivs=tuple(derivs))


# -- module operations --------------------------------------------------------

def eval_deriv(profile: Profile, m: int, x):
    """Exact m-th derivative of the profile at x (closed form per family)."""
    return profile.deriv(m, x)


def eval_on_axis(profile: Profile, x):
    """Profile value with even reflection a(|x|), for whole-line grids."""
    return profile.value(np.maximum(np.abs(np.asarray(x, dtype=float)), 1e-300))


def window_sup(q: Profile, j: int, b: float, delta: float,
               samples: int = 2001) -> float:
    """sup of |q^(j)| over (b - delta, b + delta).

    Dense sampling including the exact endpoints, then two local refinement
    passes around the running argmax.
    """
    if delta <= 0:
        raise ValueError("window half-width must be positive")
    lo, hi = b - delta, b + delta
    if q.family is not Family.ZERO and lo <= 0.0 and q.family in (
        Family.LOGARITHMIC, Family.EXPONENTIAL
    ):
        raise ValueError("window extends below the family domain")
    if q.family is Family.MONOMIAL and q.p != round(q.p) and lo <= 0.0:
        raise ValueError("window extends below the family domain")
    xs = np.linspace(lo, hi, samples)
    vals = np.abs(q.deriv(j, xs))
    best_x, best = xs[int(np.argmax(vals))], float(np.max(vals))
    step = (hi - lo) / (samples - 1)
    for _ in range(2):
        loc = np.linspace(max(lo, best_x - step), min(hi, best_x + step), 201)
        lv = np.abs(q.deriv(j, loc))
        i = int(np.argmax(lv))
        if lv[i] > best:
            best, best_x = float(lv[i]), loc[i]
        step /= 100.0
    return best


@dataclass(frozen=True)
class ProfileCheck:
    """Sampled verification of the structural assumptions on a damping.

    The constant of the derivative-control inequality
    |a^(m)(x)| <= C x^{m nu} a(x) is measured per order, never assumed.
    """

    nonnegative: bool
    increasing: bool
    unbounded: bool
    control_constants: tuple  # measured C per derivative order 1..orders
    ok: bool


def check_damping(a: DampingProfile, x_max: float = 1e3, orders: int = 2,
                  samples: int = 200) -> ProfileCheck:
    """Check positivity/monotonicity/growth and measure the control constants.

    The doubling test a(2x) > a(x) may overflow to inf for fast-growing
    families; the comparison still decides correctly, so overflow is
    silenced here.
    """
    if a.family is Family.EXPONENTIAL:
        # keep (2 x_max)^p inside float range
        x_max = min(x_max, 0.5 * (700.0 ** (1.0 / a.p)))
    xs = np.geomspace(max(a.x_min, 1e-6), x_max, samples)
    with np.errstate(over="ignore"):
        vals = a.value(xs)
        d1 = a.deriv(1, xs)
        nonneg = bool(np.all(vals >= 0.0))
        incr = bool(np.all(d1 > 0.0))
        unbounded = bool(np.all(a.value(2.0 * xs) > vals))
        consts = []
        for m in range(1, orders + 1):
            ratio = np.abs(a.deriv(m, xs)) / (
                xs ** (m * a.nu) * np.maximum(vals, 1e-300))
            consts.append(float(np.max(ratio)))
    return ProfileCheck(nonneg, incr, unbounded, tuple(consts),
                        ok=nonneg and incr and unbounded)


def check_potential(q: PotentialProfile, x_max: float = 1e3,
                    samples: int = 200) -> bool:
    """q >= 0 beyond x_min, sampled."""
    if q.family is Family.ZERO:
        return True
    xs = np.geomspace(max(q.x_min, 1e-6), x_max, samples)
    return bool(np.all(q.value(xs) >= 0.0))
