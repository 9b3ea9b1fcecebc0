"""Matrix discretization of the damped-wave generator on a truncated interval.

Independent cross-check route: second-order finite differences with
Dirichlet ends at +-L, even reflection a(|x|), q(|x|), the block operator

    A = [[0, I], [-(K + Q), -2 diag(a)]]

acting on paired node vectors, and the energy Gram matrix
M = h * blockdiag(K + Q, I) (so <.,.>_M discretizes the first-order-system
inner product). Eigenvalues of A approximate the spectrum; the weighted
smallest singular value of A - lam equals the reciprocal resolvent norm in
the energy norm and drives the pseudospectrum scans.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import linalg as sla

from .profiles import DampingProfile, PotentialProfile

MAX_DENSE_SIZE = 2400  # 2N beyond this makes dense eigen/SVD unreasonable
BOUNDARY_BAND_FRACTION = 0.10
BOUNDARY_MASS_LIMIT = 0.10


@dataclass(frozen=True)
class OperatorDiscretization:
    """Dense blocks of the discretized generator plus the Gram factor.

    C is the upper-triangular block factor with M = C^T C; sigma_min of
    C (A - lam) C^{-1} then measures the resolvent in the energy norm.
    """

    L: float
    N: int
    h: float
    xs: np.ndarray
    a_diag: np.ndarray
    q_diag: np.ndarray
    K: np.ndarray            # -d^2/dx^2, Dirichlet, second order
    A: np.ndarray            # 2N x 2N real block operator
    C1: np.ndarray           # lower Cholesky factor of h (K + Q)
    block12: np.ndarray      # C1^T / sqrt(h), precomputed for shifts
    block21: np.ndarray      # -sqrt(h) (C1^{-1} (K+Q))^T

    @property
    def size(self) -> int:
        return 2 * self.N


def build_operator(a: DampingProfile, q: PotentialProfile, L: float,
                   N: int) -> OperatorDiscretization:
    """Assemble the truncated operator with N interior nodes on (-L, L)."""
    if N < 100:
        raise ValueError("N too small; need at least 100 interior nodes")
    if 2 * N > MAX_DENSE_SIZE:
        raise ValueError(
            f"2N = {2 * N} exceeds the dense-solver budget {MAX_DENSE_SIZE}"
        )
    if L <= 0:
        raise ValueError("truncation half-length must be positive")
    h = 2.0 * L / (N + 1)
    xs = -L + h * np.arange(1, N + 1)
    # profiles live on the half line; reflect evenly (|x|), flooring away 0
    # for families whose domain excludes it
    xabs = np.maximum(np.abs(xs), 1e-12)
    a_diag = np.asarray(a.value(xabs), dtype=float)
    q_diag = np.asarray(q.value(xabs), dtype=float)

    K = (np.diag(np.full(N, 2.0)) - np.diag(np.ones(N - 1), 1)
         - np.diag(np.ones(N - 1), -1)) / h**2
    K2 = K + np.diag(q_diag)

    A = np.zeros((2 * N, 2 * N))
    A[:N, N:] = np.eye(N)
    A[N:, :N] = -K2
    A[N:, N:] = -2.0 * np.diag(a_diag)

    C1 = np.linalg.cholesky(h * K2)
    sqrt_h = math.sqrt(h)
    block12 = C1.T / sqrt_h
    block21 = -sqrt_h * sla.solve_triangular(C1, K2, lower=True).T
    return OperatorDiscretization(L=L, N=N, h=h, xs=xs, a_diag=a_diag,
                                  q_diag=q_diag, K=K, A=A, C1=C1,
                                  block12=block12, block21=block21)


@dataclass(frozen=True)
class EigenReport:
    """Eigenvalues sorted by |Im| with truncation-artifact flags.

    An eigenvalue is flagged when its eigenvector carries more than 10% of
    its energy mass in the outer 10% of the interval.
    """

    values: np.ndarray
    boundary_flags: np.ndarray


def spectrum(disc: OperatorDiscretization) -> EigenReport:
    """All eigenvalues of the block operator, with spurious-mode guards."""
    vals, vecs = sla.eig(disc.A)
    order = np.argsort(np.abs(vals.imag), kind="stable")
    vals = vals[order]
    vecs = vecs[:, order]

    outer = np.abs(disc.xs) > (1.0 - BOUNDARY_BAND_FRACTION) * disc.L
    flags = np.empty(vals.shape[0], dtype=bool)
    for i in range(vals.shape[0]):
        u = vecs[:disc.N, i]
        v = vecs[disc.N:, i]
        # local energy density: |u'|^2 + q|u|^2 + |v|^2 per node
        du = np.gradient(u, disc.h)
        dens = np.abs(du) ** 2 + disc.q_diag * np.abs(u) ** 2 + np.abs(v) ** 2
        total = float(np.sum(dens))
        flags[i] = total > 0 and float(np.sum(dens[outer])) > \
            BOUNDARY_MASS_LIMIT * total
    return EigenReport(values=vals, boundary_flags=flags)


def _shifted_weighted(disc: OperatorDiscretization, lam: complex) -> np.ndarray:
    """S = C (A - lam) C^{-1} assembled from the precomputed blocks.

    Block algebra gives S = [[-lam I, C1^T/sqrt(h)],
                             [-sqrt(h) (C1^{-1} K2)^T, -2 diag(a) - lam I]].
    """
    n = disc.N
    S = np.zeros((2 * n, 2 * n), dtype=np.complex128)
    S[:n, :n] = -lam * np.eye(n)
    S[:n, n:] = disc.block12
    S[n:, :n] = disc.block21
    S[n:, n:] = -2.0 * np.diag(disc.a_diag) - lam * np.eye(n)
    return S


def sigma_min_weighted(disc: OperatorDiscretization, lam: complex) -> float:
    """Smallest singular value of C (A - lam) C^{-1}.

    Equals 1 / ||(A - lam)^{-1}|| in the M-weighted norm; zero (to solver
    precision) exactly at eigenvalues of A.
    """
    return float(sla.svdvals(_shifted_weighted(disc, lam))[-1])


def weighted_norm(disc: OperatorDiscretization, w: np.ndarray) -> float:
    """||w||_M for a paired node vector of length 2N."""
    u, v = w[:disc.N], w[disc.N:]
    k2u = (disc.K + np.diag(disc.q_diag)) @ u
    val = disc.h * (np.vdot(u, k2u).real + np.vdot(v, v).real)
    return math.sqrt(max(val, 0.0))


def residual_quotient(disc: OperatorDiscretization, lam: complex,
                      w: np.ndarray) -> float:
    """||(A - lam) w||_M / ||w||_M; upper-bounds sigma_min at lam."""
    shifted = disc.A @ w - lam * w
    return weighted_norm(disc, shifted) / weighted_norm(disc, w)


@dataclass(frozen=True)
class ScanRect:
    re_min: float
    re_max: float
    im_min: float
    im_max: float
    nx: int
    ny: int

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise ValueError("scan resolution must be at least 1 x 1")
        if self.re_max < self.re_min or self.im_max < self.im_min:
            raise ValueError("degenerate scan rectangle")

    def points(self) -> tuple[np.ndarray, np.ndarray]:
        res = np.linspace(self.re_min, self.re_max, self.nx) if self.nx > 1 \
            else np.array([self.re_min])
        ims = np.linspace(self.im_min, self.im_max, self.ny) if self.ny > 1 \
            else np.array([self.im_min])
        return res, ims


@dataclass(frozen=True)
class PseudospectrumGrid:
    """sigma_min values over a rectangle in the lambda plane (ny x nx)."""

    rect: ScanRect
    L: float
    N: int
    values: np.ndarray


def pseudospectrum_scan(disc: OperatorDiscretization, rect: ScanRect,
                        max_workers: Optional[int] = None
                        ) -> PseudospectrumGrid:
    """sigma_min at each grid lambda; points are independent and run on a
    thread pool (LAPACK releases the GIL)."""
    res, ims = rect.points()
    lams = [complex(x, y) for y in ims for x in res]

    def one(lam: complex) -> float:
        return sigma_min_weighted(disc, lam)

    if max_workers is not None and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            flat = list(pool.map(one, lams))
    else:
        flat = [one(lam) for lam in lams]
    values = np.array(flat).reshape(len(ims), len(res))
    return PseudospectrumGrid(rect=rect, L=disc.L, N=disc.N, values=values)


def interpolate_to_operator(disc: OperatorDiscretization, xs: np.ndarray,
                            fvals: np.ndarray, lam: complex) -> np.ndarray:
    """Paired node vector (f, lam f) with f interpolated onto the FD grid.

    The support of f must sit inside (-L, L); nodes outside the sample
    range get zero.
    """
    if xs[0] < -disc.L or xs[-1] > disc.L:
        raise ValueError("pseudomode support exceeds the truncated interval")
    fr = np.interp(disc.xs, xs, fvals.real, left=0.0, right=0.0)
    fi = np.interp(disc.xs, xs, fvals.imag, left=0.0, right=0.0)
    f = fr + 1j * fi
    return np.concatenate([f, lam * f])


def eigenvalue_csv_rows(report: EigenReport) -> list[list[str]]:
    rows = []
    for val, flag in zip(report.values, report.boundary_flags):
        rows.append([f"{val.real:.17g}", f"{val.imag:.17g}", str(int(flag))])
    return rows


def grid_csv_rows(grid: PseudospectrumGrid) -> tuple[str, list[list[str]]]:
    """Header comment with rectangle/resolution and (Re, Im, sigma_min) rows."""
    r = grid.rect
    preamble = (f"# rect={r.re_min:.17g},{r.re_max:.17g},"
                f"{r.im_min:.17g},{r.im_max:.17g} nx={r.nx} ny={r.ny} "
                f"L={grid.L:.17g} N={grid.N}")
    res, ims = r.points()
    rows = []
    for j, y in enumerate(ims):
        for i, x in enumerate(res):
            rows.append([f"{x:.17g}", f"{y:.17g}", f"{grid.values[j, i]:.17g}"])
    return preamble, rows
