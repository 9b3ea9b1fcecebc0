"""Figure rendering for the CLI report paths.

Each CLI mode writes its delimited output and, next to it, a matplotlib
figure of the same data: pseudomode profiles, sweep rate plots with the
predicted rate factors, pseudospectrum contour maps and spectrum scatter
plots. The CSV stays the canonical interchange; figures are for eyes.
"""

from __future__ import annotations

import numpy as np

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .discretize import EigenReport, PseudospectrumGrid  # noqa: E402
from .pseudomode import PseudomodeAssembly  # noqa: E402
from .residual import RateFit, ResidualReport  # noqa: E402

DPI = 150


def render_pseudomode(asm: PseudomodeAssembly, path) -> None:
    """Two panels: Re f with the cutoff, and the localization of |g|."""
    xs = asm.f.xs()
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 3.6))
    ax1.plot(xs, asm.f.values.real, lw=0.6, label="Re f")
    ax1.plot(xs, asm.cutoff.xi.values.real, "k--", lw=1.0, label="cutoff")
    ax1.set_xlabel("x")
    ax1.set_title(f"pseudomode at b={asm.sp.b:.4g}, "
                  f"lam={asm.lam:.4g}, n={asm.config.n}")
    ax1.legend(loc="upper right", fontsize=8)

    absg = np.abs(asm.g.values)
    pos = absg > 0
    ax2.semilogy(xs[pos], absg[pos], lw=0.8)
    ax2.axvline(asm.sp.b, color="k", ls=":", lw=0.8)
    ax2.set_xlabel("x")
    ax2.set_ylabel("|g|")
    ax2.set_title("envelope")
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)


def render_sweep(reports: list[ResidualReport], fit: RateFit, path) -> None:
    """Measured residual ratio against b with the kappa rate factors."""
    bs = np.array([r.b for r in reports])
    ratios = np.array([r.ratio for r in reports])
    k1 = np.array([r.kappa1 for r in reports])
    k2 = np.array([r.kappa2 for r in reports])
    fig, ax = plt.subplots(figsize=(5.2, 3.9))
    ax.loglog(bs, ratios, "o-", label="measured ratio")
    ax.loglog(bs, k1, "s--", label="kappa1 (cutoff)")
    ax.loglog(bs, k2, "d--", label="kappa2 (remainder)")
    ax.set_xlabel("b")
    ax.set_ylabel("residual ratio")
    ax.set_title(f"fit slope {fit.slope:.2f} (R^2 = {fit.r2:.3f}, "
                 f"{fit.abscissa})")
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)


def render_pseudospectrum(grid: PseudospectrumGrid, path,
                          eigenvalues: np.ndarray | None = None) -> None:
    """log10 sigma_min contour map, optionally with the spectrum overlaid."""
    res, ims = grid.rect.points()
    vals = np.log10(np.maximum(grid.values, 1e-300))
    fig, ax = plt.subplots(figsize=(5.6, 4.2))
    if len(res) > 1 and len(ims) > 1:
        levels = np.arange(np.floor(vals.min()), np.ceil(vals.max()) + 0.5, 0.5)
        cs = ax.contourf(res, ims, vals, levels=levels, cmap="viridis")
        fig.colorbar(cs, ax=ax, label="log10 sigma_min")
    else:
        ax.plot(res if len(res) > 1 else ims,
                vals.ravel(), "o-")
    if eigenvalues is not None:
        sel = (eigenvalues.real >= res.min()) & (eigenvalues.real <= res.max()) \
            & (eigenvalues.imag >= ims.min()) & (eigenvalues.imag <= ims.max())
        ax.plot(eigenvalues.real[sel], eigenvalues.imag[sel], "k.", ms=3)
    ax.set_xlabel("Re lambda")
    ax.set_ylabel("Im lambda")
    ax.set_title(f"weighted pseudospectrum (2N = {2 * grid.N}, L = {grid.L:g})")
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)


def render_spectrum(report: EigenReport, path) -> None:
    """Eigenvalues in the complex plane; truncation artifacts marked."""
    vals = report.values
    flags = report.boundary_flags
    fig, ax = plt.subplots(figsize=(5.2, 3.9))
    ax.plot(vals.real[~flags], vals.imag[~flags], "k.", ms=4, label="eigenvalues")
    if flags.any():
        ax.plot(vals.real[flags], vals.imag[flags], "rx", ms=4,
                label="boundary-heavy (suspect)")
    ax.axvline(0.0, color="gray", lw=0.6)
    ax.set_xlabel("Re lambda")
    ax.set_ylabel("Im lambda")
    ax.set_title("spectrum of the discretized generator")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)
