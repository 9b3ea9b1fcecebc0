"""Batch front-end.

    pseudowave {pseudomode|sweep|pseudospec|spectrum|selftest}
               --config <path> [--out <dir>] [--workers <k>]

Experiment parameters live in a flat JSON config; command-line flags
override file values. Every mode writes CSV artifacts (17 significant
digits, fixed row order, so identical configs give bit-identical files)
and renders a matplotlib figure next to each CSV. Exit codes: 0 success,
1 config error, 2 numerical failure, 3 selftest failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import dataclass, field
from typing import Optional

from numpy.linalg import LinAlgError

from . import acceptance, discretize, plots, profiles, pseudomode, residual

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_SELFTEST = 3


class ConfigError(Exception):
    """Bad config file or field; message carries the field diagnostics."""


@dataclass
class ExperimentConfig:
    mode: str
    damping: profiles.DampingProfile
    potential: profiles.PotentialProfile
    n: int = 0
    epsilon: float = 0.1
    beta_curve: pseudomode.BetaCurve = field(
        default_factory=pseudomode.BetaCurve)
    grid_multiplier: float = 1.0
    b_list: Optional[list] = None
    alpha_list: Optional[list] = None
    b: Optional[float] = None
    alpha: Optional[float] = None
    beta: Optional[float] = None
    scan: Optional[discretize.ScanRect] = None
    L: float = 12.0
    N: int = 600
    out: str = "results"
    workers: int = 0  # 0 means available parallelism


def _parse_profile(node: dict, which: str):
    if not isinstance(node, dict) or "family" not in node:
        raise ConfigError(f"{which}: expected an object with a 'family' field")
    fam = node["family"]
    scale = float(node.get("scale", 1.0))
    order = int(node.get("max_order", profiles.DEFAULT_MAX_ORDER))
    try:
        if which == "damping":
            if fam == "monomial":
                return profiles.monomial_damping(float(node["p"]), scale, order)
            if fam == "exponential":
                return profiles.exponential_damping(float(node["p"]), scale, order)
            if fam == "logarithmic":
                return profiles.logarithmic_damping(scale, order)
            raise ConfigError(f"damping.family: unknown family {fam!r}")
        if fam == "zero":
            return profiles.zero_potential()
        if fam == "monomial":
            return profiles.monomial_potential(float(node["r"]), scale, order)
        if fam == "exponential":
            return profiles.exponential_potential(float(node["r"]), scale, order)
        if fam == "logarithmic":
            return profiles.logarithmic_potential(scale, order)
        raise ConfigError(f"potential.family: unknown family {fam!r}")
    except KeyError as exc:
        raise ConfigError(f"{which}: missing field {exc.args[0]!r} for "
                          f"family {fam!r}") from None
    except ValueError as exc:
        raise ConfigError(f"{which}: {exc}") from None


def _parse_beta_curve(node) -> pseudomode.BetaCurve:
    if node is None:
        return pseudomode.BetaCurve()
    if not isinstance(node, dict) or "kind" not in node:
        raise ConfigError("beta_curve: expected an object with a 'kind' field")
    kind = node["kind"]
    try:
        if kind == "constant":
            return pseudomode.BetaCurve("constant", c=float(node.get("c", 1.0)))
        if kind == "power":
            return pseudomode.BetaCurve("power", s=float(node["s"]))
        if kind == "exp_matched":
            return pseudomode.BetaCurve("exp_matched", s=float(node["s"]),
                                        p=float(node["p"]))
    except KeyError as exc:
        raise ConfigError(f"beta_curve: missing field {exc.args[0]!r} for "
                          f"kind {kind!r}") from None
    raise ConfigError(f"beta_curve.kind: unknown kind {kind!r}")


def parse_config(path: str, mode: str) -> ExperimentConfig:
    """Load and validate the experiment config for the given subcommand."""
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"config parse error at line {exc.lineno}, column {exc.colno}: "
            f"{exc.msg}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    if "mode" in raw and raw["mode"] != mode:
        raise ConfigError(
            f"mode: config says {raw['mode']!r} but the subcommand is {mode!r}")

    if mode != "selftest" and "damping" not in raw:
        raise ConfigError("damping: required field missing")
    damping = _parse_profile(raw["damping"], "damping") \
        if "damping" in raw else profiles.monomial_damping(2.0)
    potential = _parse_profile(raw["potential"], "potential") \
        if "potential" in raw else profiles.zero_potential()

    cfg = ExperimentConfig(
        mode=mode, damping=damping, potential=potential,
        n=int(raw.get("n", 0)), epsilon=float(raw.get("epsilon", 0.1)),
        beta_curve=_parse_beta_curve(raw.get("beta_curve")),
        grid_multiplier=float(raw.get("grid_multiplier", 1.0)),
        b_list=raw.get("b_list"), alpha_list=raw.get("alpha_list"),
        b=raw.get("b"), alpha=raw.get("alpha"), beta=raw.get("beta"),
        L=float(raw.get("L", 12.0)), N=int(raw.get("N", 600)),
        out=str(raw.get("out", "results")),
        workers=int(raw.get("workers", 0)))
    if "scan" in raw:
        s = raw["scan"]
        try:
            cfg.scan = discretize.ScanRect(
                re_min=float(s["re_min"]), re_max=float(s["re_max"]),
                im_min=float(s["im_min"]), im_max=float(s["im_max"]),
                nx=int(s.get("nx", 61)), ny=int(s.get("ny", 41)))
        except KeyError as exc:
            raise ConfigError(f"scan: missing field {exc.args[0]!r}") from None
        except ValueError as exc:
            raise ConfigError(f"scan: {exc}") from None
    _validate(cfg)
    return cfg


def _validate(cfg: ExperimentConfig) -> None:
    if cfg.epsilon <= 0:
        raise ConfigError("epsilon: must be positive")
    if cfg.n < 0:
        raise ConfigError("n: must be >= 0")
    if cfg.grid_multiplier < 1.0:
        raise ConfigError("grid_multiplier: must be >= 1")
    if cfg.mode == "sweep":
        pts = cfg.b_list if cfg.b_list is not None else cfg.alpha_list
        if pts is None or len(pts) == 0:
            raise ConfigError("b_list: sweep needs a nonempty b_list or "
                              "alpha_list")
    if cfg.mode == "pseudomode" and cfg.b is None and cfg.alpha is None:
        raise ConfigError("b: pseudomode mode needs 'b' or 'alpha'")
    if cfg.mode == "pseudospec" and cfg.scan is None:
        raise ConfigError("scan: pseudospec mode needs a scan rectangle")
    if cfg.mode in ("pseudospec", "spectrum"):
        if 2 * cfg.N > discretize.MAX_DENSE_SIZE:
            raise ConfigError(f"N: 2N = {2 * cfg.N} exceeds the dense-solver "
                              f"budget {discretize.MAX_DENSE_SIZE}")
    # profiles must satisfy their structural assumptions before any run
    if cfg.mode != "selftest":
        chk = profiles.check_damping(cfg.damping)
        if not chk.ok:
            raise ConfigError(
                "damping: profile violates the structural assumptions "
                f"(nonnegative={chk.nonnegative}, increasing={chk.increasing}, "
                f"unbounded={chk.unbounded})")
        if not profiles.check_potential(cfg.potential):
            raise ConfigError("potential: negative values on the sample grid")


def _workers(cfg: ExperimentConfig) -> int:
    return cfg.workers if cfg.workers > 0 else (os.cpu_count() or 1)


def _fmt(x) -> str:
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return f"{x:.17g}"


SWEEP_COLUMNS = [
    "b", "alpha", "beta", "delta", "n", "ratio", "numerator",
    "norm_fprime_sq", "norm_qhalf_f_sq", "norm_lam_f_sq",
    "comp_xi2_g", "comp_xi1_gprime", "comp_xi_rn_g",
    "kappa1", "kappa1_c", "kappa2", "c1_fit", "c2_fit",
    "gauss_slope", "gauss_r2", "resolvent_lower_bound",
    "hyp_q0", "hyp_qj", "hyp_cutoff2", "hyp_kappa1",
    "flag_q0", "flag_qj", "flag_cutoff2", "flag_kappa1",
]


def _report_row(r: residual.ResidualReport) -> list[str]:
    hyp = r.hypothesis
    flags = r.flags
    vals = [r.b, r.alpha, r.beta, r.delta, r.n, r.ratio, r.numerator,
            r.norm_fprime_sq, r.norm_qhalf_f_sq, r.norm_lam_f_sq,
            r.comp_xi2_g, r.comp_xi1_gprime, r.comp_xi_rn_g,
            r.kappa1, r.kappa1_c, r.kappa2, r.c1_fit, r.c2_fit,
            r.gauss_slope, r.gauss_r2, r.resolvent_lower_bound,
            hyp.q0 if hyp else math.nan, hyp.qj if hyp else math.nan,
            hyp.cutoff2 if hyp else math.nan, hyp.kappa1 if hyp else math.nan,
            flags.q0_failed if flags else False,
            flags.qj_failed if flags else False,
            flags.cutoff2_failed if flags else False,
            flags.kappa1_failed if flags else False]
    return [_fmt(v) for v in vals]


def _write_csv(path, header: list[str], rows: list[list[str]],
               preamble: Optional[str] = None) -> None:
    with open(path, "w", newline="") as fh:
        if preamble:
            fh.write(preamble + "\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _run_pseudomode(cfg: ExperimentConfig) -> int:
    b = cfg.b if cfg.b is not None else pseudomode.solve_b(cfg.damping,
                                                           cfg.alpha)
    pcfg = pseudomode.PseudomodeConfig(n=cfg.n, epsilon=cfg.epsilon,
                                       beta_curve=cfg.beta_curve,
                                       grid_multiplier=cfg.grid_multiplier)
    asm = pseudomode.assemble_at_b(cfg.damping, cfg.potential, pcfg,
                                   float(b), beta=cfg.beta)
    report = residual.report_for(cfg.damping, cfg.potential, asm)
    pseudomode.dump_csv(asm, os.path.join(cfg.out, "pseudomode.csv"))
    _write_csv(os.path.join(cfg.out, "report.csv"), SWEEP_COLUMNS,
               [_report_row(report)])
    plots.render_pseudomode(asm, os.path.join(cfg.out, "pseudomode.png"))
    print(f"b = {asm.sp.b:.6g}, lambda = {asm.lam:.6g}, "
          f"residual ratio = {report.ratio:.6e}")
    return EXIT_OK


def _run_sweep(cfg: ExperimentConfig) -> int:
    if cfg.b_list is not None:
        b_list = [float(b) for b in cfg.b_list]
    else:
        b_list = [pseudomode.solve_b(cfg.damping, float(al))
                  for al in cfg.alpha_list]
    pcfg = pseudomode.PseudomodeConfig(n=cfg.n, epsilon=cfg.epsilon,
                                       beta_curve=cfg.beta_curve,
                                       grid_multiplier=cfg.grid_multiplier)
    reports = residual.sweep(cfg.damping, cfg.potential, pcfg, b_list,
                             max_workers=_workers(cfg))
    fit = residual.fit_rate(reports, cfg.damping) if len(reports) >= 3 else None
    _write_csv(os.path.join(cfg.out, "sweep.csv"), SWEEP_COLUMNS,
               [_report_row(r) for r in reports])
    if fit is not None:
        _write_csv(os.path.join(cfg.out, "rate_fit.csv"),
                   ["slope", "intercept", "r2", "points_used", "abscissa"],
                   [[_fmt(fit.slope), _fmt(fit.intercept), _fmt(fit.r2),
                     str(fit.points_used), fit.abscissa]])
        plots.render_sweep(reports, fit, os.path.join(cfg.out, "sweep.png"))
        print(f"fitted slope {fit.slope:.4f} against {fit.abscissa} "
              f"(R^2 = {fit.r2:.4f}, {fit.points_used} points)")
    for r in reports:
        print(f"b = {r.b:.6g}: ratio = {r.ratio:.6e}")
    if reports and reports[0].flags and reports[0].flags.any_failed:
        print("warning: hypothesis checks flagged on this curve "
              "(see flag_* columns); decay is not guaranteed")
    return EXIT_OK


def _run_pseudospec(cfg: ExperimentConfig) -> int:
    disc = discretize.build_operator(cfg.damping, cfg.potential, cfg.L, cfg.N)
    amax = float(cfg.damping.value(cfg.L))
    need = 2.0 * max(abs(cfg.scan.re_min), abs(cfg.scan.re_max))
    if amax < need:
        print(f"warning: a(L) = {amax:.3g} < 2 max|Re lambda| = {need:.3g}; "
              "truncation may distort the scan")
    grid = discretize.pseudospectrum_scan(disc, cfg.scan,
                                          max_workers=_workers(cfg))
    preamble, rows = discretize.grid_csv_rows(grid)
    _write_csv(os.path.join(cfg.out, "pseudospectrum.csv"),
               ["re_lambda", "im_lambda", "sigma_min"], rows,
               preamble=preamble)
    plots.render_pseudospectrum(grid,
                                os.path.join(cfg.out, "pseudospectrum.png"))
    print(f"sigma_min range [{grid.values.min():.3e}, "
          f"{grid.values.max():.3e}] over {cfg.scan.nx}x{cfg.scan.ny} points")
    return EXIT_OK


def _run_spectrum(cfg: ExperimentConfig) -> int:
    disc = discretize.build_operator(cfg.damping, cfg.potential, cfg.L, cfg.N)
    report = discretize.spectrum(disc)
    _write_csv(os.path.join(cfg.out, "eigenvalues.csv"),
               ["re", "im", "boundary_mass_flag"],
               discretize.eigenvalue_csv_rows(report))
    plots.render_spectrum(report, os.path.join(cfg.out, "spectrum.png"))
    nonreal = report.values[abs(report.values.imag) > 1e-3]
    print(f"{len(report.values)} eigenvalues ({len(nonreal)} nonreal), "
          f"{int(report.boundary_flags.sum())} flagged as boundary-heavy")
    return EXIT_OK


def run(cfg: ExperimentConfig) -> int:
    """Dispatch one experiment; returns the process exit code."""
    if cfg.mode == "selftest":
        results = acceptance.run_all()
        failed = [r for r in results if not r.passed]
        print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
        return EXIT_SELFTEST if failed else EXIT_OK
    os.makedirs(cfg.out, exist_ok=True)
    try:
        if cfg.mode == "pseudomode":
            return _run_pseudomode(cfg)
        if cfg.mode == "sweep":
            return _run_sweep(cfg)
        if cfg.mode == "pseudospec":
            return _run_pseudospec(cfg)
        if cfg.mode == "spectrum":
            return _run_spectrum(cfg)
        raise ConfigError(f"mode: unknown mode {cfg.mode!r}")
    except (ValueError, ArithmeticError, LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def main(argv: Optional[list[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="pseudowave",
        description="WKB pseudomodes and pseudospectra for the damped wave "
                    "generator")
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode, blurb in [
        ("pseudomode", "build one pseudomode and report its residual"),
        ("sweep", "residual ratios along a b sweep with a rate fit"),
        ("pseudospec", "weighted sigma_min scan over a lambda rectangle"),
        ("spectrum", "eigenvalues of the discretized generator"),
        ("selftest", "run the acceptance suite"),
    ]:
        p = sub.add_parser(mode, help=blurb)
        p.add_argument("--config", required=(mode != "selftest"),
                       help="path to the JSON experiment config")
        p.add_argument("--out", help="output directory (overrides config)")
        p.add_argument("--workers", type=int,
                       help="worker pool size (overrides config)")
    args = parser.parse_args(argv)

    if args.mode == "selftest" and args.config is None:
        return run(ExperimentConfig(mode="selftest",
                                    damping=profiles.monomial_damping(2.0),
                                    potential=profiles.zero_potential()))
    try:
        cfg = parse_config(args.config, args.mode)
        if args.out is not None:
            cfg.out = args.out
        if args.workers is not None:
            cfg.workers = args.workers
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
