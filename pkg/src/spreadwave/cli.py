"""``spreadwave speed|wave|simulate|verify --config PATH``.

Exit codes: 0 success, 1 hypothesis or verification failure, 2 numerical
non-convergence, 3 configuration error.
"""
from __future__ import annotations

import argparse
from dataclasses import dataclass, field
import math
from pathlib import Path
import sys

import numpy as np

from . import config as config_mod
from .errors import ConvergenceError, OutOfRangeError, SpreadwaveError
from .report import CheckResult, format_float, format_vector

EXIT_OK, EXIT_FAIL, EXIT_NONCONV, EXIT_CONFIG = 0, 1, 2, 3


@dataclass
class RunReport:
    """Flat ``name = value`` report plus its ledger of checks."""

    lines: list = field(default_factory=list)
    checks: list = field(default_factory=list)

    def add(self, name: str, value) -> None:
        if isinstance(value, float):
            value = f"{value:.9f}" if abs(value) >= 1e-3 or value == 0 else format_float(value, 9)
        elif isinstance(value, np.ndarray):
            value = format_vector(value)
        self.lines.append(f"{name} = {value}")

    def check(self, result: CheckResult) -> None:
        self.checks.append(result)
        self.lines.append(result.line())

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def text(self) -> str:
        return "\n".join(self.lines) + "\n"


def _header(report: RunReport, cfg) -> None:
    report.add("model", cfg.model_name)
    for k in sorted(cfg.model_params):
        report.add(f"param.{k}", f"{cfg.model_params[k]:.12g}")


def _speeds(cfg, override):
    if override is not None:
        return (float(override),)
    return cfg.c_values


def cmd_speed(cfg, c=None, out=None) -> RunReport:
    from .speed import speed_report

    model = cfg.build_model()
    rep = RunReport()
    _header(rep, cfg)
    sr = speed_report(model, _speeds(cfg, c))
    rep.add("c_star", sr.c_star)
    rep.add("lambda_star", sr.lambda_star)
    for b in sr.blocks:
        tag = f"c[{b.c:.6g}]"
        rep.add(f"{tag}.Lambda_c", b.Lambda_c)
        rep.add(f"{tag}.gamma", f"{b.gamma:.2f}")
        rep.add(f"{tag}.nu_Lambda_c", b.nu_Lambda_c)
        rep.add(f"{tag}.nu_gamma_Lambda_c", b.nu_gamma_Lambda_c)
        rep.add(f"{tag}.beta", b.beta)
        rep.add(f"{tag}.lambda1", b.lambda1)
        rep.add(f"{tag}.lambda2", b.lambda2)
        rep.add(f"{tag}.q", f"{b.q:.6g}" if b.q is not None else "none")
    if cfg.path is not None:
        target = cfg.path.with_name(cfg.path.stem + ".speed.txt")
        target.write_text(rep.text(), encoding="utf-8")
    return rep


def cmd_wave(cfg, c=None, out: Path = Path("out"), refine: bool = False) -> RunReport:
    from .speed import minimize_phi
    from . import wave as W

    model = cfg.build_model()
    cs = _speeds(cfg, c)
    c_star, lam_star = minimize_phi(model)
    if not cs:
        cs = (1.25 * c_star,)
    c = cs[0]
    params = W.build_params(model, c, c_star=c_star, lambda_star=lam_star)
    rf = 1 if refine else 0
    rep = RunReport()
    _header(rep, cfg)
    rep.add("c", float(c))
    rep.add("c_star", c_star)
    rep.add("Lambda_c", params.Lambda_c)

    lower_reaction = "f" if model.cooperative else "f-"
    grid = W.make_grid(params, L=cfg.wave_L, h=cfg.wave_h, refine=rf)
    lower = W.cooperative_wave(model, c, lower_reaction, params=params, grid=grid)
    sw = W.sandwich_wave(model, c, params=params, lower=lower)
    out.mkdir(parents=True, exist_ok=True)
    W.write_profile_csv(out / "wave_fminus.csv", lower.xi, lower.values)
    W.write_profile_csv(out / "wave_sandwich.csv", sw.xi, sw.values)

    rep.add("grid.h", grid.h)
    rep.add("grid.L", grid.L)
    rep.add("Lambda_h", lower.Lambda_h)
    for label, prof in (("fminus", lower), ("sandwich", sw)):
        rep.add(f"{label}.iterations", str(prof.iterations))
        rep.check(CheckResult(f"{label}.residual", prof.residual < 1e-6, 1e-6 - prof.residual,
                              "sup |T[u] - u|"))
        rep.add(f"{label}.plateau", prof.plateau())
        slope = W.tail_slope(prof)
        err = slope / params.Lambda_c - 1.0
        rep.check(CheckResult(f"{label}.decay_fit", abs(err) < 0.01, 0.01 - abs(err),
                              f"slope={slope:.9f} Lambda_c={params.Lambda_c:.9f}"))
        rep.add(f"{label}.ode_residual", format_float(W.ode_residual(prof, model)))
    mono_tol = W.MONO_ULP * np.finfo(float).eps * float(np.max(model.k_plus))
    rep.check(CheckResult("fminus.monotone_profile", W.is_nondecreasing(lower.values, mono_tol),
                          float(np.min(np.diff(lower.values, axis=1))) + mono_tol))
    pl = sw.plateau()
    box = float(min(np.min(pl - (model.k_minus - 1e-3)), np.min(model.k_plus + 1e-3 - pl)))
    rep.check(CheckResult("sandwich.plateau_box", box >= 0, box, "k- - 1e-3 <= u(L) <= k+ + 1e-3"))
    if not (lower.converged and sw.converged):
        raise ConvergenceError(
            f"wave iteration did not converge (residuals {lower.residual:.3e}, {sw.residual:.3e})\n"
            + rep.text()
        )
    return rep


def cmd_simulate(cfg, out: Path = Path("out"), refine: bool = False) -> RunReport:
    from .speed import minimize_phi
    from . import pde
    from .wave import write_profile_csv

    model = cfg.build_model()
    sim = cfg.sim.refined() if refine else cfg.sim
    c_star, _ = minimize_phi(model)
    rep = RunReport()
    _header(rep, cfg)
    rep.add("c_star", c_star)
    rep.add("dx", sim.dx)
    sw = pde.sandwich_check(sim, model)
    main = sw.runs[1]
    out.mkdir(parents=True, exist_ok=True)
    pde.write_trace_csv(out / "trace.csv", main.trace)
    write_profile_csv(out / "snapshot.csv", main.x, main.final, label="x")
    s = main.trace.fitted_speed
    rep.add("fitted_speed", s)
    rep.add("fitted_speed_stderr", format_float(main.trace.speed_stderr))
    rel = (s - c_star) / c_star
    rep.add("relative_error", format_float(rel))
    rep.check(CheckResult("speed.below_c_star_plus_3pct", s <= 1.03 * c_star, 1.03 * c_star - s))
    rep.add("plateau", main.trace.plateau)
    rep.check(sw.result())
    for frac in (0.5, 1.25):
        v = pde.spreading_probe(sim, model, frac * c_star, c_star, result=main)
        rep.check(v.result(f"probe[{frac:g}c*]"))
    return rep


def cmd_verify(cfg, out: Path = Path("out")) -> RunReport:
    from . import models as Mo, spectral as Sp, speed as S, wave as W

    rep = RunReport()
    _header(rep, cfg)
    try:
        model = cfg.build_model()
    except SpreadwaveError as exc:
        rep.check(CheckResult("model.construct", False, math.nan, str(exc)))
        return rep

    for r in Mo.check_H1(model):
        rep.check(r)
    if cfg.model_name == "ungulate":
        p = config_mod.ungulate_params(cfg)
        rep.check(CheckResult("params.d1_ge_d2", p.d1 >= p.d2, p.d1 - p.d2))
        rep.check(CheckResult("params.k1_gt_h_m", model.k[0] > p.h_m, float(model.k[0] - p.h_m)))
        for r in Mo.check_H4(p.h, Mo.default_h_grid(p), p.hp0):
            rep.check(r)
        for r in Mo.check_5_36(p):
            rep.check(r)
    for r in Sp.check_H2(model):
        rep.check(r)

    try:
        c_star, lam_star = S.minimize_phi(model)
        rep.add("c_star", c_star)
        for r in S.check_H3(model):
            rep.check(r)
        cs = cfg.c_values or (1.25 * c_star,)
        for c in cs:
            tag = f"c[{c:.6g}]"
            params = W.build_params(model, c, c_star=c_star, lambda_star=lam_star)
            grid = W.make_grid(params, L=cfg.wave_L, h=cfg.wave_h)
            dev = W.identity_6_45(params, model)
            rep.check(CheckResult(f"{tag}.identity_6_45", dev < 1e-12, 1e-12 - dev))
            m47 = W.inequality_6_47(params, model)
            rep.check(CheckResult(f"{tag}.inequality_6_47", m47 > 0, m47))
            const = 0.7 * np.ones((model.N, grid.M))
            T0 = W.apply_T(const, params, model, reaction="zero", grid=grid)
            kn = float(np.max(np.abs(T0 - const)))
            rep.check(CheckResult(f"{tag}.kernel_normalisation", kn < 1e-10, 1e-10 - kn))
            for reaction in (("f",) if model.cooperative else ("f-", "f+")):
                up = W.verify_upper(params, model, reaction, grid)
                rep.check(up.result(f"{tag}.upper[{reaction}]"))
            lo = W.find_q_and_verify_lower(params, model, grid=grid)
            rep.check(lo.result(f"{tag}.lower"))
        b = W.quadratic_lower_bound_coeffs(model)
        mq = W.verify_quadratic_bound(model, b)
        rep.check(CheckResult("quadratic_lower_bound", mq >= -1e-12, mq, "min over 1e4 random points"))
    except SpreadwaveError as exc:
        rep.check(CheckResult("pipeline", False, math.nan, f"{type(exc).__name__}: {exc}"))
    out.mkdir(parents=True, exist_ok=True)
    (out / "verify.txt").write_text(rep.text(), encoding="utf-8")
    return rep


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="spreadwave", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("speed", "minimal speed and per-c constants"),
        ("wave", "traveling-wave profiles"),
        ("simulate", "PDE run with front tracking"),
        ("verify", "hypothesis and identity ledger"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", required=True, type=Path)
        p.add_argument("--out", type=Path, default=Path("out"))
        if name in ("speed", "wave"):
            p.add_argument("--c", type=float, default=None, help="wave speed (overrides the config)")
        if name in ("wave", "simulate"):
            p.add_argument("--refine", action="store_true", help="halve the grid step")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_mod.load(args.config)
        if args.command == "speed":
            rep = cmd_speed(cfg, c=args.c, out=args.out)
        elif args.command == "wave":
            rep = cmd_wave(cfg, c=args.c, out=args.out, refine=args.refine)
        elif args.command == "simulate":
            rep = cmd_simulate(cfg, out=args.out, refine=args.refine)
        else:
            rep = cmd_verify(cfg, out=args.out)
    except OutOfRangeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except SpreadwaveError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    sys.stdout.write(rep.text())
    return EXIT_OK if rep.all_passed else EXIT_FAIL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
