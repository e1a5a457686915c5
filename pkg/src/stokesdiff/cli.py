"""Command line front end: ``stokesdiff <command> ...``.

Exit codes: 0 ok, 1 parse/input error, 2 not mild, 3 unsupported formal
structure, 4 certification or verification failed.
"""
from __future__ import annotations

import argparse
import csv
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import models
from .diffmod import formal_datum, mildness_report
from .errors import (
    CertificationFailed,
    ClusteredEigenvalues,
    ExpansionError,
    NonMildExponent,
    NotMild,
    ParseError,
    RamificationCapExceeded,
    StokesDiffError,
    UnsupportedFormalStructure,
)
from .exponents import Arc, normalize_sigma, stokes_rows
from .parser import read_system
from .sectorial import (
    QuadratureParams,
    SolveParams,
    branch_log,
    flat_sections,
    lambda_op,
    ray_points,
)
from .series import MAX_RAMIFICATION
from .special import gamma_ratio
from .stokes import CocycleParams, cocycle_from_solutions, default_covering, rh_assemble

EXIT_OK, EXIT_PARSE, EXIT_NOT_MILD, EXIT_UNSUPPORTED, EXIT_CERT = 0, 1, 2, 3, 4
ENV_OUTDIR = "STOKESDIFF_OUTDIR"

DEFAULTS = {
    "smin": 10.0,
    "smax": 40.0,
    "n": 31,
    "theta": [0.0],
    "seed_radius": 60.0,
    "tol": 1e-8,
    "mu_tol": 1e-3,
    "ramification_cap": MAX_RAMIFICATION,
    "outdir": ".",
}


@dataclass
class RunConfig:
    subcommand: str
    path: str | None = None
    truncation: int | None = None
    values: dict = field(default_factory=dict)
    sources: dict = field(default_factory=dict)

    def __getattr__(self, name):
        vals = self.__dict__.get("values", {})
        if name in vals:
            return vals[name]
        raise AttributeError(name)

    def header(self) -> str:
        lines = [f"# stokesdiff {self.subcommand}" + (f" {self.path}" if self.path else "")]
        if self.truncation is not None:
            lines.append(f"# truncation = {self.truncation} (file)")
        for k in sorted(self.values):
            lines.append(f"# {k} = {self.values[k]} ({self.sources[k]})")
        return "\n".join(lines)


def _validate(cfg: RunConfig):
    for k in ("tol", "mu_tol", "smin", "smax", "seed_radius"):
        if not cfg.values[k] > 0:
            raise ValueError(f"{k} must be positive")
    if cfg.values["smax"] <= cfg.values["smin"]:
        raise ValueError("smax must exceed smin")
    if cfg.values["n"] < 2:
        raise ValueError("n must be at least 2")
    cfg.values["theta"] = [normalize_sigma(th) for th in cfg.values["theta"]]


def build_config(args, file_params: dict | None = None, truncation: int | None = None) -> RunConfig:
    """Flags override ``param`` statements of the input file, which override defaults."""
    cfg = RunConfig(args.command, getattr(args, "path", None), truncation)
    file_params = file_params or {}
    env = os.environ.get(ENV_OUTDIR)
    for k, d in DEFAULTS.items():
        flag = getattr(args, k, None)
        if flag is not None:
            v, src = flag, "flag"
        elif k in file_params:
            fv = file_params[k]
            v = [fv.real] if k == "theta" else (int(fv.real) if k in ("n", "ramification_cap") else fv.real)
            src = "file"
        elif k == "outdir" and env:
            v, src = env, "env"
        else:
            v, src = d, "default"
        cfg.values[k] = v
        cfg.sources[k] = src
    _validate(cfg)
    return cfg


def _stem(path) -> str:
    return Path(path).stem


def _outdir(cfg: RunConfig) -> Path:
    d = Path(cfg.outdir)
    d.mkdir(parents=True, exist_ok=True)
    return d


def _load(args):
    sf = read_system(args.path)
    cfg = build_config(args, sf.params, sf.truncation)
    return sf, cfg


# ---------------------------------------------------------------------------
# commands


def cmd_check_mild(args, out) -> int:
    sf, cfg = _load(args)
    print(cfg.header(), file=out)
    ok, msg = mildness_report(sf.system())
    print(msg if ok else f"not mild: {msg}", file=out)
    return EXIT_OK if ok else EXIT_NOT_MILD


def _formal(sf, out):
    ok, msg = mildness_report(sf.system())
    if not ok:
        raise NotMild(msg)
    fd = formal_datum(sf.system())
    if sf.formal is not None and not _same_formal(fd, sf.formal):
        print("warning: the formal datum in the file differs from the computed one", file=out)
    return fd


def _same_formal(a, b) -> bool:
    return len(a.blocks) == len(b.blocks) and all(
        x.a.allclose(y.a, 1e-8) and np.allclose(x.G, y.G, atol=1e-8) for x, y in zip(a.blocks, b.blocks)
    )


def cmd_formal(args, out) -> int:
    sf, cfg = _load(args)
    print(cfg.header(), file=out)
    fd = _formal(sf, out)
    print(fd.to_text(), file=out)
    return EXIT_OK


DIRECTIONS_HEADER = ["kind", "i", "j", "sigma", "theta", "dominant_l", "sign_change", "arc_start", "arc_end"]


def cmd_directions(args, out) -> int:
    sf, cfg = _load(args)
    print(cfg.header(), file=out)
    fd = _formal(sf, out)
    exps = fd.exponents
    rows = [["special", "", "", 0.0, 0.0, "", "", "", ""], ["special", "", "", math.pi, math.pi, "", "", "", ""]]
    for i in range(len(exps)):
        for j in range(i + 1, len(exps)):
            if (exps[i] - exps[j]).is_zero():
                continue
            for sg, th, l, sc in stokes_rows(exps[i], exps[j]):
                rows.append(["stokes", i, j, sg, th, l, sc, "", ""])
    for k, arc in enumerate(default_covering(fd).arcs):
        rows.append(["arc", k, "", "", "", "", "", arc.start, arc.end])
    path = _outdir(cfg) / f"{_stem(args.path)}_directions.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(DIRECTIONS_HEADER)
        w.writerows(rows)
    w = csv.writer(out)
    w.writerow(DIRECTIONS_HEADER)
    w.writerows(rows)
    print(f"# wrote {path}", file=out)
    return EXIT_OK


def _solve_ray(sysm, fd, theta: float, cfg: RunConfig):
    arc = Arc(theta - 0.25, theta + 0.25)
    p = SolveParams(cfg.smin, cfg.smax, cfg.n, sigma=-theta, seed_radius=max(cfg.seed_radius, 1.5 * cfg.smax), on_stokes="shift")
    return flat_sections(sysm, fd, arc, p)


def cmd_solve(args, out) -> int:
    sf, cfg = _load(args)
    print(cfg.header(), file=out)
    fd = _formal(sf, out)
    sysm = sf.system()
    outdir = _outdir(cfg)
    worst = 0.0
    for theta in cfg.theta:
        sol = _solve_ray(sysm, fd, theta, cfg)
        for wmsg in sol.warnings:
            print(f"warning: {wmsg}", file=out)
        path = outdir / f"{_stem(args.path)}_theta{theta:+.4f}.csv"
        sol.samples.write_csv(path)
        print(f"theta={theta:+.6f} sigma={sol.samples.sigma:+.6f} residual={sol.residual:.3e} -> {path}", file=out)
        worst = max(worst, sol.residual)
    ok = worst < cfg.tol
    print(f"max residual {worst:.3e} {'<' if ok else '>='} tol {cfg.tol:.1e}", file=out)
    return EXIT_OK if ok else EXIT_CERT


def cmd_cocycle(args, out) -> int:
    sf, cfg = _load(args)
    print(cfg.header(), file=out)
    fd = _formal(sf, out)
    p = CocycleParams(seed_radius=cfg.seed_radius)
    sc = cocycle_from_solutions(sf.system(), fd, params=p, strict=True)
    fm = rh_assemble(fd, sc)
    path = fm.write(_outdir(cfg), _stem(args.path))
    print("overlap,theta_lo,theta_hi,sigma,block_i,block_j,status,mu", file=out)
    for row in sc.summary_rows():
        o, lo, hi, sg, bi, bj, st, mu = row
        print(f"{o},{lo:.6f},{hi:.6f},{sg:.6f},{bi},{bj},{getattr(st, 'name', st)},{mu:.4g}", file=out)
    print(f"# wrote {path}", file=out)
    return EXIT_OK


PLOT_SCRIPT = """# gnuplot script written by stokesdiff plot-data
set datafile separator ','
set key autotitle columnhead
set logscale y
set xlabel '|s|'
set ylabel '|y|'
plot {plots}
"""


def cmd_plot_data(args, out) -> int:
    sf, cfg = _load(args)
    print(cfg.header(), file=out)
    fd = _formal(sf, out)
    sysm = sf.system()
    # rays are independent; files are written afterwards in a fixed order
    with ThreadPoolExecutor() as ex:
        sols = list(ex.map(lambda th: _solve_ray(sysm, fd, th, cfg), cfg.theta))
    outdir = _outdir(cfg)
    plots = []
    for theta, sol in zip(cfg.theta, sols):
        name = f"{_stem(args.path)}_plot_theta{theta:+.4f}.csv"
        sol.samples.write_csv(outdir / name)
        for j in range(sol.samples.values.reshape(len(sol.samples), -1).shape[1]):
            c = 3 + 2 * j
            plots.append(f"'{name}' using (sqrt($1**2+$2**2)):(sqrt(${c}**2+${c + 1}**2)) with lines title 'theta={theta:+.3f} y{j}'")
        print(f"theta={theta:+.6f} residual={sol.residual:.3e} -> {outdir / name}", file=out)
    gp = outdir / f"{_stem(args.path)}_plot.gp"
    gp.write_text(PLOT_SCRIPT.format(plots=", \\\n     ".join(plots)))
    print(f"# wrote {gp}", file=out)
    return EXIT_OK


# verify ---------------------------------------------------------------------


def _check(out, name: str, value: float, tol: float) -> bool:
    ok = bool(value < tol)
    print(f"{'PASS' if ok else 'FAIL'} {name}: {value:.3e} (tol {tol:.0e})", file=out)
    return ok


def verify_gamma(alpha: complex, out) -> bool:
    alpha = complex(alpha)
    oks = []
    worst = 0.0
    for sigma in (0.0, 0.5, -0.5):
        for s in ray_points(sigma, 5.0, 40.0, 50):
            g, g1 = gamma_ratio(s, alpha), gamma_ratio(s + 1, alpha)
            worst = max(worst, abs((1 + alpha / s) * g1 - g) / abs(g))
    oks.append(_check(out, f"Gamma(s)/Gamma(s+{alpha}) recurrence", worst, 1e-10))
    sysm = models.b_alpha(alpha)
    fd = formal_datum(sysm)
    sol = flat_sections(sysm, fd, Arc(-0.25, 0.25), SolveParams(10.0, 40.0, 31, sigma=0.0))
    ref = np.array([gamma_ratio(s, alpha) for s in sol.samples.s])
    dev = float(np.max(np.abs(sol.samples.values[:, 0, 0] - ref) / np.abs(ref)))
    oks.append(_check(out, "flat section vs Gamma ratio", dev, 1e-8))
    oks.append(_check(out, "flat section residual", sol.residual, 1e-10))
    return all(oks)


def verify_egamma(out) -> bool:
    sysm = models.e_gamma()
    worst = 0.0
    for s in ray_points(0.2, 5.0, 30.0, 50):
        ls = complex(branch_log(s, 0.2))
        h = models.e_gamma_section(s, ls)
        h1 = models.e_gamma_section(s + 1, ls + complex(np.log1p(1 / s)))
        worst = max(worst, abs(sysm(s, ls)[0, 0] * h1 - h) / abs(h))
    return _check(out, "s^(-s) Gamma(s) recurrence", worst, 1e-10)


def verify_lambda(direction: float, out) -> bool:
    """Trivial module, ``f = exp(-s)`` on the ray ``theta = direction``."""
    from .diffmod import FormalBlock
    from .exponents import Exponent

    sigma = -direction
    pts = ray_points(sigma, 2.0, 12.0, 20)
    block = FormalBlock(Exponent.zero(), [[0.0]])
    f = lambda z: np.exp(-np.asarray(z))
    L = lambda_op(block, f, pts, QuadratureParams())
    tele = -np.exp(-pts) / (1 - math.exp(-1.0))
    dev = float(np.max(np.abs(L.values - tele) / np.abs(tele)))
    nab = float(np.max(np.abs(L.next_values - L.values - f(pts)) / np.abs(f(pts))))
    a = _check(out, "Lambda(f) vs telescoping sum", dev, 1e-6)
    b = _check(out, "nabla Lambda(f) - f", nab, 1e-8)
    return a and b


def cmd_verify(args, out) -> int:
    print(f"# stokesdiff verify {args.example}", file=out)
    if args.example == "gamma":
        ok = verify_gamma(complex(args.alpha.replace("i", "j")), out)
    elif args.example == "egamma":
        ok = verify_egamma(out)
    else:
        ok = verify_lambda(args.direction, out)
    print("pass" if ok else "fail", file=out)
    return EXIT_OK if ok else EXIT_CERT


# ---------------------------------------------------------------------------


def _add_config_flags(p: argparse.ArgumentParser, rays: bool = False):
    p.add_argument("path", help=".dsys input file")
    p.add_argument("--outdir", default=None, help=f"output directory (default: ${ENV_OUTDIR} or .)")
    p.add_argument("--seed-radius", dest="seed_radius", type=float, default=None)
    p.add_argument("--tol", type=float, default=None, help="residual tolerance")
    p.add_argument("--mu-tol", dest="mu_tol", type=float, default=None, help="growth-fit threshold")
    if rays:
        p.add_argument("--theta", type=float, action="append", default=None, help="t-direction of the sampling ray; repeatable")
        p.add_argument("--smin", type=float, default=None)
        p.add_argument("--smax", type=float, default=None)
        p.add_argument("--n", type=int, default=None, help="samples per ray")


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="stokesdiff", description="Stokes data of mild difference systems at infinity.")
    sub = ap.add_subparsers(dest="command", required=True)
    _add_config_flags(sub.add_parser("check-mild", help="is A(0) invertible"))
    _add_config_flags(sub.add_parser("formal", help="formal datum (exponents and residues)"))
    _add_config_flags(sub.add_parser("directions", help="Stokes directions and arc decomposition (CSV)"))
    _add_config_flags(sub.add_parser("solve", help="flat sections on rays (CSV)"), rays=True)
    _add_config_flags(sub.add_parser("cocycle", help="certified Stokes cocycle"))
    _add_config_flags(sub.add_parser("plot-data", help="CSV and gnuplot script for |y| along rays"), rays=True)
    v = sub.add_parser("verify", help="built-in closed-form checks")
    v.add_argument("example", choices=["gamma", "egamma", "lambda"])
    v.add_argument("--alpha", default="0.5", help="complex alpha, e.g. 0.3+0.2i")
    v.add_argument("--direction", type=float, default=0.3, help="t-direction theta of the ray")
    return ap


COMMANDS = {
    "check-mild": cmd_check_mild,
    "formal": cmd_formal,
    "directions": cmd_directions,
    "solve": cmd_solve,
    "cocycle": cmd_cocycle,
    "plot-data": cmd_plot_data,
    "verify": cmd_verify,
}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = make_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args, out)
    except (ParseError, ExpansionError, NonMildExponent) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except NotMild as e:
        print(f"not mild: {e}", file=out)
        return EXIT_NOT_MILD
    except CertificationFailed as e:
        print(f"certification failed: {e}", file=out)
        return EXIT_CERT
    except (UnsupportedFormalStructure, RamificationCapExceeded, ClusteredEigenvalues) as e:
        block = getattr(e, "block", None)
        print(f"unsupported formal structure: {e}" + (f" (block {block})" if block is not None else ""), file=out)
        return EXIT_UNSUPPORTED
    except StokesDiffError as e:
        print(f"unsupported: {type(e).__name__}: {e}", file=out)
        return EXIT_UNSUPPORTED
    except (OSError, ValueError) as e:
        # unreadable input or an invalid configuration value
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
