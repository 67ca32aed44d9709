"""Command-line interface.

Exit codes: 0 success, 1 domain or configuration error, 2 failed verification,
3 quadrature failure.  Reports are JSON; grids and profiles are CSV.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .atoms import localize_and_decompose, validate_atom
from .battery import run_all, run_condition
from .config import Config, apply_overrides, load_config
from .covering import check_covering, make_covering
from .errors import BesselHardyError, ConfigError, DomainError, QuadratureError
from .grid import GridFunction
from .kernel import Branch, KernelSpec, kernel_product
from .maximal import h1_norm_estimate
from .measure import measure_ball_comparable, measure_ball_multidim_comparable, measure_balls_exact
from .quadrature import QuadratureSpec
from .report import render
from .serialize import (atom_from_dict, csv_text, decomposition_to_dict, dumps, envelope,
                        grid_from_csv, grid_to_csv, load_report)
from .specfun import bessel_i_eval, crossover

EXIT_OK, EXIT_DOMAIN, EXIT_VERIFY, EXIT_QUAD = 0, 1, 2, 3


def _floats(text):
    try:
        return tuple(float(v) for v in str(text).replace(";", ",").split(",") if v.strip())
    except ValueError as exc:
        raise ConfigError(f"expected a comma-separated list of numbers, got {text!r}") from exc


def _flavors(text):
    alias = {"c": "classical", "e": "exotic"}
    return tuple(alias.get(v.strip().lower(), v.strip().lower()) for v in text.split(",") if v.strip())


def _window(text):
    v = _floats(text)
    if len(v) != 2 or any(int(x) != x for x in v):
        raise ConfigError("--window takes two integer levels, e.g. -3,3")
    return (int(v[0]), int(v[1]))


def _common(p):
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--nu", help="comma-separated parameters, e.g. 0.5,1")
    p.add_argument("--flavors", help="comma-separated classical|exotic (or c|e)")
    p.add_argument("--covering", choices=["dyadic", "box", "cylinder", "QB"])
    p.add_argument("--window", help="level range lo,hi")
    p.add_argument("--gamma", type=float)
    p.add_argument("--delta", help="comma-separated delta values")
    p.add_argument("--kappa", type=float)
    p.add_argument("--depth", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int)
    p.add_argument("--out", help="output file (default: standard output)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bessel-hardy",
                                     description="Bessel heat kernels, coverings, atoms and H^1 checks")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("specfun", help="special functions")
    sps = sp.add_subparsers(dest="action", required=True)
    p = sps.add_parser("eval", help="evaluate I_tau(x)")
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--x", required=True, help="comma-separated arguments")
    _common(p)

    mp = sub.add_parser("measure", help="power-weight measure queries")
    mps = mp.add_subparsers(dest="action", required=True)
    p = mps.add_parser("ball", help="exact and comparable ball measure")
    p.add_argument("--x", required=True, help="centre, one coordinate per axis")
    p.add_argument("--r", type=float, required=True)
    _common(p)

    kp = sub.add_parser("kernel", help="heat kernels")
    kps = kp.add_subparsers(dest="action", required=True)
    p = kps.add_parser("eval", help="evaluate the product kernel")
    p.add_argument("--spec", choices=["direct", "conjugated", "classical"], default="direct",
                   help="direct: flavors decide; conjugated: K on exotic axes; classical: W^cls")
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    _common(p)

    cp = sub.add_parser("covering", help="admissible coverings")
    cps = cp.add_subparsers(dest="action", required=True)
    p = cps.add_parser("dump", help="list the cells of the level window")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--type", dest="ctype", choices=["dyadic", "box", "cylinder", "QB"])
    _common(p)
    p = cps.add_parser("check", help="validate the covering axioms")
    p.add_argument("--type", dest="ctype", choices=["dyadic", "box", "cylinder", "QB"])
    p.add_argument("--points", type=int, default=2000)
    _common(p)

    ap = sub.add_parser("atoms", help="atomic decompositions")
    aps = ap.add_subparsers(dest="action", required=True)
    p = aps.add_parser("decompose", help="decompose a grid function")
    p.add_argument("--input", required=True, help="grid CSV")
    _common(p)
    p = aps.add_parser("validate", help="validate atoms from a JSON file")
    p.add_argument("--input", required=True, help="atom or decomposition JSON")
    _common(p)

    p = sub.add_parser("h1norm", help="H^1 norm estimate of a grid function")
    p.add_argument("--input", required=True, help="grid CSV")
    p.add_argument("--quad", action="append", default=[], metavar="KEY=VALUE",
                   help="quadrature setting override (repeatable)")
    p.add_argument("--t-max", type=float, help="restrict the sup to t <= t_max")
    p.add_argument("--profile", help="CSV file for the maximal-function profile")
    _common(p)

    p = sub.add_parser("verify", help="condition checks")
    p.add_argument("which", nargs="?", help="'all' runs the full battery")
    p.add_argument("--condition", help="A0|A1|A2|A1p|A2p|a3a4|lemma24|supT|prop42|all")
    p.add_argument("--no-timestamp", action="store_true")
    _common(p)

    p = sub.add_parser("report", help="render a JSON report as markdown and CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--csv-dir", help="directory for CSV tables")
    _common(p)
    return parser


def resolve_config(args) -> Config:
    cfg = load_config(args.config)
    nu = _floats(args.nu) if args.nu else None
    return apply_overrides(
        cfg, nu=nu, flavors=_flavors(args.flavors) if args.flavors else None,
        covering=getattr(args, "covering", None), levels=_window(args.window) if args.window else None,
        gamma=args.gamma, deltas=_floats(args.delta) if args.delta else None, kappa=args.kappa,
        depth=args.depth, seed=args.seed, threads=args.threads, out=args.out)


def _emit(text: str, path: str | None, stdout):
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        stdout.write(text)


def _read(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc


# ---------------------------------------------------------------------------
# subcommands

def cmd_specfun(args, cfg, out):
    res = []
    for x in _floats(args.x):
        ev = bessel_i_eval(args.tau, x)
        res.append({"tau": args.tau, "x": x, "value": ev.value, "scaled": ev.scaled,
                    "regime": ev.regime, "rel_error": ev.rel_error, "crossover": ev.crossover})
    _emit(dumps({"schema": 1, "kind": "specfun", "result": res}), cfg.out, out)
    return EXIT_OK


def cmd_measure(args, cfg, out):
    nu = cfg.nu_vector
    x = np.array(_floats(args.x))
    if x.size != nu.dim:
        raise DomainError(f"--x needs {nu.dim} coordinates")
    if np.any(x <= 0) or not args.r > 0:
        raise DomainError("ball needs x > 0 and r > 0")
    exact = float(measure_balls_exact(nu, x[None, :], args.r)[0])
    if nu.dim == 1:
        comp = measure_ball_comparable(nu.effective[0], float(x[0]), args.r)
    else:
        comp = measure_ball_multidim_comparable(nu, x, args.r)
    res = {"nu": nu.to_dict(), "x": x.tolist(), "r": args.r, "exact": exact, "comparable": comp,
           "ratio": exact / comp if comp else math.inf}
    _emit(dumps({"schema": 1, "kind": "measure_ball", "result": res}), cfg.out, out)
    return EXIT_OK


def _kernel_spec(cfg, which):
    nu = cfg.nu_vector
    if which == "classical":
        return KernelSpec.classical(*nu.values)
    if which == "conjugated":
        return KernelSpec.conjugated_route(nu)
    return KernelSpec.direct(nu)


def cmd_kernel(args, cfg, out):
    spec = _kernel_spec(cfg, args.spec)
    x, y = np.array(_floats(args.x)), np.array(_floats(args.y))
    if x.size != spec.dim or y.size != spec.dim:
        raise DomainError(f"--x and --y need {spec.dim} coordinates")
    val = kernel_product(spec, args.t, x, y)
    z = x * y / (2 * args.t)
    scaled = [bool(zi >= crossover(v)) for zi, v in zip(z, spec.nus)]
    res = {"value": val, "branch": [b.value for b in spec.branches], "scaled_path_used": scaled,
           "spec": spec.to_dict(), "t": args.t, "x": x.tolist(), "y": y.tolist()}
    _emit(dumps({"schema": 1, "kind": "kernel_eval", "result": res}), cfg.out, out)
    return EXIT_OK


def _covering(cfg, ctype):
    kind = ctype or cfg.covering
    dim = len(cfg.nu)
    if kind in ("cylinder", "QB") and cfg.d2 == 0:
        # no exotic axis: the cylinder construction degenerates to the box product
        kind = "dyadic" if dim == 1 else "box"
    return make_covering(kind, dim=dim, d1=cfg.d1, d2=cfg.d2, kappa=cfg.kappa)


def cmd_covering(args, cfg, out):
    cov = _covering(cfg, args.ctype)
    if args.action == "dump":
        block = cov.window_cells(cfg.levels)
        if args.format == "csv":
            d = cov.dim
            header = ([f"x{i + 1}_lo" for i in range(d)] + [f"x{i + 1}_hi" for i in range(d)]
                      + [f"tag{i + 1}" for i in range(block.tags.shape[1])])
            rows = [list(map(float, block.lower[i])) + list(map(float, block.upper[i]))
                    + [int(v) for v in block.tags[i]] for i in range(len(block))]
            _emit(csv_text(header, rows), cfg.out, out)
        else:
            cells = [{"lower": block.lower[i].tolist(), "upper": block.upper[i].tolist(),
                      "tags": block.tags[i].tolist()} for i in range(len(block))]
            _emit(dumps(envelope("covering", {"covering": cov.describe(), "levels": list(cfg.levels),
                                              "cells": cells}, cfg, timestamp=False)), cfg.out, out)
        return EXIT_OK
    rep = check_covering(cov, levels=tuple(cfg.levels), n_points=args.points, seed=cfg.seed)
    _emit(dumps(envelope("covering_check", rep, cfg, timestamp=False)), cfg.out, out)
    return EXIT_OK if rep.passed else EXIT_VERIFY


def _load_grid(path, cfg) -> GridFunction:
    f = grid_from_csv(_read(path), cfg.nu_vector)
    if cfg.depth:
        k = 2 ** cfg.depth
        f = f.refine([np.concatenate([np.linspace(a, b, k + 1) for a, b in zip(e[:-1], e[1:])])
                      for e in f.edges])
    return f


def cmd_atoms(args, cfg, out):
    nu = cfg.nu_vector
    if args.action == "decompose":
        f = _load_grid(args.input, cfg)
        cov = _covering(cfg, None)
        if cov.dim != nu.dim:
            raise ConfigError("covering dimension does not match nu")
        dec = localize_and_decompose(f, cov, nu)
        res = decomposition_to_dict(dec.decomposition)
        res["reconstruction_error"] = dec.reconstruction_error()
        res["lambda0"] = list(dec.lambda0)
        _emit(dumps(envelope("decomposition", res, cfg, timestamp=False)), cfg.out, out)
        return EXIT_OK
    doc = load_report(_read(args.input))
    body = doc.get("result", doc)
    terms = body.get("terms", [body]) if isinstance(body, dict) else body
    cov = _covering(cfg, None)
    certs = []
    for t in terms:
        a = atom_from_dict(t)
        certs.append(validate_atom(a, cov, a.nu).to_dict())
    ok = all(c["valid"] for c in certs)
    _emit(dumps(envelope("atom_validation", {"valid": ok, "atoms": certs}, cfg, timestamp=False)),
          cfg.out, out)
    return EXIT_OK if ok else EXIT_VERIFY


def _quad(cfg, items):
    d = cfg.quadrature.to_dict()
    for it in items:
        if "=" not in it:
            raise ConfigError(f"--quad expects KEY=VALUE, got {it!r}")
        k, v = it.split("=", 1)
        if k not in d:
            raise ConfigError(f"unknown quadrature setting {k!r}")
        d[k] = type(d[k])(float(v)) if isinstance(d[k], int) else float(v)
    return QuadratureSpec(**d)


def cmd_h1norm(args, cfg, out):
    nu = cfg.nu_vector
    f = _load_grid(args.input, cfg)
    quad = _quad(cfg, args.quad)
    est = h1_norm_estimate(f, nu, quad, t_max=args.t_max, threads=cfg.threads)
    res = est.to_dict()
    res["input_l1"] = f.l1_norm()
    if args.profile:
        from .maximal import maximal_norm
        r = maximal_norm(KernelSpec.direct(nu), f, quad, args.t_max, keep_profile=True,
                         threads=cfg.threads)
        X, M = r.profile
        mesh = np.stack(np.meshgrid(*X, indexing="ij"), -1).reshape(-1, len(X))
        header = [f"x{i + 1}" for i in range(len(X))] + ["maximal"]
        rows = [list(map(float, p)) + [float(m)] for p, m in zip(mesh, M.reshape(-1))]
        _emit(csv_text(header, rows), args.profile, out)
    _emit(dumps(envelope("h1norm", res, cfg, timestamp=False)), cfg.out, out)
    return EXIT_OK


def cmd_verify(args, cfg, out):
    name = args.condition or args.which
    if name is None:
        raise ConfigError("verify needs --condition NAME or 'all'")
    if args.condition and args.which and args.condition != args.which:
        raise ConfigError("conflicting condition names")
    if name == "all":
        reps = run_all(cfg)
    else:
        reps = run_condition(cfg, name)
    passed = all(r.passed for r in reps)
    doc = envelope("condition_reports", {"passed": passed, "reports": reps}, cfg,
                   timestamp=not args.no_timestamp)
    _emit(dumps(doc), cfg.out, out)
    return EXIT_OK if passed else EXIT_VERIFY


def cmd_report(args, cfg, out):
    doc = load_report(_read(args.input))
    md, tables = render(doc)
    if args.csv_dir:
        os.makedirs(args.csv_dir, exist_ok=True)
        for name, text in tables.items():
            _emit(text, os.path.join(args.csv_dir, name), out)
    _emit(md, cfg.out, out)
    return EXIT_OK


COMMANDS = {"specfun": cmd_specfun, "measure": cmd_measure, "kernel": cmd_kernel,
            "covering": cmd_covering, "atoms": cmd_atoms, "h1norm": cmd_h1norm,
            "verify": cmd_verify, "report": cmd_report}


# flags whose values may start with a minus sign (e.g. ``--window -3,3``)
_SIGNED = ("--nu", "--window", "--delta", "--x", "--y", "--tau", "--gamma", "--t", "--r")


def _join_signed(argv):
    out, it = [], iter(argv)
    for tok in it:
        if tok in _SIGNED:
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    argv = _join_signed(sys.argv[1:] if argv is None else list(argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_DOMAIN
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](args, cfg, stdout)
    except QuadratureError as exc:
        stderr.write(f"error: quadrature did not converge: {exc} (achieved {exc.achieved:.3g})\n")
        return EXIT_QUAD
    except (BesselHardyError, ValueError, OverflowError) as exc:
        stderr.write(f"error: {exc}\n")
        return EXIT_DOMAIN


def main():
    sys.exit(run())
