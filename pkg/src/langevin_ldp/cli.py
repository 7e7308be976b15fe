"""Command-line front end.

Exit codes: 0 success, 1 verdict false under ``--assert``, 2 configuration
error, 3 numerical error.  Reports are JSON on stdout unless ``--out DIR`` is
given (or ``LANGEVIN_LDP_OUT`` is set), in which case ``<command>.json`` and,
where the command produces curves, ``<command>.csv`` are written there.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__, kernels
from .config import ExperimentConfig
from .errors import ConfigurationError, NumericalError
from .gibbs import laplace_limit_curve
from .ldp import (DEFAULT_POINTS, preservation_small_noise, preservation_strong_dissipation,
                  rate_small_noise, rate_strong_dissipation)
from .montecarlo import ContinuousGaussian, SimulationConfig, decay_rate_estimate, run_chains
from .potentials import BUILTIN_KINDS, builtin_potential
from .repro import RECIPES, run_recipe
from .schemes import build_scheme, stability
from .sets import Annulus, BallComplement, Box
from .stationary import closed_form_sigma, lyapunov_sigma

__all__ = ["main", "run", "build_parser"]

OUT_ENV = "LANGEVIN_LDP_OUT"
_NO_CONFIG = ("config", "save_config", "command")


class _ArgError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _ArgError(f"{self.prog}: error: {message}")


# -- output -----------------------------------------------------------------

def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating, float)):
        x = float(x)
        if math.isfinite(x):
            return x
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, complex):
        return {"re": _jsonable(x.real), "im": _jsonable(x.imag)}
    return x


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_cell(v) for v in r])
    return buf.getvalue()


class _Result:
    def __init__(self, report, csv_header=None, csv_rows=None, verdict=None, text=None):
        self.report = report
        self.csv_header = csv_header
        self.csv_rows = csv_rows
        self.verdict = verdict
        self.text = text


def _emit(args, result, stdout):
    doc = dict(result.report)
    doc["command"] = args.command
    doc["config"] = _config_of(args).to_dict()["params"]
    if not args.no_meta:
        doc["meta"] = {"timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
                       "version": __version__, "backend": kernels.BACKEND}
    text = json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n"
    out_dir = args.out or os.environ.get(OUT_ENV)
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        stem = os.path.join(out_dir, args.command)
        with open(stem + ".json", "w", encoding="utf-8") as fh:
            fh.write(text)
        if result.csv_header is not None:
            with open(stem + ".csv", "w", encoding="utf-8") as fh:
                fh.write(_csv_text(result.csv_header, result.csv_rows))
        if result.text:
            stdout.write(result.text + "\n")
    elif args.csv and result.csv_header is not None:
        stdout.write(_csv_text(result.csv_header, result.csv_rows))
    else:
        if result.text:
            stdout.write(result.text + "\n")
        else:
            stdout.write(text)


# -- argument helpers -------------------------------------------------------

def _common(p):
    g = p.add_argument_group("output")
    g.add_argument("--out", help=f"output directory (env {OUT_ENV} also works)")
    g.add_argument("--csv", action="store_true", help="print the CSV curve instead of JSON")
    g.add_argument("--no-meta", action="store_true", help="omit timestamp and version metadata")
    g.add_argument("--threads", type=int, default=None, help="worker threads for Monte Carlo")
    g.add_argument("--config", help="JSON config supplying parameter defaults")
    g.add_argument("--save-config", help="write the effective config to this path")


def _scheme_args(p, with_h=True):
    p.add_argument("--scheme", choices=("em", "theta"), default="em")
    p.add_argument("--theta", type=float, default=0.5)
    p.add_argument("--nu", type=float, default=3.0)
    if with_h:
        p.add_argument("--h", type=float, default=0.01)


def _set_args(p):
    p.add_argument("--ball-complement", type=float, metavar="R", action="append", default=[])
    p.add_argument("--annulus", type=float, nargs=2, metavar=("R1", "R2"), action="append",
                   default=[])
    p.add_argument("--box", type=float, nargs=4, metavar=("P_LO", "P_HI", "Q_LO", "Q_HI"),
                   action="append", default=[])


def _sets_from(args):
    out = [BallComplement(r) for r in args.ball_complement]
    out += [Annulus(*a) for a in args.annulus]
    out += [Box(*b) for b in args.box]
    return out


def _scheme_from(args):
    return build_scheme(args.scheme, args.nu, args.theta if args.scheme == "theta" else None)


def _points_from(args):
    return [tuple(p) for p in args.point] if args.point else list(DEFAULT_POINTS)


def _potential_from(args):
    params = {}
    for item in args.param:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigurationError(f"--param expects key=value, got {item!r}")
        try:
            params[key] = float(value)
        except ValueError:
            raise ConfigurationError(f"--param {key}: {value!r} is not a number") from None
    return builtin_potential(args.potential, **params)


# -- subcommands ------------------------------------------------------------

def cmd_sigma(args):
    scheme = _scheme_from(args)
    out = {}
    if args.method in ("closed", "both"):
        out["closed"] = closed_form_sigma(scheme, args.eps, args.h).to_dict()
    if args.method in ("lyapunov", "both"):
        out["lyapunov"] = lyapunov_sigma(scheme, args.eps, args.h).to_dict()
    if args.method == "both":
        a = np.array(out["closed"]["sigma"])
        b = np.array(out["lyapunov"]["sigma"])
        out["rel_difference"] = float(np.linalg.norm(a - b) / np.linalg.norm(b))
    return _Result(out)


def cmd_stability(args):
    scheme = _scheme_from(args)
    if not (0 < args.h_min <= args.h_max) or args.points < 1:
        raise ConfigurationError("need 0 < h-min <= h-max and points >= 1")
    hs = np.geomspace(args.h_min, args.h_max, args.points)
    reps = [stability(scheme, h) for h in hs]
    rows = [r.as_row() for r in reps]
    report = {"scheme": scheme.name, "all_stable": all(r.stable for r in reps),
              "n_unstable": sum(not r.stable for r in reps),
              "first_unstable_h": next((r.h for r in reps if not r.stable), None)}
    header = ["h", "tr", "det", "re_lambda1", "im_lambda1", "re_lambda2", "im_lambda2", "stable"]
    return _Result(report, header, rows, verdict=report["all_stable"])


def cmd_rate(args):
    if args.limit == "small-noise":
        scheme = _scheme_from(args)
        rate = rate_small_noise(scheme, args.h)
        desc = {"limit": "small-noise", "scheme": scheme.name, "nu": args.nu, "h": args.h}
    else:
        rate = rate_strong_dissipation(args.theta, args.eps, args.h)
        desc = {"limit": "dissipation", "theta": args.theta, "eps": args.eps, "h": args.h}
    pts = _points_from(args)
    rows = [(p, q, float(rate(p, q))) for p, q in pts]
    desc["R"] = rate.R
    desc["domain_normals"] = rate.normals
    desc["values"] = [{"p": p, "q": q, "rate": v} for p, q, v in rows]
    return _Result(desc, ["p", "q", "rate"], rows)


_PRESERVE_HEADER = ["h_or_nu", "point_p", "point_q", "rate_value", "target", "abs_error"]


def cmd_preserve_small_noise(args):
    scheme = _scheme_from(args)
    grid = np.geomspace(args.h_max, args.h_min, args.h_points)
    rep = preservation_small_noise(scheme, _points_from(args), grid, tol=args.tol)
    return _Result(rep.to_dict(), _PRESERVE_HEADER, rep.rows(), verdict=rep.verdict)


def cmd_preserve_dissipation(args):
    grid = np.geomspace(args.nu_min, args.nu_max, args.nu_points)
    rep = preservation_strong_dissipation(args.theta, args.eps, args.h, _points_from(args),
                                          tol=args.tol, nu_grid=grid)
    return _Result(rep.to_dict(), _PRESERVE_HEADER, rep.rows(), verdict=rep.verdict)


def cmd_laplace(args):
    V = _potential_from(args)
    grid = np.geomspace(args.nu_min, args.nu_max, args.nu_points)
    c = laplace_limit_curve(V, grid, rel_tol=args.rel_tol)
    ok = c.converged(args.tol)
    report = {"potential": V.name, "params": V.params, "Z0": c.Z0,
              "last_value": float(c.values[-1]), "extrapolated": c.extrapolated,
              "tol": args.tol, "verdict": ok}
    return _Result(report, ["nu", "value", "Z0", "abs_error"], c.rows(), verdict=ok)


def cmd_simulate(args):
    scheme = _scheme_from(args)
    cfg = SimulationConfig(scheme, args.eps, args.h, args.steps, burn_in=args.burn_in,
                           n_chains=args.chains, seed=args.seed, init=tuple(args.init),
                           target_sets=tuple(_sets_from(args)))
    merged, parts = run_chains(cfg, threads=args.threads)
    report = {"config": cfg.to_dict(), "summary": merged.to_dict(),
              "chains": [p.to_dict() for p in parts]}
    try:
        S = closed_form_sigma(scheme, args.eps, args.h).sigma
    except NumericalError:
        S = lyapunov_sigma(scheme, args.eps, args.h).sigma
    report["stationary_sigma"] = S
    if np.linalg.norm(S) > 0:
        report["rel_error_vs_sigma"] = float(np.linalg.norm(merged.covariance - S)
                                             / np.linalg.norm(S))
    return _Result(report)


def cmd_decay(args):
    sets = _sets_from(args)
    if len(sets) != 1:
        raise ConfigurationError("decay needs exactly one target set")
    if args.source == "continuous":
        source = ContinuousGaussian(args.nu)
    else:
        source = _scheme_from(args)
    if args.axis == "eps":
        grid = np.geomspace(args.eps_min, args.eps_max, args.grid_points)
    else:
        grid = np.geomspace(args.nu_min, args.nu_max, args.grid_points)
    template = None
    if args.mode == "trajectory":
        template = SimulationConfig(source, 1.0, args.h, args.steps, seed=args.seed)
    est = decay_rate_estimate(source, grid, sets[0], axis=args.axis, n_samples=args.samples,
                              seed=args.seed, h=args.h, eps=args.eps, mode=args.mode,
                              config=template)
    ok = est.rel_error <= args.tol
    report = {**est.to_dict(), "tol": args.tol, "verdict": ok, "table": est.table}
    header = ["axis_value", "p_hat", "ci_low", "ci_high", "log_p_scaled"]
    return _Result(report, header, est.rows(), verdict=ok)


def cmd_repro(args):
    if args.id not in RECIPES:
        raise ConfigurationError(
            f"unknown experiment id {args.id!r}; expected one of {', '.join(RECIPES)}")
    table = run_recipe(args.id)
    return _Result(table.to_dict(), verdict=table.passed, text=table.format())


# -- parser -----------------------------------------------------------------

def build_parser():
    parser = _Parser(prog="langevin-ldp",
                     description="Invariant-measure large deviations for damped Langevin "
                                 "dynamics and linear schemes.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)

    p = sub.add_parser("sigma", help="stationary covariance of a linear scheme")
    _scheme_args(p)
    p.add_argument("--eps", type=float, default=1.0)
    p.add_argument("--method", choices=("closed", "lyapunov", "both"), default="both")
    p.set_defaults(func=cmd_sigma)

    p = sub.add_parser("stability", help="eigenvalues and stability over an h range")
    _scheme_args(p, with_h=False)
    p.add_argument("--h-min", type=float, default=1e-3)
    p.add_argument("--h-max", type=float, default=10.0)
    p.add_argument("--points", type=int, default=50)
    p.add_argument("--assert", dest="assert_", action="store_true")
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("rate", help="rate function of a scheme's invariant measure")
    _scheme_args(p)
    p.add_argument("--limit", choices=("small-noise", "dissipation"), default="small-noise")
    p.add_argument("--eps", type=float, default=1.0)
    p.add_argument("--point", type=float, nargs=2, action="append", metavar=("P", "Q"))
    p.set_defaults(func=cmd_rate)

    p = sub.add_parser("preserve-small-noise", help="small-noise preservation verdict")
    _scheme_args(p, with_h=False)
    p.add_argument("--h-min", type=float, default=1e-4)
    p.add_argument("--h-max", type=float, default=1e-1)
    p.add_argument("--h-points", type=int, default=10)
    p.add_argument("--point", type=float, nargs=2, action="append", metavar=("P", "Q"))
    p.add_argument("--tol", type=float, default=1e-2)
    p.add_argument("--assert", dest="assert_", action="store_true")
    p.set_defaults(func=cmd_preserve_small_noise)

    p = sub.add_parser("preserve-dissipation", help="strong-dissipation preservation verdict")
    p.add_argument("--theta", type=float, default=0.5)
    p.add_argument("--eps", type=float, default=1.0)
    p.add_argument("--h", type=float, default=0.1)
    p.add_argument("--nu-min", type=float, default=1e1)
    p.add_argument("--nu-max", type=float, default=1e6)
    p.add_argument("--nu-points", type=int, default=12)
    p.add_argument("--point", type=float, nargs=2, action="append", metavar=("P", "Q"))
    p.add_argument("--tol", type=float, default=1e-2)
    p.add_argument("--assert", dest="assert_", action="store_true")
    p.set_defaults(func=cmd_preserve_dissipation)

    p = sub.add_parser("laplace", help="Laplace limit curve of a builtin potential")
    p.add_argument("--potential", choices=BUILTIN_KINDS, default="quadratic")
    p.add_argument("--param", action="append", default=[], metavar="KEY=VALUE")
    p.add_argument("--nu-min", type=float, default=1.0)
    p.add_argument("--nu-max", type=float, default=1e3)
    p.add_argument("--nu-points", type=int, default=16)
    p.add_argument("--rel-tol", type=float, default=1e-10)
    p.add_argument("--tol", type=float, default=0.05)
    p.add_argument("--assert", dest="assert_", action="store_true")
    p.set_defaults(func=cmd_laplace)

    p = sub.add_parser("simulate", help="trajectory simulation of a linear scheme")
    _scheme_args(p)
    p.add_argument("--eps", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=1_000_000)
    p.add_argument("--burn-in", type=int, default=None)
    p.add_argument("--chains", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--init", type=float, nargs=2, default=[0.0, 0.0], metavar=("P0", "Q0"))
    _set_args(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("decay", help="empirical decay rate of set probabilities")
    _scheme_args(p)
    p.add_argument("--source", choices=("continuous", "scheme"), default="continuous")
    p.add_argument("--axis", choices=("eps", "nu"), default="eps")
    p.add_argument("--eps", type=float, default=None, help="fixed eps on the nu axis")
    p.add_argument("--eps-min", type=float, default=0.05)
    p.add_argument("--eps-max", type=float, default=0.5)
    p.add_argument("--nu-min", type=float, default=3.0)
    p.add_argument("--nu-max", type=float, default=30.0)
    p.add_argument("--grid-points", type=int, default=10)
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--mode", choices=("exact", "trajectory"), default="exact")
    p.add_argument("--steps", type=int, default=1_000_000, help="steps per grid value "
                   "in trajectory mode")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=0.1)
    p.add_argument("--assert", dest="assert_", action="store_true")
    _set_args(p)
    p.set_defaults(func=cmd_decay)

    p = sub.add_parser("repro", help="run a bundled experiment and print a pass/fail table")
    p.add_argument("id", metavar="ID", help="one of: " + ", ".join(RECIPES))
    p.add_argument("--assert", dest="assert_", action="store_true")
    p.set_defaults(func=cmd_repro)

    for action in sub.choices.values():
        _common(action)
    return parser


def _config_keys(subparser):
    return [a.dest for a in subparser._actions
            if a.dest not in _NO_CONFIG and a.dest not in ("help", "func")]


def _config_of(args):
    skip = set(_NO_CONFIG) | {"func", "out", "csv", "no_meta", "threads"}
    params = {k: v for k, v in vars(args).items() if k not in skip}
    return ExperimentConfig(args.command, params)


def _parse(parser, argv):
    args = parser.parse_args(argv)
    if args.config:
        cfg = ExperimentConfig.load(args.config)
        if cfg.command != args.command:
            raise ConfigurationError(
                f"config is for {cfg.command!r}, not {args.command!r}")
        subparser = parser._subparsers._group_actions[0].choices[args.command]
        cfg.validate(_config_keys(subparser))
        # config values become defaults; explicit flags still win
        subparser.set_defaults(**cfg.params)
        args = parser.parse_args(argv)
    return args


def run(argv=None, stdout=None, stderr=None):
    """Run the CLI and return the exit code."""
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    parser = build_parser()
    try:
        args = _parse(parser, argv)
        if args.threads is not None and args.threads < 1:
            raise ConfigurationError("--threads must be at least 1")
        if args.save_config:
            _config_of(args).save(args.save_config)
        result = args.func(args)
        _emit(args, result, stdout)
    except _ArgError as exc:
        stderr.write(f"{exc}\n")
        return 2
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except ConfigurationError as exc:
        stderr.write(f"configuration error: {exc}\n")
        return 2
    except (NumericalError, ArithmeticError) as exc:
        stderr.write(f"numerical error ({type(exc).__name__}): {exc}\n")
        return 3
    if getattr(args, "assert_", False) and result.verdict is False:
        stderr.write("verdict: false\n")
        return 1
    return 0


def main():
    sys.exit(run())
