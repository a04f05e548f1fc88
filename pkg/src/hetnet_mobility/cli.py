"""Command-line front end.

Global options may also come from the environment (handy in CI):
``HETNET_SEED``, ``HETNET_REPS``, ``HETNET_OUT``, ``HETNET_TOL``,
``HETNET_QUIET`` and ``HETNET_JOBS``. Explicit flags win over the
environment.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import __version__
from .errors import ConfigError
from .experiments import (
    EXIT_CONFIG,
    EXIT_NUMERICAL,
    EXIT_OK,
    NUMERICAL_ERRORS,
    compare,
    run_scenario,
)
from .model import MobilityProfile, QuadratureSpec
from .optimize import OPTIMIZER_QUAD, optimize_association_mobile
from .scenario import PRESETS, load_scenario, preset_scenarios

ENV_PREFIX = "HETNET_"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _u64(text):
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _positive_float(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


GLOBALS = (
    ("--seed", dict(type=_u64, help="RNG seed (unsigned 64-bit)")),
    ("--reps", dict(type=_positive_int, help="Monte Carlo replications per sweep point")),
    ("--out", dict(help="output directory for CSV files")),
    ("--tol", dict(type=_positive_float, help="absolute and relative quadrature tolerance")),
    ("--jobs", dict(type=_positive_int, help="threads for Monte Carlo blocks")),
)


def _add_globals(p, suppress):
    for flag, kw in GLOBALS:
        p.add_argument(flag, default=argparse.SUPPRESS if suppress else None, **kw)
    p.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS if suppress else False,
                   help="only print errors")


def build_parser():
    parser = _Parser(prog="hetnet-mobility",
                     description="Handoff rate, coverage and tier association for mobile users in Poisson networks.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _add_globals(parser, suppress=False)
    common = _Parser(add_help=False)
    _add_globals(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("analytic", parents=[common], help="analytic curves of scenario files")
    p.add_argument("scenarios", nargs="+", help="scenario file(s)")

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo curves of scenario files")
    p.add_argument("scenarios", nargs="+", help="scenario file(s)")
    p.add_argument("--event-log", metavar="DIR", help="also write replication-level event logs to DIR")

    p = sub.add_parser("optimize", parents=[common], help="mobility-aware association for a scenario's network")
    p.add_argument("scenario", help="scenario file or preset:<name>")
    p.add_argument("--speed", type=float, action="append",
                   help="displacement per unit time (repeatable; default: the scenario's sweep if it sweeps v)")
    p.add_argument("--model", choices=("approx", "exact", "joint"), help="handoff model for the objective")

    p = sub.add_parser("compare", parents=[common], help="z-scores between analytic and Monte Carlo curves")
    p.add_argument("analytic_csv")
    p.add_argument("mc_csv", nargs="?", help="second curve supplying the Monte Carlo columns")
    p.add_argument("--threshold", type=_positive_float, default=3.0, help="|z| flag threshold (default 3)")

    p = sub.add_parser("preset", parents=[common], help="run a figure preset (analytic and Monte Carlo)")
    p.add_argument("name", nargs="?", choices=sorted(PRESETS))
    p.add_argument("--list", action="store_true", help="list presets")
    p.add_argument("--dump", action="store_true", help="print the preset's scenario text instead of running")
    return parser


def _env_defaults(args):
    env = os.environ
    conv = {"seed": _u64, "reps": _positive_int, "out": str, "tol": _positive_float, "jobs": _positive_int}
    for name, fn in conv.items():
        if getattr(args, name, None) is None and env.get(ENV_PREFIX + name.upper()):
            raw = env[ENV_PREFIX + name.upper()]
            try:
                setattr(args, name, fn(raw))
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise ConfigError(f"{ENV_PREFIX}{name.upper()}={raw!r}: {exc}") from None
    if not getattr(args, "quiet", False) and env.get(ENV_PREFIX + "QUIET", "").lower() in ("1", "true", "yes"):
        args.quiet = True
    return args


def _quad(args):
    return None if args.tol is None else QuadratureSpec(abs_tol=args.tol, rel_tol=args.tol)


def _run(args, sources, mode, event_log=None):
    status = EXIT_OK
    for src in sources:
        code, results = run_scenario(src, out_dir=args.out, seed=args.seed, replications=args.reps,
                                     quad=_quad(args), mode=mode, jobs=args.jobs, event_log_dir=event_log)
        if code != EXIT_OK:
            return code
        for res in results:
            if not args.quiet:
                print(res.path)
    return status


def _optimize(args):
    scn = preset_scenarios(args.scenario[7:])[0] if args.scenario.startswith("preset:") else load_scenario(
        args.scenario)
    speeds = args.speed
    if speeds is None:
        speeds = list(scn.values) if scn.variable == "v" else [scn.mobility.speed]
    quad = _quad(args) or OPTIMIZER_QUAD
    model = args.model or scn.handoff_model
    rows = []
    for v in speeds:
        sol = optimize_association_mobile(scn.network, MobilityProfile(v, scn.mobility.direction), quad,
                                          seed=args.seed or 0, handoff_model=model)
        rows.append({
            "v": v,
            "association": np.round(sol.association, 12).tolist(),
            "bias": sol.bias.tolist(),
            "objective": sol.objective,
            "converged": sol.converged,
            "pinned_tiers": [k + 1 for k in sol.pinned],
        })
    text = json.dumps({"scenario": scn.name, "handoff_model": model, "results": rows}, indent=2)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, f"{scn.prefix}{scn.name}_optimize.json")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    print(text)
    return EXIT_OK


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args = _env_defaults(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s",
                        stream=sys.stderr)
    if args.quiet:
        logging.getLogger("hetnet_mobility").setLevel(logging.WARNING)
    try:
        if args.command == "analytic":
            return _run(args, args.scenarios, "analytic")
        if args.command == "simulate":
            return _run(args, args.scenarios, "mc", args.event_log)
        if args.command == "preset":
            if args.list or args.name is None:
                for name in sorted(PRESETS):
                    print(name)
                return EXIT_OK
            if args.dump:
                print("\n".join(t.strip() + "\n" for t in PRESETS[args.name]))
                return EXIT_OK
            return _run(args, [f"preset:{args.name}"], None)
        if args.command == "optimize":
            return _optimize(args)
        if args.command == "compare":
            report = compare(args.analytic_csv, args.mc_csv, threshold=args.threshold)
            print(json.dumps(report.as_dict(), indent=2))
            return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    parser.error(f"unknown command {args.command!r}")
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
