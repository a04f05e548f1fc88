"""Sweep evaluation, CSV emission and analytic-vs-simulation comparison."""

from __future__ import annotations

import csv
import logging
import math
import os
import sys
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .coverage import coverage_mobile_single_tier
from .errors import (
    ConfigError,
    DomainError,
    EmptyWindowError,
    InfeasibleBiasError,
    OptimizerError,
    QuadratureError,
)
from .handoff import handoff_rate_approx, handoff_rate_exact, handoff_rate_radial
from .model import DEFAULT_QUAD, FixedAngle, MobilityProfile, QuadratureSpec, db_to_linear, single_tier_network
from .montecarlo import simulate, summarize, write_event_log
from .multitier import association_probabilities, coverage_multitier_mobile, optimal_association_stationary, solve_bias
from .optimize import OPTIMIZER_QUAD, MobileCoverageObjective, brute_force_association, optimize_association_mobile
from .scenario import Scenario, load_scenario, preset_scenarios

log = logging.getLogger(__name__)

CSV_COLUMNS = ("x", "analytic", "mc_estimate", "mc_se", "n_reps", "seed")
EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3
NUMERICAL_ERRORS = (QuadratureError, OptimizerError, InfeasibleBiasError, EmptyWindowError, DomainError,
                    FloatingPointError)


class NumericalFailure(RuntimeError):
    def __init__(self, message, cause):
        super().__init__(message)
        self.cause = cause


@dataclass
class CurveResult:
    scenario: str
    curve: str
    rows: list
    path: Path | None = None


@dataclass
class _Point:
    analytic: float | None = None
    mc: object = None


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def curve_file_name(scn: Scenario, curve_name):
    stem = scn.name if len(scn.curves) == 1 and curve_name == scn.name else f"{scn.name}_{curve_name}"
    return f"{scn.prefix}{stem}.csv"


class _Evaluator:
    def __init__(self, scn: Scenario, quad: QuadratureSpec | None, event_log_dir=None):
        self.scn = scn
        self.quad = quad or DEFAULT_QUAD
        self.opt_quad = quad or OPTIMIZER_QUAD
        self.event_log_dir = event_log_dir
        self._solutions = {}

    def want(self, part):
        return self.scn.mode in (part, "both")

    def _log_events(self, records, curve, i):
        if self.event_log_dir is None:
            return
        d = Path(self.event_log_dir)
        d.mkdir(parents=True, exist_ok=True)
        write_event_log(records, d / f"{self.scn.prefix}{self.scn.name}_{curve.name}_{i:03d}_events.csv")

    def _mc(self, event, net, profile, curve, i, tier=None, beta=None):
        records = simulate(net, profile, self.scn.sim, need_sir=event not in ("handoff", "tier"))
        self._log_events(records, curve, i)
        return summarize(records, event, tier, beta)

    def point(self, curve, i, x) -> _Point:
        kind = self.scn.kind
        return getattr(self, f"_{kind}")(curve, i, x)

    def _single(self, curve, x):
        scn, ov = self.scn, curve.overrides
        t = scn.network.tiers[0]
        density = x if scn.variable == "density" else ov.get("density", t.density)
        speed = x if scn.variable == "v" else ov.get("speed", scn.mobility.speed)
        direction = ov.get("direction", scn.mobility.direction)
        thr = t.threshold
        if scn.variable == "threshold_db":
            thr = float(db_to_linear(x))
        elif "threshold_db" in ov:
            thr = float(db_to_linear(ov["threshold_db"]))
        beta = x if scn.variable == "beta" else ov.get("beta", scn.network.beta)
        net = single_tier_network(density, thr, scn.network.alpha, beta, t.power_dbm)
        return net, MobilityProfile(speed, direction), ov.get("handoff_model", scn.handoff_model)

    def _handoff(self, curve, i, x):
        net, profile, model = self._single(curve, x)
        lam = net.tiers[0].density
        pt = _Point()
        if self.want("analytic"):
            d = profile.direction
            if isinstance(d, FixedAngle) and d.theta == 0.0:
                pt.analytic = handoff_rate_radial(lam, profile.speed)
            elif isinstance(d, FixedAngle) or model != "approx":
                pt.analytic = handoff_rate_exact(lam, profile, self.quad)
            else:
                pt.analytic = handoff_rate_approx(lam, profile.speed, self.quad)
        if self.want("mc"):
            pt.mc = self._mc("handoff", net, profile, curve, i)
        return pt

    def _coverage(self, curve, i, x):
        net, profile, model = self._single(curve, x)
        t = net.tiers[0]
        pt = _Point()
        if self.want("analytic"):
            pt.analytic = coverage_mobile_single_tier(t.density, profile, net.beta, t.threshold, net.alpha,
                                                      self.quad, model)
        if self.want("mc"):
            pt.mc = self._mc("composite", net, profile, curve, i, beta=net.beta)
        return pt

    def _association(self, curve, i, x):
        scn, ov = self.scn, curve.overrides
        net = scn.network.with_beta(ov.get("beta", scn.network.beta))
        profile = MobilityProfile(ov.get("speed", scn.mobility.speed), ov.get("direction", scn.mobility.direction))
        model = ov.get("handoff_model", scn.handoff_model)
        assoc = np.array([1.0 - x, x])
        pt = _Point()
        if self.want("analytic"):
            pt.analytic = coverage_multitier_mobile(net, assoc, profile, self.quad, model)
        if self.want("mc"):
            biased = net.with_biases(solve_bias(net, assoc))
            pt.mc = self._mc("composite", biased, profile, curve, i, beta=net.beta)
        return pt

    def _solution(self, net, profile, policy, model):
        key = (profile, policy, net.beta, model)
        if key in self._solutions:
            return self._solutions[key]
        k = net.n_tiers
        obj = MobileCoverageObjective(net, profile, self.opt_quad, model)
        if policy == "optimum":
            sol = optimize_association_mobile(net, profile, self.opt_quad, handoff_model=model)
            assoc, bias = sol.association, sol.bias
            sim_bias = sol.bias if not sol.pinned else sol.clamped_bias
            value = sol.objective
        elif policy == "brute_force":
            share, value, _, _ = brute_force_association(net, profile, quad=self.opt_quad, handoff_model=model)
            assoc = np.array([1.0 - share, share])
            clamped = np.clip(assoc, 1e-6, 1.0)
            clamped /= clamped.sum()
            bias = sim_bias = solve_bias(net, clamped)
        else:
            if policy == "stationary":
                assoc = optimal_association_stationary(net)
                bias = solve_bias(net, assoc)
            else:
                bias = np.ones(k)
                assoc = association_probabilities(net.with_biases(bias))
            sim_bias = bias
            value = obj(assoc)
        self._solutions[key] = (np.asarray(assoc), np.asarray(bias), np.asarray(sim_bias), float(value))
        return self._solutions[key]

    def _optimize(self, curve, i, x):
        scn, ov = self.scn, curve.overrides
        net = scn.network.with_beta(ov.get("beta", scn.network.beta))
        profile = MobilityProfile(x, ov.get("direction", scn.mobility.direction))
        model = ov.get("handoff_model", scn.handoff_model)
        policy = ov.get("policy", "optimum")
        quantity = ov.get("quantity", "coverage")
        assoc, bias, sim_bias, value = self._solution(net, profile, policy, model)
        last = net.n_tiers - 1
        pt = _Point()
        if self.want("analytic"):
            pt.analytic = {"coverage": value, "association": assoc[last], "bias": bias[last]}[quantity]
        if self.want("mc") and quantity != "bias":
            biased = net.with_biases(sim_bias)
            if quantity == "coverage":
                pt.mc = self._mc("composite", biased, profile, curve, i, beta=net.beta)
            else:
                pt.mc = self._mc("tier", biased, profile, curve, i, tier=last)
        return pt


def evaluate_scenario(scn: Scenario, quad: QuadratureSpec | None = None, event_log_dir=None) -> list:
    """Compute every curve of ``scn``; raises :class:`NumericalFailure` with the
    failing curve and sweep point."""
    ev = _Evaluator(scn, quad, event_log_dir)
    results = []
    for curve in scn.curves:
        rows = []
        for i, x in enumerate(scn.values):
            log.info("%s/%s: %s = %g", scn.name, curve.name, scn.variable, x)
            try:
                with np.errstate(over="ignore", under="ignore"):
                    pt = ev.point(curve, i, x)
            except NUMERICAL_ERRORS as exc:
                raise NumericalFailure(
                    f"scenario '{scn.name}', curve '{curve.name}', {scn.variable} = {x:g}: "
                    f"{type(exc).__name__}: {exc}", exc) from exc
            mc = pt.mc
            rows.append((
                x, pt.analytic,
                None if mc is None else mc.estimate,
                None if mc is None else mc.stderr,
                None if mc is None else mc.n + mc.discarded,
                None if mc is None else mc.seed,
            ))
        results.append(CurveResult(scn.name, curve.name, rows))
    return results


def write_curve(result: CurveResult, path):
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for row in result.rows:
            w.writerow([_fmt(v) for v in row])
    result.path = path
    return path


def run_scenarios(scenarios, out_dir=None, quad=None, event_log_dir=None):
    """Evaluate all scenarios first, then write their CSVs in order, so a
    failure leaves no partial output. Returns the curve results."""
    computed = []
    for scn in scenarios:
        computed.append((scn, evaluate_scenario(scn, quad, event_log_dir)))
    written = []
    for scn, results in computed:
        d = Path(out_dir if out_dir is not None else scn.out_dir)
        d.mkdir(parents=True, exist_ok=True)
        for res in results:
            write_curve(res, d / curve_file_name(scn, res.curve))
            written.append(res)
    return written


def run_scenario(source, out_dir=None, seed=None, replications=None, quad=None, mode=None,
                 jobs=None, event_log_dir=None, err=None):
    """Run a scenario file or ``preset:<name>``; returns ``(exit_code, results)``.

    Exit code 2 signals a configuration error (nothing is written), 3 a
    numerical failure.
    """
    err = err or _stderr
    try:
        if isinstance(source, Scenario):
            scenarios = [source]
        elif str(source).startswith("preset:"):
            scenarios = preset_scenarios(str(source)[7:])
        else:
            scenarios = [load_scenario(source)]
        scenarios = [s.with_overrides(seed, replications, out_dir, jobs) for s in scenarios]
        if mode is not None:
            scenarios = [replace(s, mode=mode) for s in scenarios]
    except ConfigError as exc:
        err(f"config error: {exc}")
        return EXIT_CONFIG, []
    except ValueError as exc:
        err(f"config error: {exc}")
        return EXIT_CONFIG, []
    try:
        results = run_scenarios(scenarios, out_dir, quad, event_log_dir)
    except NumericalFailure as exc:
        err(f"numerical failure: {exc}")
        return EXIT_NUMERICAL, []
    return EXIT_OK, results


def _stderr(msg):
    print(msg, file=sys.stderr)


# ---------------------------------------------------------------- comparison

def read_curve(path):
    """Rows of a curve CSV as a dict of float arrays (blank cells -> NaN)."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or not set(("x", "analytic", "mc_estimate", "mc_se")) <= set(
                    reader.fieldnames):
                raise ConfigError(f"{path}: not a curve CSV (need columns {', '.join(CSV_COLUMNS)})")
            rows = list(reader)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None

    def col(name):
        return np.array([float(r[name]) if r.get(name, "") not in ("", None) else math.nan for r in rows])

    return {name: col(name) for name in ("x", "analytic", "mc_estimate", "mc_se")}


@dataclass(frozen=True)
class ComparisonReport:
    x: np.ndarray
    z: np.ndarray
    max_abs_z: float
    fraction_over: float
    threshold: float

    @property
    def flagged(self):
        return self.x[np.abs(self.z) > self.threshold]

    def as_dict(self):
        return {
            "n_points": int(self.x.size),
            "max_abs_z": self.max_abs_z,
            "fraction_abs_z_over_threshold": self.fraction_over,
            "threshold": self.threshold,
            "flagged_x": [float(v) for v in self.flagged],
            "points": [{"x": float(a), "z": float(b)} for a, b in zip(self.x, self.z)],
        }


def z_scores(analytic, mc_estimate, mc_se):
    analytic, est, se = (np.asarray(a, dtype=float) for a in (analytic, mc_estimate, mc_se))
    diff = analytic - est
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(se > 0, diff / se, np.where(diff == 0, 0.0, np.copysign(np.inf, diff)))
    return z


def compare(analytic_curve, mc_curve=None, threshold=3.0, rtol=1e-9) -> ComparisonReport:
    """z-scores ``(analytic - mc) / se`` for curves given as dicts or CSV paths.

    With one argument the curve's own analytic and simulation columns are
    compared. Raises :class:`ConfigError` when the sweep grids differ.
    """
    a = read_curve(analytic_curve) if isinstance(analytic_curve, (str, os.PathLike)) else analytic_curve
    m = a if mc_curve is None else (read_curve(mc_curve) if isinstance(mc_curve, (str, os.PathLike)) else mc_curve)
    xa, xm = np.asarray(a["x"], float), np.asarray(m["x"], float)
    if xa.shape != xm.shape or not np.allclose(xa, xm, rtol=rtol, atol=0.0):
        raise ConfigError("sweep grids of the two curves do not match")
    if np.any(np.isnan(a["analytic"])) or np.any(np.isnan(m["mc_estimate"])) or np.any(np.isnan(m["mc_se"])):
        raise ConfigError("curves lack analytic or simulation values at some sweep points")
    z = z_scores(a["analytic"], m["mc_estimate"], m["mc_se"])
    absz = np.abs(z)
    return ComparisonReport(xa, z, float(absz.max()) if absz.size else 0.0,
                            float(np.mean(absz > threshold)) if absz.size else 0.0, float(threshold))

