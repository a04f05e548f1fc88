"""Scenario files: INI-style sections describing a network, a sweep and the
curves to compute.

Example::

    [scenario]
    name = speed
    kind = coverage
    [network]
    alpha = 3.5
    beta = 0.9
    [tier1]
    density = 1 per 1000m2
    power_dbm = 30
    threshold_db = 0
    [sweep]
    variable = v
    start = 0
    stop = 30
    step = 5
    [curve:dense]
    density = 10 per 1000m2

Unknown sections or keys are rejected with the offending line number.
"""

from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .model import FixedAngle, MobilityProfile, NetworkModel, TierParams, UniformAngle, db_to_linear
from .montecarlo import SPECTRUM_MODES, SimConfig

KINDS = {
    "handoff": ("v", "density"),
    "coverage": ("v", "density", "threshold_db", "beta"),
    "association": ("a2",),
    "optimize": ("v",),
}
CURVE_MODES = ("analytic", "mc", "both")
POLICIES = ("optimum", "stationary", "max_sir", "brute_force")
QUANTITIES = ("coverage", "association", "bias")

SECTION_KEYS = {
    "scenario": {"name", "kind", "curves", "handoff_model", "description"},
    "network": {"alpha", "beta", "spectrum"},
    "tier": {"density", "power_dbm", "threshold_db", "threshold", "bias"},
    "mobility": {"speed", "direction"},
    "sweep": {"variable", "values", "start", "stop", "step"},
    "montecarlo": {"replications", "seed", "window_scale", "window_radius", "antithetic",
                   "full_circle", "block_size", "jobs"},
    "output": {"dir", "prefix"},
    "curve": {"density", "direction", "beta", "threshold_db", "speed", "policy", "quantity",
              "handoff_model"},
}

_DENSITY_SUGAR = re.compile(r"^(.*?)\s*(?:per\s*|/\s*)1000\s*m(?:2|\^2|²)$", re.IGNORECASE)
_DEG = re.compile(r"^(.*?)\s*(?:deg|degrees|°)$", re.IGNORECASE)


@dataclass(frozen=True)
class Curve:
    name: str
    overrides: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Scenario:
    name: str
    kind: str
    network: NetworkModel
    mobility: MobilityProfile
    variable: str
    values: tuple
    curves: tuple
    sim: SimConfig
    mode: str = "both"
    handoff_model: str = "approx"
    out_dir: str = "out"
    prefix: str = ""
    description: str = ""

    def with_overrides(self, seed=None, replications=None, out_dir=None, jobs=None):
        sim = self.sim
        if seed is not None:
            sim = replace(sim, seed=int(seed))
        if replications is not None:
            sim = replace(sim, replications=int(replications))
        if jobs is not None:
            sim = replace(sim, n_jobs=int(jobs))
        return replace(self, sim=sim, out_dir=self.out_dir if out_dir is None else str(out_dir))


# ---------------------------------------------------------------- value parsers

def parse_density(text):
    """Per-m^2 density; ``"2 per 1000m2"`` or ``"2/1000m2"`` is read in figure units."""
    s = text.strip()
    m = _DENSITY_SUGAR.match(s)
    scale = 1e-3 if m else 1.0
    if m:
        s = m.group(1)
    return float(s) * scale


def parse_angle(text):
    """Radians, or degrees with an explicit ``deg`` suffix."""
    s = text.strip()
    m = _DEG.match(s)
    if m:
        return math.radians(float(m.group(1)))
    return float(s)


def parse_direction(text):
    s = text.strip().lower()
    if s == "uniform":
        return UniformAngle()
    if s == "radial":
        return FixedAngle(0.0)
    return FixedAngle(parse_angle(s))


def parse_bool(text):
    s = text.strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def parse_list(text, conv=float):
    """Comma-separated list; a trailing ``per 1000m2`` applies to every entry."""
    s = text.strip()
    m = _DENSITY_SUGAR.match(s)
    scale = 1e-3 if m else 1.0
    if m:
        s = m.group(1)
    items = [x for x in (p.strip() for p in s.split(",")) if x]
    return [conv(x) * scale for x in items]


# ---------------------------------------------------------------- parsing

def _line_index(text):
    """Map ``(section, key)`` and ``section`` to 1-based line numbers."""
    where = {}
    section = None
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            where.setdefault(section, no)
        elif section is not None:
            key = re.split(r"[=:]", line, maxsplit=1)[0].strip().lower()
            where.setdefault((section, key), no)
    return where


def _section_kind(name):
    if re.fullmatch(r"tier[1-9][0-9]*", name):
        return "tier"
    if name.startswith("curve:") and name[6:].strip():
        return "curve"
    return name


class _Reader:
    def __init__(self, parser, lines):
        self.p = parser
        self.lines = lines

    def err(self, section, key, msg):
        line = self.lines.get((section, key), self.lines.get(section))
        return ConfigError(msg, field=f"{section}.{key}" if key else section, line=line)

    def get(self, section, key, conv=str, default=None, required=False):
        if not self.p.has_section(section) or not self.p.has_option(section, key):
            if required:
                raise self.err(section, None, f"missing required key '{key}'")
            return default
        raw = self.p.get(section, key)
        try:
            return conv(raw)
        except (ValueError, TypeError) as exc:
            raise self.err(section, key, f"cannot parse {raw!r}: {exc}") from None


def parse_scenario(text, source="<scenario>") -> Scenario:
    """Parse scenario text. Raises :class:`ConfigError` with line diagnostics."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        line = getattr(exc, "lineno", None)
        raise ConfigError(f"malformed scenario: {exc.message if hasattr(exc, 'message') else exc}",
                          line=line) from None
    lines = _line_index(text)
    rd = _Reader(parser, lines)
    for section in parser.sections():
        kind = _section_kind(section)
        if kind not in SECTION_KEYS:
            raise ConfigError(f"unknown section [{section}]", field=section, line=lines.get(section))
        for key in parser[section]:
            if key not in SECTION_KEYS[kind]:
                raise rd.err(section, key, f"unknown key (allowed: {', '.join(sorted(SECTION_KEYS[kind]))})")

    name = rd.get("scenario", "name", default=Path(source).stem if source != "<scenario>" else "scenario")
    kind = rd.get("scenario", "kind", required=True).strip().lower()
    if kind not in KINDS:
        raise rd.err("scenario", "kind", f"unknown kind {kind!r}; expected one of {sorted(KINDS)}")
    mode = rd.get("scenario", "curves", default="both").strip().lower()
    if mode not in CURVE_MODES:
        raise rd.err("scenario", "curves", f"expected one of {CURVE_MODES}")
    handoff_model = rd.get("scenario", "handoff_model", default="approx").strip().lower()
    if handoff_model not in ("approx", "exact", "joint"):
        raise rd.err("scenario", "handoff_model", "expected approx, exact or joint")

    tier_sections = sorted((s for s in parser.sections() if _section_kind(s) == "tier"),
                           key=lambda s: int(s[4:]))
    if not tier_sections:
        raise ConfigError("at least one [tierN] section is required", field="tier1")
    expected = [f"tier{i}" for i in range(1, len(tier_sections) + 1)]
    if tier_sections != expected:
        raise ConfigError(f"tier sections must be numbered {', '.join(expected)}", field=tier_sections[-1],
                          line=lines.get(tier_sections[-1]))
    tiers = []
    for s in tier_sections:
        density = rd.get(s, "density", parse_density, required=True)
        power = rd.get(s, "power_dbm", float, required=True)
        if parser.has_option(s, "threshold_db") and parser.has_option(s, "threshold"):
            raise rd.err(s, "threshold", "give either threshold or threshold_db, not both")
        thr = rd.get(s, "threshold", float)
        if thr is None:
            thr = float(db_to_linear(rd.get(s, "threshold_db", float, default=0.0)))
        bias = rd.get(s, "bias", float, default=1.0)
        try:
            tiers.append(TierParams(density, power, thr, bias))
        except ValueError as exc:
            raise rd.err(s, None, str(exc)) from None
    spectrum = rd.get("network", "spectrum", default="orthogonal").strip().lower()
    if spectrum not in SPECTRUM_MODES:
        raise rd.err("network", "spectrum", f"expected one of {SPECTRUM_MODES}")
    try:
        net = NetworkModel(tuple(tiers), alpha=rd.get("network", "alpha", float, default=3.5),
                           beta=rd.get("network", "beta", float, default=0.0))
    except ValueError as exc:
        raise ConfigError(str(exc), field="network", line=lines.get("network")) from None

    try:
        mobility = MobilityProfile(rd.get("mobility", "speed", float, default=0.0),
                                   rd.get("mobility", "direction", parse_direction, default=UniformAngle()))
    except ValueError as exc:
        raise ConfigError(str(exc), field="mobility", line=lines.get("mobility")) from None

    variable = rd.get("sweep", "variable", required=True).strip().lower()
    if variable not in KINDS[kind]:
        raise rd.err("sweep", "variable", f"kind {kind!r} sweeps one of {KINDS[kind]}")
    conv = parse_density if variable == "density" else float
    if parser.has_option("sweep", "values"):
        if any(parser.has_option("sweep", k) for k in ("start", "stop", "step")):
            raise rd.err("sweep", "values", "give either values or start/stop/step")
        values = rd.get("sweep", "values", lambda t: parse_list(t))
    else:
        start = rd.get("sweep", "start", conv, required=True)
        stop = rd.get("sweep", "stop", conv, required=True)
        step = rd.get("sweep", "step", conv, required=True)
        if not step > 0:
            raise rd.err("sweep", "step", "step must be positive")
        n = int(math.floor((stop - start) / step + 1e-9)) + 1 if stop >= start else 0
        values = [float(np.round(start + i * step, 12)) for i in range(n)]
    if not values:
        raise ConfigError("sweep range is empty", field="sweep", line=lines.get("sweep"))
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ConfigError("sweep values must be strictly increasing", field="sweep.values",
                          line=lines.get(("sweep", "values"), lines.get("sweep")))
    _check_sweep_domain(kind, variable, values, net, lines)

    curves = []
    for s in parser.sections():
        if _section_kind(s) != "curve":
            continue
        ov = {}
        for key in parser[s]:
            ov[key] = rd.get(s, key, _CURVE_PARSERS[key])
        curves.append(Curve(s[6:].strip(), ov))
    if not curves:
        curves = [Curve(name, {})]
    names = [c.name for c in curves]
    if len(set(names)) != len(names):
        raise ConfigError("curve names must be unique", field="curve")
    for c in curves:
        _check_curve(kind, c, net, lines)

    seed = rd.get("montecarlo", "seed", int, default=0)
    try:
        sim = SimConfig(
            replications=rd.get("montecarlo", "replications", int, default=10_000),
            seed=seed,
            window_radius=rd.get("montecarlo", "window_radius", float),
            window_scale=rd.get("montecarlo", "window_scale", float, default=1.0),
            antithetic=rd.get("montecarlo", "antithetic", parse_bool, default=False),
            full_circle=rd.get("montecarlo", "full_circle", parse_bool, default=True),
            spectrum=spectrum,
            block_size=rd.get("montecarlo", "block_size", int, default=1024),
            n_jobs=rd.get("montecarlo", "jobs", int, default=1),
        )
    except ValueError as exc:
        raise ConfigError(str(exc), field="montecarlo", line=lines.get("montecarlo")) from None

    return Scenario(
        name=name.strip(), kind=kind, network=net, mobility=mobility, variable=variable,
        values=tuple(values), curves=tuple(curves), sim=sim, mode=mode, handoff_model=handoff_model,
        out_dir=rd.get("output", "dir", default="out"), prefix=rd.get("output", "prefix", default=""),
        description=rd.get("scenario", "description", default=""),
    )


def _choice(options):
    def conv(text):
        s = text.strip().lower()
        if s not in options:
            raise ValueError(f"expected one of {options}")
        return s
    return conv


_CURVE_PARSERS = {
    "density": parse_density,
    "direction": parse_direction,
    "beta": float,
    "threshold_db": float,
    "speed": float,
    "policy": _choice(POLICIES),
    "quantity": _choice(QUANTITIES),
    "handoff_model": _choice(("approx", "exact", "joint")),
}


def _check_sweep_domain(kind, variable, values, net, lines):
    where = dict(field="sweep.values", line=lines.get(("sweep", "values"), lines.get("sweep")))
    vals = np.asarray(values)
    if variable in ("v",) and np.any(vals < 0):
        raise ConfigError("speeds must be non-negative", **where)
    if variable == "density" and np.any(vals <= 0):
        raise ConfigError("densities must be positive", **where)
    if variable == "beta" and (np.any(vals < 0) or np.any(vals > 1)):
        raise ConfigError("beta must lie in [0, 1]", **where)
    if variable == "a2" and (np.any(vals <= 0) or np.any(vals >= 1)):
        raise ConfigError("association shares must lie strictly inside (0, 1)", **where)
    if kind in ("handoff", "coverage") and net.n_tiers != 1:
        raise ConfigError(f"kind {kind!r} describes a single tier; found {net.n_tiers} tiers", field="tier2",
                          line=lines.get("tier2"))
    if kind == "association" and net.n_tiers != 2:
        raise ConfigError("kind 'association' sweeps the second tier's share of a two-tier network",
                          field="tier1", line=lines.get("tier1"))


def _check_curve(kind, curve, net, lines):
    sec = f"curve:{curve.name}"
    allowed = {
        "handoff": {"density", "direction", "speed", "handoff_model"},
        "coverage": {"density", "direction", "beta", "threshold_db", "speed", "handoff_model"},
        "association": {"beta", "speed", "direction", "handoff_model"},
        "optimize": {"policy", "quantity", "beta", "direction", "handoff_model"},
    }[kind]
    for key, val in curve.overrides.items():
        if key not in allowed:
            raise ConfigError(f"not a curve option for kind {kind!r}", field=f"{sec}.{key}",
                              line=lines.get((sec, key)))
        if key == "beta" and not 0 <= val <= 1:
            raise ConfigError("beta must lie in [0, 1]", field=f"{sec}.beta", line=lines.get((sec, key)))
        if key in ("density", "speed") and not val >= 0:
            raise ConfigError(f"{key} must be non-negative", field=f"{sec}.{key}", line=lines.get((sec, key)))
    if kind == "optimize" and curve.overrides.get("policy") == "brute_force" and net.n_tiers != 2:
        raise ConfigError("brute-force search needs two tiers", field=f"{sec}.policy",
                          line=lines.get((sec, "policy")))


def load_scenario(path) -> Scenario:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read scenario file: {exc}") from None
    return parse_scenario(text, source=str(p))


# ---------------------------------------------------------------- presets
# Only caption-stated values are fixed; grids and unstated densities are ours.

PRESETS = {
    "fig3": ["""
[scenario]
name = fig3_speed
kind = handoff
handoff_model = approx
description = handoff rate against displacement per unit time, 1 AP per 1000 m2
[network]
alpha = 3.5
[tier1]
density = 1 per 1000m2
power_dbm = 30
[sweep]
variable = v
start = 1
stop = 20
step = 1
[montecarlo]
replications = 20000
seed = 1
[curve:radial]
direction = radial
[curve:uniform]
direction = uniform
""", """
[scenario]
name = fig3_density
kind = handoff
handoff_model = approx
description = handoff rate against AP density at v = 5
[network]
alpha = 3.5
[tier1]
density = 1 per 1000m2
power_dbm = 30
[mobility]
speed = 5
[sweep]
variable = density
values = 0.1, 0.2, 0.5, 1, 2, 5, 10 per 1000m2
[montecarlo]
replications = 20000
seed = 2
[curve:radial]
direction = radial
[curve:uniform]
direction = uniform
"""],
    "fig4": [f"""
[scenario]
name = fig4_beta{tag}
kind = coverage
handoff_model = approx
description = coverage against displacement, tau = 0 dB, beta = {beta}
[network]
alpha = 3.5
beta = {beta}
[tier1]
density = 1 per 1000m2
power_dbm = 30
threshold_db = 0
[sweep]
variable = v
values = 0, 5, 10, 15, 20, 25, 30
[montecarlo]
replications = 10000
seed = {seed}
[curve:sparse]
density = 0.1 per 1000m2
[curve:medium]
density = 1 per 1000m2
[curve:dense]
density = 10 per 1000m2
""" for tag, beta, seed in (("03", 0.3, 3), ("09", 0.9, 4))],
    "fig5": [f"""
[scenario]
name = fig5_beta{tag}
kind = coverage
handoff_model = approx
description = coverage against SIR threshold at v = 15, beta = {beta}
[network]
alpha = 3.5
beta = {beta}
[tier1]
density = 1 per 1000m2
power_dbm = 30
[mobility]
speed = 15
[sweep]
variable = threshold_db
start = -10
stop = 20
step = 5
[montecarlo]
replications = 10000
seed = {seed}
[curve:sparse]
density = 0.1 per 1000m2
[curve:medium]
density = 1 per 1000m2
[curve:dense]
density = 10 per 1000m2
""" for tag, beta, seed in (("03", 0.3, 5), ("09", 0.9, 6))],
    "fig6": ["""
[scenario]
name = fig6
kind = association
description = stationary two-tier coverage against the second tier's association share
[network]
alpha = 3.5
[tier1]
density = 0.1 per 1000m2
power_dbm = 46
threshold_db = 0
[tier2]
density = 1 per 1000m2
power_dbm = 20
threshold_db = 0
[sweep]
variable = a2
start = 0.02
stop = 0.98
step = 0.04
[montecarlo]
replications = 4000
seed = 7
[curve:coverage]
"""],
    "fig7": ["""
[scenario]
name = fig7
kind = optimize
handoff_model = approx
description = mobility-aware association in a two-tier network, beta = 0.9
[network]
alpha = 3.5
beta = 0.9
[tier1]
density = 0.1 per 1000m2
power_dbm = 46
threshold_db = 0
[tier2]
density = 10 per 1000m2
power_dbm = 20
threshold_db = 0
[sweep]
variable = v
values = 0, 5, 10, 15, 20, 25, 30
[montecarlo]
replications = 10000
seed = 8
[curve:optimum]
policy = optimum
[curve:optimum_v0]
policy = stationary
[curve:max_sir]
policy = max_sir
[curve:association]
policy = optimum
quantity = association
[curve:bias]
policy = optimum
quantity = bias
"""],
}


def preset_scenarios(name) -> list[Scenario]:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}", field="preset")
    return [parse_scenario(text, source=f"preset:{name}") for text in PRESETS[name]]
