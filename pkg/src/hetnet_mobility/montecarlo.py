"""Monte Carlo oracle for handoff, association and SIR coverage.

Each replication realises every tier as a Poisson process in a disc around
the user (at the origin), associates the user by maximum biased average
received power, draws unit-mean exponential (Rayleigh power) fading, moves
the user by ``v`` and checks geometrically whether another AP of the serving
tier is now closer than the serving AP.

Random streams are keyed by ``(seed, block, tier, purpose)`` through
``SeedSequence`` feeding a Philox counter-based generator; blocks have a
fixed size, so results do not depend on how blocks are scheduled across
threads.
"""

from __future__ import annotations

import csv
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyWindowError
from .handoff import truncation_radius
from .model import FixedAngle, MobilityProfile, NetworkModel, linear_to_db

SPECTRUM_MODES = ("orthogonal", "shared")
_POINTS, _ANNULUS, _USER, _ANNULUS_ANGLE = 0, 1, 2, 3
# annulus points come in cells of this many expected APs, drawn outwards
_CELL_MASS = 64.0
MIN_REPLICATIONS = 100
DISCARD_WARN = 0.05


@dataclass(frozen=True)
class SimConfig:
    """Monte Carlo settings.

    Each tier is realised in a core disc that fixes association and handoff
    (see :func:`core_window`) plus an annulus of ``sir_margin`` mean AP
    spacings that only feeds the interference. ``window_scale`` multiplies the
    full radius and ``window_radius`` (metres) replaces it for all tiers.
    Core and annulus use separate streams, so enlarging the window only adds
    far-away APs to an otherwise identical realization.
    """

    replications: int = 10_000
    seed: int = 0
    window_radius: float | None = None
    window_scale: float = 1.0
    antithetic: bool = False
    full_circle: bool = True
    spectrum: str = "orthogonal"
    block_size: int = 1024
    n_jobs: int = 1
    sir_margin: float = 20.0

    def __post_init__(self):
        if int(self.replications) < 1:
            raise ValueError("replication count must be >= 1")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.spectrum not in SPECTRUM_MODES:
            raise ValueError(f"spectrum must be one of {SPECTRUM_MODES}")
        if self.window_scale <= 0 or (self.window_radius is not None and self.window_radius <= 0):
            raise ValueError("window size must be positive")
        if self.antithetic and self.block_size % 2:
            raise ValueError("antithetic sampling needs an even block size")


def core_window(density, speed):
    """Radius holding the nearest AP except with probability 1e-12, widened by
    ``2 v`` so the displaced user's competitor disc stays inside."""
    return truncation_radius(density) + 2.0 * speed


def window_radii(net: NetworkModel, cfg: SimConfig, speed: float, need_sir=True):
    """Returns ``(core, radii)`` per tier: the core radius and the one simulated."""
    base = np.array([core_window(t.density, speed) for t in net.tiers])
    if not need_sir:
        radii = base if cfg.window_radius is None else np.minimum(base, cfg.window_radius)
    elif cfg.window_radius is not None:
        radii = np.full(net.n_tiers, float(cfg.window_radius))
        worst = float(np.exp(-math.pi * net.tiers[0].density * max(cfg.window_radius - speed, 0.0) ** 2))
        if worst >= 1e-6:
            raise ValueError(
                f"window radius {cfg.window_radius} m too small: sparsest-tier nearest AP lies beyond "
                f"radius - v with probability {worst:.2e}"
            )
    else:
        spacing = 1.0 / np.sqrt(net.densities)
        radii = (base + cfg.sir_margin * spacing) * cfg.window_scale
    return base, radii


def _stream(seed, block, tier, purpose):
    ss = np.random.SeedSequence([int(seed), int(block), int(tier), int(purpose)])
    return np.random.Generator(np.random.Philox(ss))


# ---------------------------------------------------------------- single replication

@dataclass
class Realization:
    """One snapshot: per-tier AP coordinates (m, user at the origin) and fading."""

    points: list
    gains: list
    window: np.ndarray
    user: np.ndarray = field(default_factory=lambda: np.zeros(2))


@dataclass(frozen=True)
class ServingAP:
    tier: int
    index: int
    distance: float


def _disc_points(rng, density, radius, inner=0.0, count=None):
    area = math.pi * (radius * radius - inner * inner)
    n = rng.poisson(density * area) if count is None else count
    rr = np.sqrt(inner * inner + rng.random(n) * (radius * radius - inner * inner))
    ph = 2.0 * math.pi * rng.random(n)
    return rr, ph


def sample_realization(net: NetworkModel, cfg: SimConfig, rng: np.random.Generator, speed=0.0) -> Realization:
    """Independent Poisson tiers in discs around the user, with exponential gains."""
    _, radii = window_radii(net, cfg, speed)
    points, gains = [], []
    for t, w in zip(net.tiers, radii):
        rr, ph = _disc_points(rng, t.density, w)
        points.append(np.column_stack([rr * np.cos(ph), rr * np.sin(ph)]))
        gains.append(rng.exponential(1.0, rr.size))
    return Realization(points, gains, radii)


def associate(real: Realization, net: NetworkModel) -> ServingAP:
    """Nearest AP of each tier, then the tier with the largest biased mean power."""
    best = None
    for k, (pts, t) in enumerate(zip(real.points, net.tiers)):
        if len(pts) == 0:
            continue
        d = np.hypot(pts[:, 0] - real.user[0], pts[:, 1] - real.user[1])
        i = int(np.argmin(d))
        metric = t.power_mw * net.reference_loss * (d[i] / net.r0) ** (-net.alpha) * t.bias
        if best is None or metric > best[0]:
            best = (metric, ServingAP(k, i, float(d[i])))
    if best is None:
        raise EmptyWindowError("no access point of any tier inside the window")
    return best[1]


def sir(real: Realization, serving: ServingAP, net: NetworkModel, spectrum="orthogonal") -> float:
    """Received SIR at the user; ``inf`` when there is no interferer."""
    def received(k):
        pts = real.points[k]
        d = np.hypot(pts[:, 0] - real.user[0], pts[:, 1] - real.user[1])
        return net.tiers[k].power_mw * net.reference_loss * real.gains[k] * (d / net.r0) ** (-net.alpha)

    own = received(serving.tier)
    signal = own[serving.index]
    interference = own.sum() - signal
    if spectrum == "shared":
        interference += sum(received(k).sum() for k in range(net.n_tiers) if k != serving.tier)
    if interference <= 0.0:
        return math.inf
    return float(signal / interference)


def displacement(ap_xy, speed, theta):
    """New user position after moving ``speed`` at ``theta`` from the direction
    pointing away from the serving AP (counter-clockwise rotation)."""
    ap_xy = np.asarray(ap_xy, dtype=float)
    away = -ap_xy / np.hypot(*ap_xy)
    c, s = math.cos(theta), math.sin(theta)
    return speed * np.array([c * away[0] - s * away[1], s * away[0] + c * away[1]])


def draw_theta(profile: MobilityProfile, rng, size=None, full_circle=True):
    if isinstance(profile.direction, FixedAngle):
        return np.full(size, profile.direction.theta) if size is not None else profile.direction.theta
    span = 2.0 * math.pi if full_circle else math.pi
    return span * rng.random(size)


def move_and_detect_handoff(real: Realization, serving: ServingAP, profile: MobilityProfile,
                            rng=None, theta=None, full_circle=True) -> bool:
    """True when another AP of the serving tier is closer to the displaced user
    than the serving AP."""
    if theta is None:
        theta = draw_theta(profile, rng, full_circle=full_circle)
    pts = real.points[serving.tier]
    ap = pts[serving.index] - real.user
    new = real.user + displacement(ap, profile.speed, float(theta))
    big_r = math.hypot(*(pts[serving.index] - new))
    d = np.hypot(pts[:, 0] - new[0], pts[:, 1] - new[1])
    d[serving.index] = np.inf
    return bool(np.any(d < big_r))


# ---------------------------------------------------------------- vectorised engine

@dataclass
class _TierBlock:
    # core points, grouped by realization in ascending order
    owner: np.ndarray
    rr: np.ndarray
    ph: np.ndarray
    gain: np.ndarray
    counts: np.ndarray
    starts: np.ndarray
    # interference-only annulus in generation order; angles are drawn on demand
    far_owner: np.ndarray
    far_rr: np.ndarray
    far_gain: np.ndarray
    far_counts: np.ndarray
    key: tuple = ()


@dataclass
class Block:
    """A batch of realizations generated from one set of keyed streams."""

    index: int
    n_reps: int
    n_real: int
    tiers: list
    core: np.ndarray
    radii: np.ndarray
    theta: np.ndarray

    def realization(self, j) -> Realization:
        pts, gains = [], []
        for tb in self.tiers:
            sl = slice(tb.starts[j], tb.starts[j] + tb.counts[j])
            rr, ph, g = tb.rr[sl], tb.ph[sl], tb.gain[sl]
            if tb.far_rr.size:
                far_ph = 2.0 * math.pi * _stream(*tb.key, _ANNULUS_ANGLE).random(tb.far_rr.size)
                fsl = tb.far_owner == j
                rr = np.concatenate([rr, tb.far_rr[fsl]])
                ph = np.concatenate([ph, far_ph[fsl]])
                g = np.concatenate([g, tb.far_gain[fsl]])
            pts.append(np.column_stack([rr * np.cos(ph), rr * np.sin(ph)]))
            gains.append(g)
        return Realization(pts, gains, self.radii)


def _annulus(rng, density, inner, outer, n_real):
    """Poisson points between ``inner`` and ``outer``, tagged by realization.

    Points are generated cell by cell in units of expected count, outwards,
    and the last cell is cut at ``outer``: a larger ``outer`` reproduces every
    point of a smaller one and only adds new ones further out.
    """
    mass = density * math.pi * (outer * outer - inner * inner)
    owners, pos, gains = [], [], []
    for c in range(int(math.ceil(mass / _CELL_MASS))):
        n = rng.poisson(_CELL_MASS, n_real)
        m = int(n.sum())
        p = (c + rng.random(m)) * _CELL_MASS
        g = rng.exponential(1.0, m)
        keep = p < mass
        owners.append(np.repeat(np.arange(n_real), n)[keep])
        pos.append(p[keep])
        gains.append(g[keep])
    owner = np.concatenate(owners)
    rr = np.sqrt(inner * inner + np.concatenate(pos) / (density * math.pi))
    return owner, rr, np.concatenate(gains), np.bincount(owner, minlength=n_real)


def _sample_block(net, profile, cfg, block, n_reps, need_sir=True):
    base, radii = window_radii(net, cfg, profile.speed, need_sir)
    core = np.minimum(base, radii)
    n_real = n_reps // 2 if cfg.antithetic else n_reps
    tiers = []
    empty_f, empty_i = np.empty(0), np.empty(0, dtype=np.int64)
    for k, t in enumerate(net.tiers):
        w0 = core[k]
        rng = _stream(cfg.seed, block, k, _POINTS)
        counts = rng.poisson(t.density * math.pi * w0 * w0, n_real)
        rr, ph = _disc_points(rng, t.density, w0, count=int(counts.sum()))
        gain = rng.exponential(1.0, rr.size)
        owner = np.repeat(np.arange(n_real), counts)
        starts = np.concatenate([[0], np.cumsum(counts)[:-1]]).astype(np.int64)
        far = (empty_i, empty_f, empty_f, np.zeros(n_real, dtype=np.int64))
        if radii[k] > w0:
            far = _annulus(_stream(cfg.seed, block, k, _ANNULUS), t.density, w0, radii[k], n_real)
        tiers.append(_TierBlock(owner, rr, ph, gain, counts, starts, *far, key=(cfg.seed, block, k)))
    rng = _stream(cfg.seed, block, 0, _USER)
    if cfg.antithetic:
        th = draw_theta(profile, rng, n_real, cfg.full_circle)
        theta = np.empty(n_reps)
        theta[0::2] = th
        theta[1::2] = np.mod(th + math.pi, 2.0 * math.pi) if cfg.full_circle else math.pi - th
    else:
        theta = np.asarray(draw_theta(profile, rng, n_reps, cfg.full_circle), dtype=float)
    return Block(block, n_reps, n_real, tiers, core, radii, theta)


@dataclass
class ReplicationRecords:
    """Per-replication outcomes; discarded replications carry NaN / False."""

    seed: int
    speed: float
    tier: np.ndarray
    r: np.ndarray
    theta: np.ndarray
    sir: np.ndarray
    covered: np.ndarray
    handoff: np.ndarray
    discarded: np.ndarray
    pair: np.ndarray | None = None
    has_sir: bool = True

    @property
    def n(self):
        return int(self.tier.size)

    @property
    def n_used(self):
        return int((~self.discarded).sum())

    @property
    def discard_rate(self):
        return float(self.discarded.mean()) if self.n else 0.0


def _received(net, k, gain, rr):
    t = net.tiers[k]
    return t.power_mw * net.reference_loss * gain * np.exp(-net.alpha * np.log(rr / net.r0))


def _run_block(net, profile, cfg, block, n_reps, need_sir=True):
    blk = _sample_block(net, profile, cfg, block, n_reps, need_sir)
    n_real, k_tiers, v = blk.n_real, net.n_tiers, profile.speed
    nearest = np.full((k_tiers, n_real), np.inf)
    nearest_pos = np.zeros((k_tiers, n_real), dtype=np.int64)
    totals = np.zeros((k_tiers, n_real))
    for k, tb in enumerate(blk.tiers):
        nonempty = tb.counts > 0
        if tb.rr.size:
            nearest[k, nonempty] = np.minimum.reduceat(tb.rr, tb.starts[nonempty])
            hit = np.flatnonzero(tb.rr == nearest[k, tb.owner])
            # ties have probability zero; keep the first point per realization
            first = np.unique(tb.owner[hit], return_index=True)[1]
            nearest_pos[k, tb.owner[hit[first]]] = hit[first]
            if need_sir:
                totals[k] = np.bincount(tb.owner, weights=_received(net, k, tb.gain, tb.rr), minlength=n_real)
        if need_sir and tb.far_rr.size:
            totals[k] += np.bincount(tb.far_owner, weights=_received(net, k, tb.far_gain, tb.far_rr),
                                     minlength=n_real)
    # a tier with no AP in its core window cannot be resolved: resample (discard)
    complete = np.isfinite(nearest).all(axis=0)
    with np.errstate(divide="ignore"):
        log_metric = (np.log(net.powers_mw)[:, None] + math.log(net.reference_loss)
                      - net.alpha * np.log(nearest / net.r0) + np.log(net.biases)[:, None])
    tier = np.argmax(log_metric, axis=0)
    cols = np.arange(n_real)
    r = nearest[tier, cols]
    pos = nearest_pos[tier, cols]

    sir_real = np.full(n_real, np.nan)
    if need_sir:
        signal = np.zeros(n_real)
        for k, tb in enumerate(blk.tiers):
            m = complete & (tier == k)
            if m.any():
                signal[m] = _received(net, k, tb.gain[pos[m]], tb.rr[pos[m]])
        own_total = totals[tier, cols]
        interference = (totals.sum(axis=0) if cfg.spectrum == "shared" else own_total) - signal
        interference = np.maximum(interference, 0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            sir_real = np.where(interference > 0.0, signal / interference, np.inf)

    # replication -> realization
    rep_real = np.arange(n_reps) // 2 if cfg.antithetic else np.arange(n_reps)
    theta = blk.theta
    guard = r[rep_real] + 2.0 * v > blk.core[tier[rep_real]]
    discarded = ~complete[rep_real] | guard
    handoff = np.zeros(n_reps, dtype=bool)
    if v > 0.0:
        copies = (0, 1) if cfg.antithetic else (0,)
        for c in copies:
            reps = np.arange(c, n_reps, len(copies))
            th = theta[reps]
            for k, tb in enumerate(blk.tiers):
                served = complete & (tier == k)
                if not served.any() or not tb.rr.size:
                    continue
                sp = np.where(served, pos, 0)
                sx = tb.rr[sp] * np.cos(tb.ph[sp])
                sy = tb.rr[sp] * np.sin(tb.ph[sp])
                # move at angle theta from the direction pointing away from the AP
                ax, ay = -np.cos(tb.ph[sp]), -np.sin(tb.ph[sp])
                ct, st = np.cos(th), np.sin(th)
                nx = v * (ct * ax - st * ay)
                ny = v * (st * ax + ct * ay)
                big_r = np.hypot(sx - nx, sy - ny)
                reach = np.where(served, r + 2.0 * v, -np.inf)
                cand = tb.rr < reach[tb.owner]
                cand[pos[served]] = False
                idx = np.flatnonzero(cand)
                if idx.size == 0:
                    continue
                o = tb.owner[idx]
                px = tb.rr[idx] * np.cos(tb.ph[idx])
                py = tb.rr[idx] * np.sin(tb.ph[idx])
                closer = np.hypot(px - nx[o], py - ny[o]) < big_r[o]
                hits = np.zeros(n_real, dtype=bool)
                hits[o[closer]] = True
                handoff[reps] |= hits & served
    tier_rep = tier[rep_real]
    sir_rep = sir_real[rep_real]
    thresholds = net.thresholds[tier_rep]
    covered = (sir_rep >= thresholds) & ~discarded
    out_sir = np.where(discarded, np.nan, sir_rep)
    return dict(
        tier=np.where(discarded, -1, tier_rep),
        r=np.where(discarded, np.nan, r[rep_real]),
        theta=theta,
        sir=out_sir,
        covered=covered,
        handoff=handoff & ~discarded,
        discarded=discarded,
        pair=(block * (cfg.block_size // 2) + rep_real) if cfg.antithetic else None,
    )


def simulate(net: NetworkModel, profile: MobilityProfile, cfg: SimConfig,
             need_sir=True) -> ReplicationRecords:
    """Run ``cfg.replications`` replications and return per-replication records.

    With ``need_sir=False`` only the core windows are drawn; association and
    handoff outcomes are unchanged but SIR and coverage are not meaningful.
    """
    n = int(cfg.replications)
    if cfg.antithetic and n % 2:
        raise ValueError("antithetic sampling needs an even replication count")
    sizes = [min(cfg.block_size, n - s) for s in range(0, n, cfg.block_size)]
    jobs = list(enumerate(sizes))

    def run(job):
        return _run_block(net, profile, cfg, *job, need_sir)

    if cfg.n_jobs > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=cfg.n_jobs) as pool:
            parts = list(pool.map(run, jobs))
    else:
        parts = [run(j) for j in jobs]
    cat = {key: np.concatenate([p[key] for p in parts]) for key in parts[0] if key != "pair"}
    pair = np.concatenate([p["pair"] for p in parts]) if cfg.antithetic else None
    rec = ReplicationRecords(int(cfg.seed), float(profile.speed), pair=pair, has_sir=need_sir, **cat)
    if rec.discard_rate > DISCARD_WARN:
        warnings.warn(
            f"{rec.discard_rate:.1%} of replications discarded (empty window or guard region); "
            "estimates condition on the kept replications and their variance is inflated",
            RuntimeWarning, stacklevel=2,
        )
    return rec


# ---------------------------------------------------------------- estimation

@dataclass(frozen=True)
class EstimateWithCI:
    estimate: float
    stderr: float
    n: int
    seed: int
    discarded: int = 0

    def z_score(self, value):
        if self.stderr == 0.0:
            return 0.0 if value == self.estimate else math.copysign(math.inf, self.estimate - value)
        return (self.estimate - value) / self.stderr

    def contains(self, value, k=3.0):
        return abs(self.z_score(value)) <= k


EVENTS = (
    "always", "handoff", "coverage", "coverage_no_handoff", "coverage_handoff",
    "tier", "tier_coverage", "tier_coverage_no_handoff", "composite",
)
GEOMETRY_EVENTS = ("always", "handoff", "tier")


def event_values(records: ReplicationRecords, event: str, tier=None, beta=None):
    """Per-replication values (over kept replications) of an event indicator or
    of the handoff-cost composite ``(1 - beta) cov + beta (cov and no handoff)``."""
    if event not in GEOMETRY_EVENTS and not records.has_sir:
        raise ValueError(f"event {event!r} needs SIR; simulate with need_sir=True")
    keep = ~records.discarded
    cov, ho = records.covered[keep], records.handoff[keep]
    if event.startswith("tier") and tier is None:
        raise ValueError(f"event {event!r} needs a tier index")
    in_tier = records.tier[keep] == tier if tier is not None else None
    if event == "always":
        return np.ones(int(keep.sum()))
    if event == "handoff":
        return ho.astype(float)
    if event == "coverage":
        return cov.astype(float)
    if event == "coverage_no_handoff":
        return (cov & ~ho).astype(float)
    if event == "coverage_handoff":
        return (cov & ho).astype(float)
    if event == "tier":
        return in_tier.astype(float)
    if event == "tier_coverage":
        return (in_tier & cov).astype(float)
    if event == "tier_coverage_no_handoff":
        return (in_tier & cov & ~ho).astype(float)
    if event == "composite":
        if beta is None:
            raise ValueError("the composite estimand needs beta")
        return (1.0 - beta) * cov + beta * (cov & ~ho)
    raise ValueError(f"unknown event {event!r}; expected one of {EVENTS}")


def summarize(records: ReplicationRecords, event: str, tier=None, beta=None) -> EstimateWithCI:
    x = event_values(records, event, tier, beta)
    n = x.size
    if n == 0:
        raise EmptyWindowError("every replication was discarded")
    mean = float(x.mean())
    if records.pair is not None:
        pairs = records.pair[~records.discarded]
        sums = np.bincount(pairs, weights=x)
        cnt = np.bincount(pairs)
        ok = cnt > 0
        pm = sums[ok] / cnt[ok]
        se = float(pm.std() / math.sqrt(pm.size)) if pm.size > 1 else 0.0
    elif np.all((x == 0.0) | (x == 1.0)):
        se = math.sqrt(mean * (1.0 - mean) / n)
    else:
        se = float(x.std() / math.sqrt(n))
    return EstimateWithCI(mean, se, n, records.seed, int(records.discarded.sum()))


def estimate(event: str, net: NetworkModel, profile: MobilityProfile, cfg: SimConfig,
             tier=None, beta=None) -> EstimateWithCI:
    """Monte Carlo estimate of one event probability (or the composite)."""
    if cfg.replications < MIN_REPLICATIONS:
        raise ValueError(f"need at least {MIN_REPLICATIONS} replications")
    if event == "composite" and beta is None:
        beta = net.beta
    return summarize(simulate(net, profile, cfg, need_sir=event not in GEOMETRY_EVENTS), event, tier, beta)


LOG_COLUMNS = ("seed", "rep", "tier", "r", "theta", "v", "sir_db", "covered", "handoff", "discarded")


def write_event_log(records: ReplicationRecords, path):
    """Replication-level CSV log; ``tier`` is 1-based, blank when discarded."""
    sir_db = linear_to_db(records.sir)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(LOG_COLUMNS)
        for i in range(records.n):
            d = bool(records.discarded[i])
            w.writerow([
                records.seed, i,
                "" if d else int(records.tier[i]) + 1,
                "" if d else repr(float(records.r[i])),
                repr(float(records.theta[i])),
                repr(records.speed),
                "" if d else ("inf" if math.isinf(sir_db[i]) else repr(float(sir_db[i]))),
                int(records.covered[i]), int(records.handoff[i]), int(d),
            ])
