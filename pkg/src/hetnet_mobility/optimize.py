"""Coverage-maximising tier association for mobile users.

The objective is separable, ``F(A) = sum_k g_k(A_k)``, where ``g_k`` is tier
``k``'s mobile-coverage contribution. It is maximised over the probability
simplex by projected gradient ascent with central-difference gradients,
Armijo backtracking and several starting points.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .coverage import joint_coverage_no_handoff, tier_mobile_coverage
from .errors import InfeasibleBiasError, OptimizerError
from .model import MobilityProfile, NetworkModel, QuadratureSpec
from .multitier import (
    association_probabilities,
    optimal_association_stationary,
    solve_bias,
    tier_rhos,
)

OPTIMIZER_QUAD = QuadratureSpec(abs_tol=1e-12, rel_tol=1e-10, max_subdivisions=200)
BOUNDARY_CLAMP = 1e-6


def project_simplex(y):
    """Euclidean projection of ``y`` onto ``{x >= 0, sum x = 1}`` (sort-based)."""
    y = np.asarray(y, dtype=float)
    u = np.sort(y)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, y.size + 1)
    cond = u - css / idx > 0
    r = idx[cond][-1]
    shift = css[cond][-1] / r
    return np.maximum(y - shift, 0.0)


class MobileCoverageObjective:
    """Callable ``F(A)`` with per-tier terms, clipped to ``[0, 1]`` per tier so
    that finite differences may step just outside the simplex."""

    def __init__(self, net: NetworkModel, profile: MobilityProfile, quad=OPTIMIZER_QUAD,
                 handoff_model="approx"):
        self.net = net
        self.profile = profile
        self.quad = quad
        self.handoff_model = handoff_model
        self.rhos = tier_rhos(net)
        self.n_evals = 0

    def term(self, k, share):
        self.n_evals += 1
        share = min(max(float(share), 0.0), 1.0)
        t = self.net.tiers[k]
        return tier_mobile_coverage(t.density, self.profile, self.net.beta, self.rhos[k], share,
                                    self.quad, self.handoff_model, t.threshold, self.net.alpha)

    def __call__(self, assoc):
        return float(sum(self.term(k, a) for k, a in enumerate(assoc)))

    def gradient(self, assoc, h=1e-5):
        g = np.empty(len(assoc))
        for k, a in enumerate(assoc):
            lo, hi = max(a - h, 0.0), min(a + h, 1.0)
            g[k] = (self.term(k, hi) - self.term(k, lo)) / (hi - lo)
        return g


@dataclass(frozen=True)
class AssociationSolution:
    """Optimised association with the biases that realise it.

    Tiers whose optimal share falls below ``BOUNDARY_CLAMP`` are listed in
    ``pinned``; their bias is reported as 0 (the tier should not attract
    users) and the other biases are solved on the remaining tiers.
    ``clamped_association`` / ``clamped_bias`` give the nearest interior
    point (pinned shares raised to the clamp) and its finite biases.
    """

    association: np.ndarray
    bias: np.ndarray
    objective: float
    converged: bool
    iterations: int
    pinned: tuple[int, ...] = ()
    clamped_association: np.ndarray | None = None
    clamped_bias: np.ndarray | None = None
    history: list = field(default_factory=list, repr=False)

    @property
    def on_boundary(self):
        return bool(self.pinned)


def _ascend(obj, start, max_iter, xtol, ftol, h):
    a = project_simplex(start)
    fa = obj(a)
    step = 1.0
    for it in range(1, max_iter + 1):
        g = obj.gradient(a, h)
        accepted = False
        t = min(step * 4.0, 1e3)
        while t > 1e-14:
            cand = project_simplex(a + t * g)
            fc = obj(cand)
            if fc >= fa + 1e-4 * float(g @ (cand - a)) and fc >= fa:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            return a, fa, True, it
        moved = float(np.max(np.abs(cand - a)))
        gain = fc - fa
        a, fa, step = cand, fc, t
        if moved < xtol or gain < ftol:
            return a, fa, True, it
    return a, fa, False, max_iter


def _bias_with_pins(net, assoc, pinned, reference):
    keep = [k for k in range(net.n_tiers) if k not in pinned]
    bias = np.zeros(net.n_tiers)
    if len(keep) == 1:
        bias[keep[0]] = 1.0
        return bias
    # only densities, powers and alpha enter the solve; biases are placeholders
    sub = replace(net, tiers=tuple(replace(net.tiers[k], bias=1.0) for k in keep))
    a = np.asarray(assoc)[keep]
    ref = keep.index(reference) if reference in keep else 0
    bias[keep] = solve_bias(sub, a / a.sum(), ref)
    return bias


def optimize_association_mobile(net: NetworkModel, profile: MobilityProfile, quad=OPTIMIZER_QUAD,
                                n_restarts=10, seed=0, max_iter=2000, xtol=1e-10, ftol=1e-15,
                                fd_step=1e-5, reference=0, handoff_model="approx",
                                strict=True) -> AssociationSolution:
    """Association probabilities maximising mobile coverage, plus their biases.

    Starts from the stationary optimum, the max-SIR (all biases 1)
    association, the simplex centre and ``n_restarts`` Dirichlet draws, and
    keeps the best end point. Raises :class:`OptimizerError` (carrying the
    best iterate) when no start converges and ``strict`` is set.
    """
    k = net.n_tiers
    obj = MobileCoverageObjective(net, profile, quad, handoff_model)
    if k == 1:
        one = np.ones(1)
        return AssociationSolution(one, one, obj(one), True, 0, (), one, one)
    rng = np.random.default_rng(seed)
    starts = [
        optimal_association_stationary(net),
        association_probabilities(net.with_biases(np.ones(k))),
        np.full(k, 1.0 / k),
    ]
    starts += list(rng.dirichlet(np.ones(k), size=n_restarts))
    best = None
    history = []
    any_converged = False
    for s in starts:
        a, fa, ok, it = _ascend(obj, s, max_iter, xtol, ftol, fd_step)
        history.append((np.asarray(s), a, fa, ok, it))
        any_converged |= ok
        if best is None or fa > best[1] + 1e-15:
            best = (a, fa, ok, it)
    a, fa, ok, it = best
    pinned = tuple(int(i) for i in np.flatnonzero(a < BOUNDARY_CLAMP))
    clamped = np.maximum(a, BOUNDARY_CLAMP)
    clamped /= clamped.sum()
    try:
        clamped_bias = solve_bias(net, clamped, reference)
    except InfeasibleBiasError:
        clamped_bias = None
    if pinned:
        bias = _bias_with_pins(net, a, pinned, reference)
    else:
        bias = solve_bias(net, a, reference)
    sol = AssociationSolution(a, bias, fa, ok, it, pinned, clamped, clamped_bias, history)
    if strict and not any_converged:
        raise OptimizerError(f"no start converged within {max_iter} iterations", best=sol)
    return sol


def brute_force_association(net: NetworkModel, profile: MobilityProfile, step=1e-3, lo=0.0, hi=1.0,
                            quad=OPTIMIZER_QUAD, handoff_model="approx"):
    """Grid search over the last tier's share in a two-tier network.

    Returns ``(best_share, best_value, grid, values)``; ``grid`` holds the
    share of tier 1 (tier 0 gets the rest).
    """
    if net.n_tiers != 2:
        raise ValueError("grid search is implemented for two tiers")
    obj = MobileCoverageObjective(net, profile, quad, handoff_model)
    n = int(round((hi - lo) / step))
    grid = lo + step * np.arange(n + 1)
    values = np.array([obj.term(0, 1.0 - x) + obj.term(1, x) for x in grid])
    i = int(np.argmax(values))
    return float(grid[i]), float(values[i]), grid, values


@dataclass(frozen=True)
class ConcavityReport:
    grid: np.ndarray
    values: np.ndarray
    second_differences: np.ndarray
    nonnegative: np.ndarray

    @property
    def concave(self):
        return self.nonnegative.size == 0


def second_differences(x, f):
    """Second divided differences ``2 f[x0, x1, x2]`` at the interior points of a
    (possibly non-uniform) increasing grid."""
    x, f = np.asarray(x, float), np.asarray(f, float)
    d1 = np.diff(f) / np.diff(x)
    return 2.0 * np.diff(d1) / (x[2:] - x[:-2])


def concavity_probe(net: NetworkModel, profile: MobilityProfile, tier: int, grid, term="f2",
                    quad=OPTIMIZER_QUAD, handoff_model="approx") -> ConcavityReport:
    """Second differences of one tier's coverage term along ``grid`` of shares.

    ``term`` picks the stationary part ``"f1"`` (``A / (1 + A rho)``), the
    joint coverage-and-no-handoff part ``"f2"``, or their ``beta``-weighted
    ``"total"``.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 3 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be increasing with at least three points")
    if np.any(grid <= 0) or np.any(grid >= 1):
        raise ValueError("grid must lie inside (0, 1)")
    t = net.tiers[tier]
    rk = float(tier_rhos(net)[tier])
    if term == "f1":
        values = grid / (1.0 + grid * rk)
    elif term == "f2":
        values = np.array([joint_coverage_no_handoff(t.density, profile, rk, a, quad, handoff_model,
                                                     t.threshold, net.alpha) for a in grid])
    elif term == "total":
        values = np.array([tier_mobile_coverage(t.density, profile, net.beta, rk, a, quad, handoff_model,
                                                t.threshold, net.alpha) for a in grid])
    else:
        raise ValueError("term must be 'f1', 'f2' or 'total'")
    sd = second_differences(grid, values)
    return ConcavityReport(grid, values, sd, np.flatnonzero(sd >= 0.0))


__all__ = [
    "AssociationSolution",
    "ConcavityReport",
    "MobileCoverageObjective",
    "brute_force_association",
    "concavity_probe",
    "optimize_association_mobile",
    "project_simplex",
    "second_differences",
]
