"""Multi-tier association, coverage and the association <-> bias map.

Tier indices are zero-based; tier 0 is the sparsest tier and the bias
reference. With maximum biased average received power association, tier
``k`` serves a typical user with probability
``A_k = lambda_k (P_k B_k)^(2/alpha) / sum_j lambda_j (P_j B_j)^(2/alpha)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coverage import tier_mobile_coverage
from .errors import DomainError, InfeasibleBiasError
from .interference import rho, z_interference
from .model import DEFAULT_QUAD, MobilityProfile, NetworkModel

SIMPLEX_TOL = 1e-9


def tier_rhos(net: NetworkModel):
    return np.array([rho(t.threshold, net.alpha) for t in net.tiers])


def _log_weights(net, biases=None):
    biases = net.biases if biases is None else np.asarray(biases, dtype=float)
    p = 2.0 / net.alpha
    return np.log(net.densities) + p * (np.log(net.powers_mw) + np.log(biases))


def association_probabilities(net: NetworkModel) -> np.ndarray:
    lw = _log_weights(net)
    w = np.exp(lw - lw.max())
    return w / w.sum()


def association_prob_conditional(net: NetworkModel, k: int, r):
    """``P(n = k | r)``: the other tiers' nearest biased competitors are all
    farther than the tier-``k`` AP at distance ``r``."""
    if not 0 <= k < net.n_tiers:
        raise IndexError(f"tier index {k} out of range for {net.n_tiers} tiers")
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise DomainError("connection distance must be non-negative")
    p = 2.0 / net.alpha
    lam = net.densities
    rel = (net.powers_mw * net.biases / (net.powers_mw[k] * net.biases[k])) ** p
    others = sum(lam[j] * rel[j] for j in range(net.n_tiers) if j != k)
    out = np.exp(-math.pi * others * r * r)
    return float(out) if out.ndim == 0 else out


def check_association(assoc, n_tiers, interior=True):
    a = np.asarray(assoc, dtype=float)
    if a.shape != (n_tiers,):
        raise DomainError(f"need {n_tiers} association probabilities, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DomainError("association probabilities must be finite")
    if abs(a.sum() - 1.0) > SIMPLEX_TOL:
        raise DomainError(f"association probabilities must sum to 1 (sum={a.sum()!r})")
    if interior and np.any(a <= 0.0):
        raise DomainError("association probabilities must be strictly positive")
    if np.any(a < 0.0):
        raise DomainError("association probabilities must be non-negative")
    return a


def coverage_multitier_stationary(net: NetworkModel, assoc) -> float:
    """``sum_k 1 / (1/A_k + rho(tau_k, alpha))`` under orthogonal spectrum."""
    a = check_association(assoc, net.n_tiers)
    rh = tier_rhos(net)
    return float(np.sum(a / (1.0 + a * rh)))


def optimal_association_stationary(net: NetworkModel) -> np.ndarray:
    """Coverage-maximising association for a stationary user: ``A_k ~ 1/rho_k``."""
    inv = 1.0 / tier_rhos(net)
    return inv / inv.sum()


def coverage_multitier_mobile(net: NetworkModel, assoc, profile: MobilityProfile,
                              quad=DEFAULT_QUAD, handoff_model="approx") -> float:
    """Overall coverage with handoff cost ``net.beta`` summed over the tiers."""
    a = check_association(assoc, net.n_tiers)
    rh = tier_rhos(net)
    return float(sum(
        tier_mobile_coverage(t.density, profile, net.beta, rh[k], a[k], quad, handoff_model,
                             t.threshold, net.alpha)
        for k, t in enumerate(net.tiers)
    ))


def coverage_multitier_shared(net: NetworkModel) -> float:
    """Stationary coverage when all tiers share one band.

    Tier ``k``'s same-tier term ``rho`` is replaced by
    ``sum_j lambda_hat_j P_hat_j^(2/alpha) Z(tau_k, alpha, B_hat_j)`` with ratios
    taken relative to tier ``k``. Evaluated at the network's own biases.
    """
    a = association_probabilities(net)
    p = 2.0 / net.alpha
    lam, pw, bs = net.densities, net.powers_mw, net.biases
    total = 0.0
    for k, t in enumerate(net.tiers):
        interf = sum(
            (lam[j] / lam[k]) * (pw[j] / pw[k]) ** p * z_interference(t.threshold, net.alpha, bs[j] / bs[k])
            for j in range(net.n_tiers)
        )
        total += a[k] / (1.0 + a[k] * interf)
    return float(total)


@dataclass(frozen=True)
class BiasSystem:
    """Linear system ``matrix @ x = rhs`` for ``x_k = B_k^(2/alpha)``, one row and
    column per non-reference tier (in tier order)."""

    matrix: np.ndarray
    rhs: np.ndarray
    tiers: tuple[int, ...]
    reference: int

    def determinant(self):
        return float(np.linalg.det(self.matrix))


def coupling(net: NetworkModel):
    """``a[j, k] = (lambda_j / lambda_k) (P_j / P_k)^(2/alpha)``."""
    p = 2.0 / net.alpha
    w = net.densities * net.powers_mw**p
    return w[:, None] / w[None, :]


def build_bias_system(net: NetworkModel, assoc, reference: int = 0) -> BiasSystem:
    a = check_association(assoc, net.n_tiers)
    if net.n_tiers < 2:
        raise DomainError("the bias system needs at least two tiers")
    if np.any(a >= 1.0):
        raise DomainError("association targets must lie strictly inside the simplex")
    cp = coupling(net)
    rest = tuple(k for k in range(net.n_tiers) if k != reference)
    m = np.empty((len(rest), len(rest)))
    for row, k in enumerate(rest):
        for col, j in enumerate(rest):
            m[row, col] = (1.0 - 1.0 / a[k]) if j == k else cp[j, k]
    rhs = np.array([-cp[reference, k] for k in rest])
    return BiasSystem(m, rhs, rest, reference)


def bias_determinant_formula(assoc, reference: int = 0) -> float:
    """Closed-form determinant ``(-1)^(K-1) (1 - sum A_i) / prod A_i`` over the
    non-reference tiers."""
    a = np.delete(np.asarray(assoc, dtype=float), reference)
    return float((-1.0) ** len(a) * (1.0 - a.sum()) / np.prod(a))


def solve_bias(net: NetworkModel, target, reference: int = 0) -> np.ndarray:
    """Bias factors realising the association vector ``target``.

    Solves for ``x_k = B_k^(2/alpha)`` with the ``reference`` tier's bias held
    at 1, then rescales so tier 0 has bias 1.
    """
    if net.n_tiers == 1:
        check_association(target, 1)
        return np.ones(1)
    if not 0 <= reference < net.n_tiers:
        raise IndexError("reference tier out of range")
    system = build_bias_system(net, target, reference)
    x = np.linalg.solve(system.matrix, system.rhs)
    if np.any(~np.isfinite(x)) or np.any(x <= 0.0):
        raise InfeasibleBiasError(
            f"bias system gave non-positive x = {x.tolist()} for target {list(target)}",
            solution=x,
        )
    biases = np.ones(net.n_tiers)
    biases[list(system.tiers)] = x ** (net.alpha / 2.0)
    return biases / biases[0]
