"""Single-tier SIR coverage, with and without the linear handoff-cost model.

With handoff-failure fraction ``beta`` the coverage of a mobile user is
``(1 - beta) P(cov) + beta P(cov, no handoff)``.
"""

import math

import numpy as np

from .errors import DomainError
from .handoff import _excess_area_scalar, direction_factor, excess_area, truncation_radius
from .interference import rho
from .model import DEFAULT_QUAD, FixedAngle, MobilityProfile
from .quadrature import integrate_interval
from .special import no_handoff_bracket

HANDOFF_MODELS = ("approx", "exact", "joint")
JOINT_NODES = dict(r=96, theta=48, phi=192, s=16)


def coverage_given_distance(density, r, tau, alpha):
    """Coverage probability at connection distance ``r``: ``exp(-pi lambda r^2 rho)``."""
    if np.any(np.asarray(r) < 0):
        raise DomainError("connection distance must be non-negative")
    out = np.exp(-math.pi * density * np.asarray(r, dtype=float) ** 2 * rho(tau, alpha))
    return float(out) if np.ndim(out) == 0 else out


def coverage_stationary(tau, alpha):
    """``1 / (1 + rho(tau, alpha))``; independent of density and power."""
    return 1.0 / (1.0 + rho(tau, alpha))


def _theta_average(fn, profile, quad, what):
    if isinstance(profile.direction, FixedAngle):
        return fn(profile.direction.theta)
    return integrate_interval(fn, 0.0, math.pi, quad, what) / math.pi


def _gauss(n, a, b):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * x + 0.5 * (b + a), 0.5 * (b - a) * w


def swept_region_integral(r, v, theta, weight=None, n_phi=192, n_s=16):
    """``int g(|x|) dx`` over the swept region (disc of radius ``R`` around the
    displaced user minus the disc of radius ``r`` around the start), with the
    start at the origin. ``weight`` maps distances to ``g``; ``None`` gives the
    area. Broadcasts over ``r`` and ``theta``; integrates along rays from the
    start point with Gauss-Legendre rules.
    """
    r = np.asarray(r, dtype=float)[..., None, None]
    theta = np.asarray(theta, dtype=float)[..., None, None]
    phi, wphi = _gauss(n_phi, 0.0, 2.0 * math.pi)
    phi, wphi = phi[:, None], wphi[:, None]
    # serving AP at (-r, 0); user moves to v (cos theta, sin theta)
    proj = v * np.cos(phi - theta)
    big_r2 = r * r + v * v + 2.0 * r * v * np.cos(theta)
    disc = proj * proj - v * v + big_r2
    root = np.sqrt(np.maximum(disc, 0.0))
    lo = np.maximum(r, proj - root)
    hi = np.where(disc > 0.0, proj + root, 0.0)
    span = np.maximum(hi - lo, 0.0)
    x, w = np.polynomial.legendre.leggauss(n_s)
    s = lo + 0.5 * span * (x + 1.0)
    f = s if weight is None else s * weight(s)
    inner = 0.5 * span[..., 0] * np.sum(f * w, axis=-1)
    return np.sum(inner * wphi[:, 0], axis=-1)


def _joint_exact(density, profile, rho_k, share, tau, alpha, nodes):
    """Exact ``P(cov, n = k, no handoff)``: given ``r``, the swept region being
    empty also removes its interferers, so its share of the interference
    exponent is returned."""
    load = (1.0 + share * rho_k) / share
    v = profile.speed
    rmax = truncation_radius(density * load)
    r, wr = _gauss(nodes["r"], 0.0, rmax)
    if isinstance(profile.direction, FixedAngle):
        th, wth = np.array([profile.direction.theta]), np.array([math.pi])
    else:
        th, wth = _gauss(nodes["theta"], 0.0, math.pi)
    rr, tt = np.meshgrid(r, th, indexing="ij")

    def g(s):
        return 1.0 / (1.0 + (s / rr[..., None, None]) ** alpha / tau)

    given = swept_region_integral(rr, v, tt, g, nodes["phi"], nodes["s"])
    area = excess_area(rr, v, tt)
    dens = 2.0 * math.pi * density * rr * np.exp(-density * (math.pi * rr * rr * load + area - given))
    return float(wr @ dens @ wth) / math.pi


def joint_coverage_no_handoff(density, profile: MobilityProfile, rho_k, share=1.0,
                              quad=DEFAULT_QUAD, handoff_model="approx", tau=None, alpha=None):
    """``P(in coverage, served by this tier, no handoff)`` for a tier with
    association probability ``share`` (1 for a single tier).

    ``handoff_model="approx"`` uses the small-displacement handoff law and the
    closed-form r-integral; ``"exact"`` integrates the exact swept-area law
    numerically over ``r``. Both treat coverage and handoff as conditionally
    independent given ``r``. ``"joint"`` drops that assumption (needs ``tau``
    and ``alpha``) and is evaluated with fixed Gauss-Legendre rules.
    """
    if handoff_model not in HANDOFF_MODELS:
        raise ValueError(f"handoff_model must be one of {HANDOFF_MODELS}")
    if share <= 0.0:
        return 0.0
    v = profile.speed
    # 1 / (1/A + rho) written so that A -> 0 stays finite
    weight = share / (1.0 + share * rho_k)
    if v == 0.0:
        return weight

    if handoff_model == "joint":
        if tau is None or alpha is None:
            raise ValueError("the joint model needs tau and alpha")
        return _joint_exact(density, profile, rho_k, share, tau, alpha, JOINT_NODES)

    if handoff_model == "approx":
        scale = v / (2.0 * math.pi) * math.sqrt(math.pi * density * weight)

        def per_theta(theta):
            b = scale * float(direction_factor(theta))
            return no_handoff_bracket(b) * math.exp(-density * v * v * (math.pi - theta))

        return weight * _theta_average(per_theta, profile, quad, "mobile coverage (theta integral)")

    load = 1.0 / weight  # = 1/A + rho
    rmax = truncation_radius(density * load)
    two_pl = 2.0 * math.pi * density

    def per_theta_exact(theta):
        def integrand(r):
            return two_pl * r * math.exp(
                -density * (math.pi * r * r * load + _excess_area_scalar(r, v, theta))
            )

        return integrate_interval(integrand, 0.0, rmax, quad, "mobile coverage (r integral)")

    return _theta_average(per_theta_exact, profile, quad, "mobile coverage (theta integral)")


def tier_mobile_coverage(density, profile, beta, rho_k, share=1.0, quad=DEFAULT_QUAD,
                         handoff_model="approx", tau=None, alpha=None):
    """One tier's contribution ``(1 - beta) P(cov, n=k) + beta P(cov, n=k, no handoff)``."""
    if not 0.0 <= beta <= 1.0:
        raise DomainError("handoff-failure fraction must lie in [0, 1]")
    if share <= 0.0:
        return 0.0
    stationary = share / (1.0 + share * rho_k)
    if beta == 0.0:
        return stationary
    joint = joint_coverage_no_handoff(density, profile, rho_k, share, quad, handoff_model, tau, alpha)
    return (1.0 - beta) * stationary + beta * joint


def coverage_mobile_single_tier(density, profile: MobilityProfile, beta, tau, alpha,
                                quad=DEFAULT_QUAD, handoff_model="approx"):
    """Coverage of a mobile user in one Poisson tier under the handoff-cost model.

    The default ``handoff_model="approx"`` is the closed-form-in-``r`` result
    built on the small-displacement handoff law.
    """
    return tier_mobile_coverage(density, profile, beta, rho(tau, alpha), 1.0, quad, handoff_model,
                                tau, alpha)
