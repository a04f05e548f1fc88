"""Handoff probability for a user displaced by ``v`` in a Poisson tier.

Geometry: the user starts at ``l1`` at connection distance ``r`` from the
serving AP and moves ``v`` at angle ``theta`` to the connection direction
(``theta = 0`` is radially away from the AP) to ``l2``, at distance ``R``
from the AP. No handoff happens iff the region swept into the disc of radius
``R`` around ``l2`` that lies outside the disc of radius ``r`` around ``l1``
holds no other AP, so ``P(no handoff | r, theta) = exp(-lambda * area)``.
"""

import math

import numpy as np

from .errors import DomainError
from .model import DEFAULT_QUAD, FixedAngle, MobilityProfile
from .quadrature import integrate_interval
from .special import no_handoff_bracket, q_function

TAIL_MASS = 1e-12


def nearest_distance_pdf(r, density):
    """Density of the distance to the nearest point of a planar PPP."""
    r = np.asarray(r, dtype=float)
    return 2.0 * math.pi * density * r * np.exp(-math.pi * density * r * r)


def truncation_radius(density, tail=TAIL_MASS):
    """Radius beyond which the nearest-point distance has mass ``tail``."""
    return math.sqrt(math.log(1.0 / tail) / (math.pi * density))


def direction_factor(theta):
    """``a(theta) = 2 cos(theta) (pi - theta) + sin(theta)``."""
    theta = np.asarray(theta, dtype=float)
    return 2.0 * np.cos(theta) * (np.pi - theta) + np.sin(theta)


def new_distance(r, v, theta):
    """Distance from the displaced user to the serving AP."""
    return np.sqrt(np.maximum(r * r + v * v + 2.0 * r * v * np.cos(theta), 0.0))


def _check_geometry(r, v, theta):
    if np.any(np.asarray(theta) < 0.0) or np.any(np.asarray(theta) > math.pi):
        raise DomainError("movement angle must lie in [0, pi]")
    if np.any(np.asarray(r) < 0.0) or np.any(np.asarray(v) < 0.0):
        raise DomainError("distances must be non-negative")


def excess_area(r, v, theta):
    """Area of the disc around ``l2`` (radius ``R``) outside the disc around ``l1``.

    Closed form ``R^2 (pi - theta + psi) - r^2 (pi - theta) + r v sin(theta)``
    where ``psi`` is the angle at the serving AP between ``l1`` and ``l2``.
    ``psi`` is obtuse once the user passes the AP (``r + v cos(theta) < 0``),
    so it is taken from ``atan2`` rather than ``asin(v sin(theta) / R)``.
    """
    r = np.asarray(r, dtype=float)
    v = np.asarray(v, dtype=float)
    theta = np.asarray(theta, dtype=float)
    big_r2 = r * r + v * v + 2.0 * r * v * np.cos(theta)
    big_r2 = np.maximum(big_r2, 0.0)
    psi = np.arctan2(v * np.sin(theta), r + v * np.cos(theta))
    area = big_r2 * (np.pi - theta + psi) - r * r * (np.pi - theta) + r * v * np.sin(theta)
    area = np.maximum(area, 0.0)
    return float(area) if area.ndim == 0 else area


def _excess_area_scalar(r, v, theta):
    c, s = math.cos(theta), math.sin(theta)
    big_r2 = max(r * r + v * v + 2.0 * r * v * c, 0.0)
    psi = math.atan2(v * s, r + v * c)
    return max(big_r2 * (math.pi - theta + psi) - r * r * (math.pi - theta) + r * v * s, 0.0)


def lens_area(r1, r2, d):
    """Intersection area of two discs with radii ``r1``, ``r2`` and centre distance ``d``."""
    r1, r2, d = (np.asarray(x, dtype=float) for x in (r1, r2, d))
    r1, r2, d = np.broadcast_arrays(r1, r2, d)
    out = np.empty(r1.shape)
    small = np.minimum(r1, r2)
    contained = d <= np.abs(r1 - r2)
    apart = d >= r1 + r2
    out[contained] = np.pi * small[contained] ** 2
    out[apart & ~contained] = 0.0
    m = ~(contained | apart)
    a, b, c = r1[m], r2[m], d[m]
    c1 = np.clip((a * a + c * c - b * b) / (2.0 * c * a), -1.0, 1.0)
    c2 = np.clip((b * b + c * c - a * a) / (2.0 * c * b), -1.0, 1.0)
    kite = (a + b - c) * (a + b + c) * (c + a - b) * (c - a + b)
    out[m] = a * a * np.arccos(c1) + b * b * np.arccos(c2) - 0.5 * np.sqrt(np.maximum(kite, 0.0))
    return float(out) if out.ndim == 0 else out


def excess_area_lens(r, v, theta):
    """Same area as :func:`excess_area`, computed as ``|A| - |A and C|`` from
    the general two-disc lens formula; independent check of the closed form."""
    big_r = new_distance(np.asarray(r, float), np.asarray(v, float), np.asarray(theta, float))
    area = np.pi * big_r**2 - lens_area(r, big_r, v)
    area = np.maximum(area, 0.0)
    return float(area) if np.ndim(area) == 0 else area


def handoff_prob_conditional(density, r, v, theta):
    """Probability of a handoff given connection distance ``r`` and angle ``theta``."""
    _check_geometry(r, v, theta)
    out = -np.expm1(-density * np.asarray(excess_area(r, v, theta)))
    return float(out) if np.ndim(out) == 0 else out


def _no_handoff_given_theta(density, v, theta, quad):
    """``E_r[P(no handoff | r, theta)]`` under the nearest-AP distance law."""
    if v == 0.0:
        return 1.0
    rmax = truncation_radius(density)
    pl = math.pi * density

    def integrand(r):
        return 2.0 * pl * r * math.exp(-density * (_excess_area_scalar(r, v, theta) + math.pi * r * r))

    return integrate_interval(integrand, 0.0, rmax, quad, "handoff rate (r integral)")


def handoff_rate_exact(density, profile: MobilityProfile, quad=DEFAULT_QUAD):
    """Handoff rate from the exact conditional probability, averaged over the
    nearest-AP distance and (for :class:`UniformAngle`) the direction."""
    if profile.speed == 0.0:
        return 0.0
    v = profile.speed
    if isinstance(profile.direction, FixedAngle):
        stay = _no_handoff_given_theta(density, v, profile.direction.theta, quad)
    else:
        stay = integrate_interval(
            lambda th: _no_handoff_given_theta(density, v, th, quad),
            0.0, math.pi, quad, "handoff rate (theta integral)",
        ) / math.pi
    return min(max(1.0 - stay, 0.0), 1.0)


def handoff_rate_radial(density, v):
    """Closed-form handoff rate for movement radially away from the serving AP."""
    if v < 0:
        raise DomainError("displacement must be non-negative")
    stay = math.exp(-density * v * v * math.pi) - 2.0 * v * math.pi * math.sqrt(density) * q_function(
        v * math.sqrt(2.0 * math.pi * density)
    )
    return min(max(1.0 - stay, 0.0), 1.0)


def handoff_rate_approx(density, v, quad=DEFAULT_QUAD):
    """Small-displacement handoff rate for uniformly distributed direction.

    Drops the ``asin(v sin(theta) / R)`` term, which leaves a single integral
    over ``theta``. The dropped term is of the same order in ``v`` as the
    retained ``r v a(theta)`` term, so this underestimates the exact rate
    noticeably even at small ``v``; see :func:`handoff_rate_exact`.
    """
    if v < 0:
        raise DomainError("displacement must be non-negative")
    if v == 0.0:
        return 0.0
    scale = math.sqrt(math.pi * density) * v / (2.0 * math.pi)

    def integrand(theta):
        b = scale * float(direction_factor(theta))
        return no_handoff_bracket(b) * math.exp(-density * v * v * (math.pi - theta))

    stay = integrate_interval(integrand, 0.0, math.pi, quad, "approximate handoff rate") / math.pi
    return min(max(1.0 - stay, 0.0), 1.0)
