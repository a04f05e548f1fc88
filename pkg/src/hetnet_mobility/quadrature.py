"""Thin wrapper over QUADPACK with explicit failure reporting."""

import math
import warnings

from scipy import integrate

from .errors import QuadratureError
from .model import DEFAULT_QUAD


def integrate_interval(f, a, b, quad=DEFAULT_QUAD, what="integral", points=None):
    """Adaptive Gauss-Kronrod integral of ``f`` over the finite ``[a, b]``.

    Raises :class:`QuadratureError` when QUADPACK flags a problem *and* the
    reported error estimate misses the requested tolerance.
    """
    if a == b:
        return 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        res = integrate.quad(
            f, a, b,
            epsabs=quad.abs_tol, epsrel=quad.rel_tol,
            limit=int(quad.max_subdivisions), points=points, full_output=1,
        )
    val, abserr = res[0], res[1]
    ier = res[3] if len(res) > 3 else None
    target = max(quad.abs_tol, quad.rel_tol * abs(val))
    if not math.isfinite(val) or (ier is not None and abserr > target):
        raise QuadratureError(
            f"{what}: quadrature did not converge (value={val!r}, error estimate={abserr:.3g}, "
            f"requested {target:.3g}): {ier or 'non-finite result'}",
            value=val, abserr=abserr,
        )
    return val


def integrate_tail(f, lower, quad=DEFAULT_QUAD, what="tail integral", decay=None):
    """Integral of ``f`` over ``[lower, inf)``.

    Without ``decay`` the map ``u = lower + t / (1 - t)`` sends the range onto
    ``[0, 1)``. When ``f(u)`` falls off like ``u^-decay`` (``decay > 1``) and
    ``lower > 0``, ``u = lower * t^(-1 / (decay - 1))`` is used instead: it
    leaves a bounded integrand at ``t = 0``, where the first map would keep an
    integrable but slow singularity at ``t = 1``.
    """
    if decay is not None and decay > 1.0 and lower > 0.0:
        q = 1.0 / (decay - 1.0)

        def h(t):
            if t <= 0.0:  # Gauss-Kronrod nodes never sit on the endpoints
                return 0.0
            u = lower * t ** (-q)
            return f(u) * q * u / t

        return integrate_interval(h, 0.0, 1.0, quad, what)

    def g(t):
        if t >= 1.0:
            return 0.0
        s = 1.0 - t
        return f(lower + t / s) / (s * s)

    return integrate_interval(g, 0.0, 1.0, quad, what)
