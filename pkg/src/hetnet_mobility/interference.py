"""Rayleigh-fading interference integrals for SIR coverage.

``rho(tau, alpha) = tau^(2/alpha) * int_{tau^(-2/alpha)}^inf du / (1 + u^(alpha/2))``
is the same-tier term; ``z_interference`` moves the lower limit to
``(B_hat / tau)^(2/alpha)`` for cross-tier interference under shared spectrum.
"""

import math
from functools import lru_cache

from .errors import DivergenceError, DomainError
from .model import QuadratureSpec
from .quadrature import integrate_tail

# rho and Z are cheap and reused by every coverage formula; tighter than the
# package default so they never dominate the error budget downstream.
INTERFERENCE_QUAD = QuadratureSpec(abs_tol=1e-13, rel_tol=1e-11, max_subdivisions=200)


def _check(tau, alpha):
    if not alpha > 2.0:
        raise DivergenceError(f"interference integral diverges for alpha <= 2 (alpha={alpha!r})")
    if not (tau > 0.0 and math.isfinite(tau)):
        raise DomainError(f"SIR threshold must be positive, got {tau!r}")


@lru_cache(maxsize=4096)
def _tail(lower, alpha, quad):
    half = alpha / 2.0
    return integrate_tail(lambda u: 1.0 / (1.0 + u**half), lower, quad, "interference integral", decay=half)


def rho(tau, alpha, quad=INTERFERENCE_QUAD):
    _check(tau, alpha)
    p = 2.0 / alpha
    return tau**p * _tail(float(tau ** (-p)), float(alpha), quad)


def z_interference(tau, alpha, bias_ratio, quad=INTERFERENCE_QUAD):
    _check(tau, alpha)
    if not (bias_ratio > 0.0 and math.isfinite(bias_ratio)):
        raise DomainError(f"relative bias must be positive, got {bias_ratio!r}")
    p = 2.0 / alpha
    return tau**p * _tail(float((bias_ratio / tau) ** p), float(alpha), quad)
