"""Gaussian tail functions evaluated through the (scaled) complementary
error function so that no quadrature or overflow is involved."""

import math

import numpy as np
from scipy import special as _sp

_SQRT2 = math.sqrt(2.0)


def q_function(x):
    """Upper tail of the standard normal, ``Q(x) = P(N(0,1) > x)``.

    Accepts scalars or arrays; returns the same shape.
    """
    out = 0.5 * _sp.erfc(np.asarray(x, dtype=float) / _SQRT2)
    return float(out) if np.ndim(out) == 0 else out


def scaled_gauss_tail(b):
    """``exp(b**2) * Q(sqrt(2) * b)`` without overflow.

    The product equals ``erfcx(b) / 2``, which stays finite for large ``b``
    where ``exp(b**2)`` alone would overflow (``b`` above roughly 26). Negative
    ``b`` is accepted as well; the small-displacement handoff factor becomes
    negative for directions close to pi.
    """
    out = 0.5 * _sp.erfcx(np.asarray(b, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def no_handoff_bracket(b):
    """``1 - 2 b sqrt(pi) exp(b^2) Q(sqrt(2) b)``, the r-marginalised
    no-handoff factor shared by the approximate handoff rate and both
    mobile-coverage expressions."""
    b = np.asarray(b, dtype=float)
    out = 1.0 - 2.0 * b * math.sqrt(math.pi) * (0.5 * _sp.erfcx(b))
    return float(out) if np.ndim(out) == 0 else out
