import math

import mpmath
import numpy as np
import pytest

from hetnet_mobility.special import no_handoff_bracket, q_function, scaled_gauss_tail


def test_q_at_zero_is_half():
    assert q_function(0.0) == 0.5


@pytest.mark.parametrize("x", [-3.0, -0.5, 0.3, 1.0, 4.0, 9.0])
def test_q_matches_mpmath(x):
    ref = float(0.5 * mpmath.erfc(mpmath.mpf(x) / mpmath.sqrt(2)))
    assert q_function(x) == pytest.approx(ref, rel=1e-13)


def test_q_vectorised():
    out = q_function(np.array([0.0, 1.0]))
    assert out.shape == (2,)


@pytest.mark.parametrize("b", [-2.0, -0.3, 0.0, 0.7, 5.0, 30.0, 300.0])
def test_scaled_tail_matches_high_precision(b):
    mpmath.mp.dps = 50
    bb = mpmath.mpf(b)
    ref = float(mpmath.exp(bb**2) * 0.5 * mpmath.erfc(bb))
    assert scaled_gauss_tail(b) == pytest.approx(ref, rel=1e-12)


def test_scaled_tail_does_not_overflow():
    # exp(b^2) alone overflows past b ~ 26.6
    v = scaled_gauss_tail(1e3)
    assert math.isfinite(v) and v > 0


def test_scaled_tail_large_b_asymptote():
    # exp(b^2) Q(sqrt2 b) ~ 1 / (2 b sqrt(pi)) for large b
    for b in (50.0, 500.0):
        assert scaled_gauss_tail(b) * 2 * b * math.sqrt(math.pi) == pytest.approx(1.0, abs=1e-3)


def test_bracket_limits():
    assert no_handoff_bracket(0.0) == 1.0
    # the bracket decays like 1 / (2 b^2)
    assert no_handoff_bracket(100.0) == pytest.approx(1.0 / (2 * 100.0**2), rel=1e-3)


@pytest.mark.parametrize("b", [-1.0, 0.2, 1.5, 10.0])
def test_bracket_equals_r_integral(b):
    # 1 - 2 b sqrt(pi) e^{b^2} Q(sqrt2 b) = int_0^inf 2 x e^{-(x^2 + 2 b x)} dx
    c = 2.0 * b
    ref = float(mpmath.quad(lambda x: 2 * x * mpmath.exp(-(x * x + c * x)), [0, mpmath.inf]))
    assert no_handoff_bracket(b) == pytest.approx(ref, rel=1e-10)
