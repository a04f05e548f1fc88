"""Property tests (hypothesis). Example counts come from the active profile."""

import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from scipy import stats

from hetnet_mobility import (
    MobilityProfile,
    NetworkModel,
    association_probabilities,
    coverage_mobile_single_tier,
    coverage_multitier_mobile,
    excess_area,
    handoff_prob_conditional,
    handoff_rate_approx,
    handoff_rate_exact,
    handoff_rate_radial,
    q_function,
    rho,
    solve_bias,
)
from hetnet_mobility.handoff import excess_area_lens, new_distance
from hetnet_mobility.optimize import project_simplex

densities = st.floats(1e-5, 1e-2)
speeds = st.floats(0.0, 40.0)
thetas = st.floats(0.0, math.pi)
radii = st.floats(0.5, 500.0)
alphas = st.floats(2.2, 6.0)
taus = st.floats(0.05, 20.0)
fractions = st.floats(0.0, 1.0)


@given(st.floats(-8, 8))
def test_q_function_matches_normal_tail(x):
    assert q_function(x) == pytest.approx(stats.norm.sf(x), rel=1e-12, abs=1e-300)


@given(taus, taus, alphas)
def test_rho_increases_with_threshold(t1, t2, a):
    assume(abs(t1 - t2) > 1e-3)
    lo, hi = sorted((t1, t2))
    assert 0.0 < rho(lo, a) < rho(hi, a)


@given(radii, speeds, thetas)
def test_excess_area_bounds_and_lens(r, v, th):
    e = excess_area(r, v, th)
    rn = new_distance(r, v, th)
    assert 0.0 <= e <= math.pi * rn * rn * (1 + 1e-12)
    assert e == pytest.approx(excess_area_lens(r, v, th), rel=1e-7, abs=1e-9 * r * r)


@given(densities, radii, speeds, thetas)
def test_conditional_handoff_is_probability(lam, r, v, th):
    p = handoff_prob_conditional(lam, r, v, th)
    assert 0.0 <= p <= 1.0


@given(densities, st.floats(0.0, 30.0), st.floats(0.0, 30.0))
def test_handoff_rate_monotone_in_speed(lam, v1, v2):
    lo, hi = sorted((v1, v2))
    a, b = handoff_rate_exact(lam, MobilityProfile(lo)), handoff_rate_exact(lam, MobilityProfile(hi))
    assert a <= b + 1e-9
    assert b <= handoff_rate_radial(lam, hi) + 1e-9


@given(densities, densities, st.floats(0.5, 30.0))
def test_handoff_rate_monotone_in_density(l1, l2, v):
    lo, hi = sorted((l1, l2))
    assert handoff_rate_approx(lo, v) <= handoff_rate_approx(hi, v) + 1e-12
    assert handoff_rate_exact(lo, MobilityProfile(v)) <= handoff_rate_exact(hi, MobilityProfile(v)) + 1e-9


@given(densities, speeds, fractions, taus, alphas)
def test_mobile_coverage_bounded_and_linear_in_beta(lam, v, beta, tau, a):
    prof = MobilityProfile(v)
    c0 = coverage_mobile_single_tier(lam, prof, 0.0, tau, a)
    c1 = coverage_mobile_single_tier(lam, prof, 1.0, tau, a)
    cb = coverage_mobile_single_tier(lam, prof, beta, tau, a)
    assert 0.0 <= c1 <= c0 <= 1.0
    assert cb == pytest.approx((1 - beta) * c0 + beta * c1, rel=1e-10, abs=1e-14)


@given(densities, st.floats(0.0, 30.0), st.floats(0.0, 30.0))
def test_mobile_coverage_decreases_with_speed(lam, v1, v2):
    lo, hi = sorted((v1, v2))
    f = lambda v: coverage_mobile_single_tier(lam, MobilityProfile(v), 1.0, 1.0, 3.5)
    assert f(hi) <= f(lo) + 1e-12


# tiers are ordered by density
tiers2 = st.tuples(st.floats(1e-5, 1e-2), st.floats(1e-5, 1e-2), st.floats(10, 50), st.floats(10, 50)).map(
    lambda t: (min(t[0], t[1]), max(t[0], t[1]), t[2], t[3]))


@given(tiers2, st.floats(0.3, 3.0))
def test_association_is_distribution(tp, b2):
    l1, l2, p1, p2 = tp
    net = NetworkModel.from_arrays([l1, l2], [p1, p2], biases=[1.0, b2])
    a = association_probabilities(net)
    assert np.all(a > 0) and a.sum() == pytest.approx(1.0)


@given(tiers2, st.floats(0.02, 0.98), alphas)
def test_bias_round_trip(tp, share, alpha):
    l1, l2, p1, p2 = tp
    net = NetworkModel.from_arrays([l1, l2], [p1, p2], alpha=alpha)
    target = np.array([1 - share, share])
    b = solve_bias(net, target)
    assert b[0] == pytest.approx(1.0)
    np.testing.assert_allclose(association_probabilities(net.with_biases(b)), target, rtol=1e-8)


@given(tiers2, st.floats(0.02, 0.98), fractions, st.floats(0.0, 30.0))
def test_multitier_mobile_coverage_bounded(tp, share, beta, v):
    l1, l2, p1, p2 = tp
    net = NetworkModel.from_arrays([l1, l2], [p1, p2], beta=beta)
    c = coverage_multitier_mobile(net, [1 - share, share], MobilityProfile(v))
    c0 = coverage_multitier_mobile(net, [1 - share, share], MobilityProfile(0.0))
    assert 0.0 <= c <= c0 + 1e-12 <= 1.0 + 1e-12


@given(st.lists(st.floats(-5, 5), min_size=2, max_size=6))
def test_simplex_projection(y):
    y = np.array(y)
    p = project_simplex(y)
    assert np.all(p >= 0) and p.sum() == pytest.approx(1.0)
    np.testing.assert_allclose(project_simplex(p), p, atol=1e-12)
    # no vertex is closer than the projection
    for k in range(y.size):
        e = np.zeros(y.size)
        e[k] = 1.0
        assert np.linalg.norm(y - p) <= np.linalg.norm(y - e) + 1e-12
