import math

import pytest

from hetnet_mobility.coverage import (
    coverage_given_distance,
    coverage_mobile_single_tier,
    coverage_stationary,
    joint_coverage_no_handoff,
    swept_region_integral,
)
from hetnet_mobility.handoff import excess_area, handoff_rate_approx, handoff_rate_exact
from hetnet_mobility.interference import rho
from hetnet_mobility.model import FixedAngle, MobilityProfile, single_tier_network
from hetnet_mobility.montecarlo import SimConfig, simulate, summarize


def test_stationary_value():
    assert coverage_stationary(1.0, 3.5) == pytest.approx(1 / (1 + 1.0735911414373902), rel=1e-12)


def test_stationary_alpha4():
    assert coverage_stationary(1.0, 4.0) == pytest.approx(1 / (1 + math.pi / 4), rel=1e-12)


def test_coverage_given_distance_endpoints():
    assert coverage_given_distance(1e-3, 0.0, 1.0, 3.5) == 1.0
    assert coverage_given_distance(1e-3, 20.0, 1.0, 3.5) == pytest.approx(
        math.exp(-math.pi * 1e-3 * 400 * rho(1.0, 3.5)))


@pytest.mark.parametrize("model", ["approx", "exact", "joint"])
def test_limits_reduce_to_stationary(model):
    ref = coverage_stationary(1.0, 3.5)
    assert coverage_mobile_single_tier(1e-3, MobilityProfile(0.0), 0.9, 1.0, 3.5, handoff_model=model) == \
        pytest.approx(ref, abs=1e-12)
    assert coverage_mobile_single_tier(1e-3, MobilityProfile(15.0), 0.0, 1.0, 3.5, handoff_model=model) == \
        pytest.approx(ref, abs=1e-12)


@pytest.mark.parametrize("model", ["approx", "exact", "joint"])
def test_linear_in_beta(model):
    p = MobilityProfile(10.0)
    vals = [coverage_mobile_single_tier(1e-3, p, b, 1.0, 3.5, handoff_model=model) for b in (0.0, 0.4, 0.8)]
    assert vals[1] - vals[0] == pytest.approx(vals[2] - vals[1], abs=1e-12)


def test_joint_term_at_tiny_threshold_is_no_handoff_rate():
    # with tau -> 0 every user is covered, so the joint term is P(no handoff)
    lam, v = 1e-3, 5.0
    p = MobilityProfile(v)
    r = rho(1e-9, 3.5)
    assert joint_coverage_no_handoff(lam, p, r, handoff_model="approx") == pytest.approx(
        1 - handoff_rate_approx(lam, v), abs=1e-6)
    assert joint_coverage_no_handoff(lam, p, r, handoff_model="exact") == pytest.approx(
        1 - handoff_rate_exact(lam, p), abs=1e-6)


def test_swept_region_integral_area():
    for r, v, th in ((10.0, 15.0, 0.3), (30.0, 5.0, 1.5), (4.0, 12.0, 2.9)):
        assert float(swept_region_integral(r, v, th, n_phi=4096, n_s=24)) == pytest.approx(
            excess_area(r, v, th), rel=2e-5)


def test_models_ordering_at_speed():
    # the joint model adds back interference removed by an empty swept region
    p = MobilityProfile(15.0)
    kw = dict(beta=0.9, tau=1.0, alpha=3.5)
    exact = coverage_mobile_single_tier(1e-3, p, kw["beta"], kw["tau"], kw["alpha"], handoff_model="exact")
    joint = coverage_mobile_single_tier(1e-3, p, kw["beta"], kw["tau"], kw["alpha"], handoff_model="joint")
    assert joint > exact


def test_fixed_direction_supported():
    p = MobilityProfile(5.0, FixedAngle(0.0))
    val = coverage_mobile_single_tier(1e-3, p, 1.0, 1.0, 3.5, handoff_model="exact")
    assert 0.0 < val < coverage_stationary(1.0, 3.5)


def test_joint_model_matches_monte_carlo():
    lam, v, beta = 1e-3, 10.0, 0.9
    net = single_tier_network(lam, beta=beta)
    p = MobilityProfile(v)
    rec = simulate(net, p, SimConfig(replications=30_000, seed=21))
    est = summarize(rec, "composite", beta=beta)
    assert est.contains(coverage_mobile_single_tier(lam, p, beta, 1.0, 3.5, handoff_model="joint"))


def test_conditional_coverage_by_distance_bucket():
    lam = 1e-3
    rec = simulate(single_tier_network(lam), MobilityProfile(0.0), SimConfig(replications=40_000, seed=22))
    keep = ~rec.discarded
    r, cov = rec.r[keep], rec.covered[keep]
    for lo, hi in ((5.0, 8.0), (15.0, 18.0)):
        m = (r >= lo) & (r < hi)
        p = cov[m].mean()
        se = math.sqrt(p * (1 - p) / m.sum())
        mid = [coverage_given_distance(lam, x, 1.0, 3.5) for x in (lo, hi)]
        assert min(mid) - 3 * se <= p <= max(mid) + 3 * se
