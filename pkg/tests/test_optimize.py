import numpy as np
import pytest

from hetnet_mobility.errors import OptimizerError
from hetnet_mobility.model import MobilityProfile, NetworkModel
from hetnet_mobility.multitier import association_probabilities, optimal_association_stationary
from hetnet_mobility.optimize import (
    MobileCoverageObjective,
    brute_force_association,
    concavity_probe,
    optimize_association_mobile,
    project_simplex,
    second_differences,
)


def test_project_simplex_known():
    np.testing.assert_allclose(project_simplex([0.5, 0.5]), [0.5, 0.5])
    np.testing.assert_allclose(project_simplex([2.0, 0.0]), [1.0, 0.0])
    np.testing.assert_allclose(project_simplex([0.2, 0.2, 0.2]), [1 / 3] * 3)


def test_project_simplex_is_projection(rng):
    for _ in range(100):
        y = rng.normal(0, 2, 4)
        x = project_simplex(y)
        assert x.sum() == pytest.approx(1.0) and np.all(x >= 0)
        for _ in range(20):
            z = rng.dirichlet(np.ones(4))
            assert np.linalg.norm(y - x) <= np.linalg.norm(y - z) + 1e-12


def test_second_differences_quadratic():
    x = np.array([0.0, 0.1, 0.3, 0.35, 0.8])
    np.testing.assert_allclose(second_differences(x, -3 * x**2), -6.0)


def test_v0_reproduces_stationary_optimum(fig7_net):
    sol = optimize_association_mobile(fig7_net, MobilityProfile(0.0), n_restarts=3)
    np.testing.assert_allclose(sol.association, optimal_association_stationary(fig7_net), atol=1e-4)


def test_symmetric_network():
    net = NetworkModel.from_arrays([1e-3, 1e-3], [30, 30], alpha=3.5, beta=0.5)
    sol = optimize_association_mobile(net, MobilityProfile(10.0), n_restarts=3)
    np.testing.assert_allclose(sol.association, [0.5, 0.5], atol=1e-4)


def test_matches_brute_force_and_beats_baselines(fig7_net):
    p = MobilityProfile(5.0)
    sol = optimize_association_mobile(fig7_net, p, n_restarts=3)
    share, best, _, _ = brute_force_association(fig7_net, p, step=1e-3)
    obj = MobileCoverageObjective(fig7_net, p)
    assert sol.objective >= best - 1e-4
    assert abs(sol.association[1] - share) <= 2e-3
    assert sol.objective >= obj(optimal_association_stationary(fig7_net)) - 1e-12
    assert sol.objective >= obj(association_probabilities(fig7_net.with_biases([1.0, 1.0]))) - 1e-12
    # biases realise the association
    np.testing.assert_allclose(association_probabilities(fig7_net.with_biases(sol.bias)), sol.association,
                               atol=1e-9)


def test_boundary_solution_is_flagged(fig7_net):
    sol = optimize_association_mobile(fig7_net, MobilityProfile(30.0), n_restarts=2)
    assert sol.on_boundary and sol.pinned == (1,)
    assert sol.bias[1] == 0.0 and sol.bias[0] == 1.0
    assert sol.clamped_association[1] == pytest.approx(1e-6, rel=1e-3)
    assert sol.clamped_bias is not None and sol.clamped_bias[1] > 0


def test_single_tier_trivial():
    net = NetworkModel.from_arrays([1e-3], [30], beta=0.5)
    sol = optimize_association_mobile(net, MobilityProfile(3.0))
    assert sol.association.tolist() == [1.0] and sol.bias.tolist() == [1.0]


def test_non_convergence_reports_best(fig7_net):
    with pytest.raises(OptimizerError) as err:
        optimize_association_mobile(fig7_net, MobilityProfile(5.0), n_restarts=0, max_iter=1, xtol=0, ftol=-1)
    assert err.value.best is not None


def test_three_tiers_beats_random(rng):
    net = NetworkModel.from_arrays([1e-5, 1e-4, 1e-3], [46, 35, 20], alpha=3.5, beta=0.8)
    p = MobilityProfile(8.0)
    sol = optimize_association_mobile(net, p, n_restarts=3)
    obj = MobileCoverageObjective(net, p)
    for a in rng.dirichlet(np.ones(3), size=30):
        assert obj(a) <= sol.objective + 1e-9


def test_concavity_f1_any_rho(fig7_net):
    grid = np.linspace(0.01, 0.99, 50)
    assert concavity_probe(fig7_net, MobilityProfile(0.0), 1, grid, term="f1").concave


def test_concavity_zero_speed_matches_f1(fig7_net):
    grid = np.linspace(0.05, 0.95, 19)
    f1 = concavity_probe(fig7_net, MobilityProfile(0.0), 1, grid, term="f1")
    f2 = concavity_probe(fig7_net, MobilityProfile(0.0), 1, grid, term="f2")
    np.testing.assert_allclose(f2.second_differences, f1.second_differences, rtol=1e-9)


def test_concavity_probe_validates_grid(fig7_net):
    with pytest.raises(ValueError):
        concavity_probe(fig7_net, MobilityProfile(1.0), 1, [0.2, 0.1, 0.3])
    with pytest.raises(ValueError):
        concavity_probe(fig7_net, MobilityProfile(1.0), 1, [0.0, 0.5, 0.9])
