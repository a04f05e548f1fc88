"""Handoff rate, SIR coverage and mobility-aware tier association for
downlink users in multi-tier Poisson networks, with a Monte Carlo oracle."""

__version__ = "0.1.0"

from .coverage import coverage_given_distance, coverage_mobile_single_tier, coverage_stationary
from .errors import (
    ConfigError,
    DivergenceError,
    DomainError,
    EmptyWindowError,
    HetnetError,
    InfeasibleBiasError,
    OptimizerError,
    QuadratureError,
)
from .handoff import (
    excess_area,
    handoff_prob_conditional,
    handoff_rate_approx,
    handoff_rate_exact,
    handoff_rate_radial,
)
from .interference import rho, z_interference
from .model import (
    FixedAngle,
    MobilityProfile,
    NetworkModel,
    QuadratureSpec,
    TierParams,
    UniformAngle,
    single_tier_network,
)
from .montecarlo import EstimateWithCI, SimConfig, estimate, simulate
from .multitier import (
    association_prob_conditional,
    association_probabilities,
    build_bias_system,
    coverage_multitier_mobile,
    coverage_multitier_shared,
    coverage_multitier_stationary,
    optimal_association_stationary,
    solve_bias,
)
from .optimize import concavity_probe, optimize_association_mobile
from .special import q_function
