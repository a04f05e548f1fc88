"""Network, tier, mobility and quadrature parameter containers.

Densities are in access points per square metre, transmit powers in dBm,
SIR thresholds and bias factors are linear. Tiers are ordered from the
sparsest to the densest and the first tier is the bias reference
(``B_1 = 1``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence, Union

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0
CARRIER_HZ = 2.0e9


def dbm_to_mw(p_dbm):
    return 10.0 ** (np.asarray(p_dbm, dtype=float) / 10.0)


def db_to_linear(x_db):
    return 10.0 ** (np.asarray(x_db, dtype=float) / 10.0)


def linear_to_db(x):
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(np.asarray(x, dtype=float))


def per_1000m2(density):
    """Convert a density quoted per 1000 m^2 (figure-label units) to per m^2."""
    return density / 1000.0


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances handed to the adaptive quadrature routine."""

    abs_tol: float = 1e-9
    rel_tol: float = 1e-7
    max_subdivisions: int = 200

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("quadrature tolerances must be positive")
        if int(self.max_subdivisions) < 1:
            raise ValueError("max_subdivisions must be >= 1")


DEFAULT_QUAD = QuadratureSpec()


@dataclass(frozen=True)
class FixedAngle:
    """User always moves at ``theta`` radians from the connection direction.

    ``theta = 0`` means moving radially away from the serving AP.
    """

    theta: float

    def __post_init__(self):
        if not (0.0 <= self.theta < math.pi):
            raise ValueError(f"fixed angle must lie in [0, pi), got {self.theta!r}")


@dataclass(frozen=True)
class UniformAngle:
    """Direction uniform on [0, pi); by reflection symmetry this is the same
    handoff law as uniform on [0, 2 pi)."""


Direction = Union[FixedAngle, UniformAngle]


@dataclass(frozen=True)
class MobilityProfile:
    speed: float
    direction: Direction = field(default_factory=UniformAngle)

    def __post_init__(self):
        if not (self.speed >= 0.0 and math.isfinite(self.speed)):
            raise ValueError(f"displacement per unit time must be >= 0, got {self.speed!r}")
        if not isinstance(self.direction, (FixedAngle, UniformAngle)):
            raise TypeError("direction must be FixedAngle or UniformAngle")

    @property
    def is_uniform(self):
        return isinstance(self.direction, UniformAngle)


@dataclass(frozen=True)
class TierParams:
    density: float
    power_dbm: float
    threshold: float = 1.0
    bias: float = 1.0

    def __post_init__(self):
        for name in ("density", "threshold", "bias"):
            value = getattr(self, name)
            if not (value > 0.0 and math.isfinite(value)):
                raise ValueError(f"tier {name} must be positive and finite, got {value!r}")
        if not math.isfinite(self.power_dbm):
            raise ValueError("tier power must be finite")

    @property
    def power_mw(self):
        return float(dbm_to_mw(self.power_dbm))


@dataclass(frozen=True)
class NetworkModel:
    """Multi-tier downlink network.

    ``reference_loss`` defaults to ``(4 pi / wavelength)^-2`` at a 2 GHz
    carrier. It, ``r0`` and the wavelength cancel from every association
    and coverage expression; they are kept so simulated received powers are
    physically scaled.
    """

    tiers: tuple[TierParams, ...]
    alpha: float = 3.5
    beta: float = 0.0
    wavelength: float = SPEED_OF_LIGHT / CARRIER_HZ
    r0: float = 1.0
    reference_loss: float | None = None

    def __post_init__(self):
        tiers = tuple(self.tiers)
        object.__setattr__(self, "tiers", tiers)
        if not tiers:
            raise ValueError("a network needs at least one tier")
        if not (self.alpha > 2.0 and math.isfinite(self.alpha)):
            raise ValueError(f"path-loss exponent must exceed 2, got {self.alpha!r}")
        if not (0.0 <= self.beta <= 1.0):
            raise ValueError(f"handoff-failure fraction must lie in [0, 1], got {self.beta!r}")
        dens = [t.density for t in tiers]
        if any(b < a for a, b in zip(dens, dens[1:])):
            raise ValueError("tiers must be ordered by nondecreasing density")
        if not math.isclose(tiers[0].bias, 1.0, rel_tol=0, abs_tol=1e-12):
            raise ValueError("the first tier is the bias reference and must have bias 1")
        if self.reference_loss is None:
            object.__setattr__(self, "reference_loss", (4.0 * math.pi / self.wavelength) ** -2)
        if not (self.reference_loss > 0 and self.r0 > 0):
            raise ValueError("reference loss and reference distance must be positive")

    @classmethod
    def from_arrays(cls, densities, powers_dbm, thresholds=None, biases=None, **kwargs):
        k = len(densities)
        thresholds = [1.0] * k if thresholds is None else list(thresholds)
        biases = [1.0] * k if biases is None else list(biases)
        if not (len(powers_dbm) == len(thresholds) == len(biases) == k):
            raise ValueError("per-tier arrays must have equal length")
        tiers = tuple(
            TierParams(float(d), float(p), float(t), float(b))
            for d, p, t, b in zip(densities, powers_dbm, thresholds, biases)
        )
        return cls(tiers, **kwargs)

    @property
    def n_tiers(self):
        return len(self.tiers)

    @property
    def densities(self):
        return np.array([t.density for t in self.tiers])

    @property
    def powers_mw(self):
        return dbm_to_mw([t.power_dbm for t in self.tiers])

    @property
    def thresholds(self):
        return np.array([t.threshold for t in self.tiers])

    @property
    def biases(self):
        return np.array([t.bias for t in self.tiers])

    def with_biases(self, biases: Sequence[float]) -> "NetworkModel":
        biases = np.asarray(biases, dtype=float)
        if biases.shape != (self.n_tiers,):
            raise ValueError("need one bias per tier")
        tiers = tuple(replace(t, bias=float(b)) for t, b in zip(self.tiers, biases))
        return replace(self, tiers=tiers)

    def with_beta(self, beta: float) -> "NetworkModel":
        return replace(self, beta=float(beta))

    def with_thresholds(self, thresholds: Sequence[float]) -> "NetworkModel":
        tiers = tuple(replace(t, threshold=float(x)) for t, x in zip(self.tiers, thresholds))
        return replace(self, tiers=tiers)

    def single_tier(self, k: int) -> "NetworkModel":
        """Tier ``k`` on its own, with the bias reset to the reference value."""
        return replace(self, tiers=(replace(self.tiers[k], bias=1.0),))


def single_tier_network(density, threshold=1.0, alpha=3.5, beta=0.0, power_dbm=30.0):
    return NetworkModel((TierParams(density, power_dbm, threshold, 1.0),), alpha=alpha, beta=beta)
