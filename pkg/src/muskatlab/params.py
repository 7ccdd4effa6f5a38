"""Physical parameters, boundary data and the parabolicity split.

The two layers share one permeability; each carries its own viscosity
and density.  The derived quantity ``buoyancy_jump`` is gravity times
the density jump across the interface, positive when the upper fluid is
heavier.  Together with the mean injection rate at the top boundary it
decides whether the interface evolution is well-posed forward in time.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

import numpy as np

_MARGINAL_TOL = 1e-14


@dataclass(frozen=True)
class FluidParams:
    """Material constants of the two-layer system."""

    permeability: float = 1.0
    mu_minus: float = 1.0
    mu_plus: float = 1.0
    rho_minus: float = 1.0
    rho_plus: float = 1.0
    gravity: float = 1.0
    surface_tension: float = 0.0

    def __post_init__(self):
        if self.permeability <= 0.0:
            raise ValueError("permeability must be positive")
        if self.mu_minus <= 0.0 or self.mu_plus <= 0.0:
            raise ValueError("viscosities must be positive")
        if self.surface_tension < 0.0:
            raise ValueError("surface tension must be nonnegative")

    @property
    def buoyancy_jump(self) -> float:
        """gravity * (rho_plus - rho_minus); destabilising when positive."""
        return self.gravity * (self.rho_plus - self.rho_minus)

    @property
    def viscosity_ratio(self) -> float:
        """mu_minus / mu_plus."""
        return self.mu_minus / self.mu_plus

    def mobility(self, lower: bool) -> float:
        """permeability over viscosity for the requested layer."""
        return self.permeability / (self.mu_minus if lower else self.mu_plus)

    def with_surface_tension(self, value: float) -> "FluidParams":
        from dataclasses import replace
        return replace(self, surface_tension=float(value))


class Parabolicity(Enum):
    WELL_POSED = "well-posed"
    ILL_POSED = "ill-posed"
    MARGINAL = "marginal"


def classify_parabolicity(params: FluidParams, c2: float) -> Parabolicity:
    """Regime of the linearised evolution around the flat interface.

    c2 is the mean of the top-boundary flux datum.  Any positive surface
    tension regularises; without it the sign of
    buoyancy_jump + c2*(viscosity_ratio - 1) decides, with an exact-zero
    band of width 1e-14 reported as marginal.
    """
    if params.surface_tension > 0.0:
        return Parabolicity.WELL_POSED
    indicator = params.buoyancy_jump + c2 * (params.viscosity_ratio - 1.0)
    if indicator < -_MARGINAL_TOL:
        return Parabolicity.WELL_POSED
    if indicator > _MARGINAL_TOL:
        return Parabolicity.ILL_POSED
    return Parabolicity.MARGINAL


def optimal_velocity(params: FluidParams) -> float:
    """Frame speed that keeps a rigidly translating interface steady.

    Defined only for unequal viscosities.
    """
    if params.mu_plus == params.mu_minus:
        raise ValueError("optimal velocity is undefined for equal viscosities")
    return (params.gravity * params.permeability
            * (params.rho_minus - params.rho_plus)
            / (params.mu_plus - params.mu_minus))


@dataclass(frozen=True)
class BoundaryData:
    """Outer boundary data: Dirichlet below, flux above.

    The mean parts are constants; optional perturbations are callables
    (t, x) -> array matching x.  A constant Dirichlet datum below drops
    out of the evolution identically, so only its perturbation matters
    dynamically.
    """

    g1_mean: float = 0.0
    g2_mean: float = 0.0
    g1_perturbation: Optional[Callable[[float, np.ndarray], np.ndarray]] = None
    g2_perturbation: Optional[Callable[[float, np.ndarray], np.ndarray]] = None

    def g1(self, t: float, x: np.ndarray) -> np.ndarray:
        out = np.full_like(x, self.g1_mean, dtype=float)
        if self.g1_perturbation is not None:
            out = out + self.g1_perturbation(t, x)
        return out

    def g2(self, t: float, x: np.ndarray) -> np.ndarray:
        out = np.full_like(x, self.g2_mean, dtype=float)
        if self.g2_perturbation is not None:
            out = out + self.g2_perturbation(t, x)
        return out

    @property
    def is_static(self) -> bool:
        return self.g1_perturbation is None and self.g2_perturbation is None
