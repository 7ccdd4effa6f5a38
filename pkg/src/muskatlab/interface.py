"""Interface states on the periodic strip.

An InterfaceState stores grid samples and Fourier coefficients of the
interface elevation consistently and validates that the graph stays
strictly inside the strip.  States are immutable; every operation that
would change the elevation returns a new object.
"""

from __future__ import annotations

import numpy as np

from .errors import AdmissibilityError
from .grid import SpectralGrid, dealias, fourier_coeffs, values_from_coeffs, x_derivative

#: operations that assemble geometry reject states beyond this sup-norm
ADMISSIBLE_MARGIN = 0.99

_HERMITIAN_TOL = 1e-10


class InterfaceState:
    """Elevation of the fluid interface over the periodic direction."""

    __slots__ = ("grid", "values", "coeffs")

    def __init__(self, grid: SpectralGrid, values=None, coeffs=None):
        if (values is None) == (coeffs is None):
            raise ValueError("give exactly one of values or coeffs")
        self.grid = grid
        if values is not None:
            values = np.asarray(values, dtype=float)
            if values.shape != (grid.num_x,):
                raise ValueError(f"values must have shape ({grid.num_x},)")
            coeffs = fourier_coeffs(grid, values)
        else:
            coeffs = np.asarray(coeffs, dtype=complex)
            if coeffs.shape != (grid.num_x,):
                raise ValueError(f"coeffs must have shape ({grid.num_x},)")
            complex_values = values_from_coeffs(grid, coeffs)
            scale = max(1.0, float(np.max(np.abs(complex_values))))
            if float(np.max(np.abs(complex_values.imag))) > _HERMITIAN_TOL * scale:
                raise ValueError("coefficients are not conjugate-symmetric")
            values = complex_values.real
        sup = float(np.max(np.abs(values)))
        if not np.isfinite(sup):
            raise AdmissibilityError("interface elevation is not finite")
        if sup >= 1.0:
            raise AdmissibilityError(
                f"interface touches the strip boundary: sup |f| = {sup:.6g} >= 1")
        self.values = values
        self.coeffs = coeffs
        self.values.flags.writeable = False
        self.coeffs.flags.writeable = False

    # -- constructors ---------------------------------------------------

    @classmethod
    def flat(cls, grid: SpectralGrid, height: float = 0.0) -> "InterfaceState":
        return cls(grid, values=np.full(grid.num_x, float(height)))

    @classmethod
    def from_cosines(cls, grid: SpectralGrid, amplitudes: dict) -> "InterfaceState":
        """Build sum_m a_m cos(m x) from {m: a_m}; m = 0 gives the mean."""
        vals = np.zeros(grid.num_x)
        for m, a in amplitudes.items():
            vals += a * np.cos(int(m) * grid.x) if m else a * np.ones(grid.num_x)
        return cls(grid, values=vals)

    @classmethod
    def from_random_modes(cls, grid: SpectralGrid, rng, max_mode: int,
                          amplitude: float, decay: float = 0.5) -> "InterfaceState":
        """Random smooth zero-mean state with geometrically decaying modes."""
        vals = np.zeros(grid.num_x)
        for m in range(1, max_mode + 1):
            a = amplitude * decay ** (m - 1)
            phase = rng.uniform(0.0, 2.0 * np.pi)
            vals += a * np.cos(m * grid.x + phase)
        return cls(grid, values=vals)

    # -- views ----------------------------------------------------------

    @property
    def mean(self) -> float:
        return float(self.coeffs[0].real)

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def derivative(self, order: int = 1) -> np.ndarray:
        return x_derivative(self.grid, self.values, order)

    def coefficient(self, m: int) -> complex:
        """Fourier coefficient a_m, any |m| <= num_modes."""
        return complex(self.coeffs[m % self.grid.num_x])

    def shifted(self, height: float) -> "InterfaceState":
        return InterfaceState(self.grid, values=self.values + float(height))

    def ensure_margin(self, margin: float = ADMISSIBLE_MARGIN) -> "InterfaceState":
        if self.sup_norm >= margin:
            raise AdmissibilityError(
                f"interface too close to the strip boundary: sup |f| = "
                f"{self.sup_norm:.6g} >= {margin}")
        return self

    def __repr__(self):
        return (f"InterfaceState(mean={self.mean:.3e}, sup={self.sup_norm:.3e}, "
                f"grid={self.grid!r})")


def curvature(state: InterfaceState) -> np.ndarray:
    """Curvature of the interface graph, sampled on the grid.

    Computed as the x-derivative of the normalised slope
    f' / sqrt(1 + f'^2), which keeps the discrete mean exactly zero.
    """
    g = state.grid
    fx = state.derivative(1)
    slope = dealias(g, fx / np.sqrt(1.0 + fx * fx))
    return x_derivative(g, slope)


def capillary_datum(state: InterfaceState, params) -> np.ndarray:
    """Interface jump datum: surface_tension * curvature + buoyancy_jump * f."""
    return params.surface_tension * curvature(state) + params.buoyancy_jump * state.values
