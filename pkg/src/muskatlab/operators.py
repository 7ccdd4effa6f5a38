"""Pulled-back layer operators on the straightened strips.

Each physical fluid layer is the image of a reference strip under the
graph map (x, y) -> (x, y + (1 -+ y) f(x)), upper/lower sign following
the layer.  Pulling the Laplacian back through this map produces a
second-order operator with variable coefficients in the interface f and
its first two derivatives; the normal-derivative boundary functionals
pick up slope corrections in the same way.  This module assembles those
coefficient fields and applies the interior and boundary operators to
layer fields.

For the flat interface every correction term vanishes identically and
the interior operator reduces to the plain Laplacian, which the solver
layer exploits as a preconditioner.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .grid import Side, SpectralGrid, dealias, x_derivative, y_derivative
from .interface import InterfaceState
from .params import FluidParams


@dataclass(frozen=True)
class OperatorCoefficients:
    """Coefficient fields of the pulled-back Laplacian on one strip.

    The operator is
        cxx * dxx + cxy * dxy + cyy * dyy + cy * dy
    with cxx identically one.  Arrays have shape (2*M, N).
    """

    side: Side
    cxx: np.ndarray
    cxy: np.ndarray
    cyy: np.ndarray
    cy: np.ndarray


def assemble_coefficients(grid: SpectralGrid, state: InterfaceState,
                          side: Side) -> OperatorCoefficients:
    """Coefficient fields of the pulled-back Laplacian for one layer."""
    state.ensure_margin()
    s = side.orientation
    f = state.values[:, None]
    fx = state.derivative(1)[:, None]
    fxx = state.derivative(2)[:, None]
    w = (1.0 - s * grid.y_nodes(side))[None, :]
    g = 1.0 - s * f

    cxy = dealias(grid, -2.0 * w * fx / g)
    cyy = dealias(grid, (w * w * fx * fx + 1.0) / (g * g))
    cy = dealias(grid, -w * (g * fxx + 2.0 * s * fx * fx) / (g * g))
    cxx = np.ones((grid.num_x, grid.num_vertical))
    return OperatorCoefficients(side=side, cxx=cxx, cxy=cxy, cyy=cyy, cy=cy)


def apply_operator(grid: SpectralGrid, coeffs: OperatorCoefficients, field):
    """Apply the pulled-back Laplacian to a layer field (2*M, N).

    The flat-interface part is applied exactly; only the products with
    the geometry corrections are dealiased, so at f = 0 the result is
    the plain discrete Laplacian with no truncation.
    """
    vx = x_derivative(grid, field)
    vxx = x_derivative(grid, field, 2)
    vy = y_derivative(grid, field)
    vyy = y_derivative(grid, field, 2)
    vxy = y_derivative(grid, vx)
    correction = (coeffs.cxy * vxy + (coeffs.cyy - 1.0) * vyy + coeffs.cy * vy)
    return vxx + vyy + dealias(grid, correction)


def interface_flux(grid: SpectralGrid, params: FluidParams, state: InterfaceState,
                   side: Side, field):
    """Kinematic flux functional of a layer field at the interface.

    This is the mobility-weighted conormal derivative whose value enters
    the interface motion; for the flat interface it reduces to
    (k/mu) * d_y at y = 0.
    """
    row = grid.interface_index(side)
    mobility = params.mobility(lower=(side is Side.LOWER))
    fx = state.derivative(1)
    g = 1.0 - side.orientation * state.values
    vy_row = field @ grid.d_y[row, :]
    vx_row = x_derivative(grid, field[:, row])
    return mobility * dealias(grid, (1.0 + fx * fx) / g * vy_row - fx * vx_row)


def top_flux(grid: SpectralGrid, state: InterfaceState, field):
    """Vertical-derivative functional of an upper-layer field at y = 1.

    Matches the flux datum imposed on the top boundary; the graph map
    contributes the factor 1/(1 - f).
    """
    row = grid.outer_index(Side.UPPER)
    vy_row = field @ grid.d_y[row, :]
    return dealias(grid, vy_row / (1.0 - state.values))


class MapDirection(Enum):
    TO_PHYSICAL = "to_physical"
    TO_REFERENCE = "to_reference"


def map_coordinates(state: InterfaceState, side: Side, direction: MapDirection,
                    points):
    """Map points between the reference strip and the physical layer.

    points has shape (..., 2) with (x, y) pairs.  The x coordinate is
    untouched; the y coordinate is sheared by the interface graph,
    evaluated off-grid with the trigonometric interpolant.
    """
    pts = np.asarray(points, dtype=float)
    if pts.shape[-1] != 2:
        raise ValueError("points must have shape (..., 2)")
    x = pts[..., 0]
    y = pts[..., 1]
    grid = state.grid
    phases = np.exp(1j * np.multiply.outer(x, grid.modes.astype(float)))
    f_at = (phases @ state.coeffs).real
    s = side.orientation
    out = pts.copy()
    if direction is MapDirection.TO_PHYSICAL:
        out[..., 1] = y + (1.0 - s * y) * f_at
    else:
        out[..., 1] = (y - f_at) / (1.0 - s * f_at)
    return out
