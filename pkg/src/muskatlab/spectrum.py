"""Linear analysis around a state: spectra, discrete Jacobians, rate fits.

The closed-form growth rates of the flat interface live next to a
finite-difference linearisation of the full evolution operator in a
real trigonometric basis; the two routes are kept independent so they
can be compared.  Log-linear fits extract decay or growth rates of
single Fourier modes from recorded trajectories.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import List, Optional, Tuple

import numpy as np

from .csvio import write_csv
from .elliptic import InterfaceOperator, growth_rate, solve_lower, solve_upper
from .errors import FitError
from .evolution import EvolutionOperator, Trajectory
from .grid import Side, SpectralGrid, cosine_coefficient
from .interface import InterfaceState
from .operators import interface_flux
from .params import BoundaryData, FluidParams


@dataclass(frozen=True)
class SpectrumEntry:
    mode: int
    rate: float


def linear_spectrum(params: FluidParams, c2: float, m_max: int) -> List[SpectrumEntry]:
    """Closed-form linearised growth rates for modes 0..m_max."""
    return [SpectrumEntry(m, growth_rate(m, params, c2)) for m in range(m_max + 1)]


def spectrum_to_csv(path, entries: List[SpectrumEntry], comments=()) -> None:
    write_csv(path, list(comments) + ["muskatlab spectrum"],
              ["m", "rate"], [(e.mode, e.rate) for e in entries])


# ---------------------------------------------------------------------------
# finite-difference linearisation

def basis_labels(m_max: int) -> List[str]:
    """Ordering of the real trigonometric basis used by the Jacobians."""
    labels = ["1"]
    for j in range(1, m_max + 1):
        labels += [f"cos{j}", f"sin{j}"]
    return labels


def _basis_values(grid: SpectralGrid, index: int) -> np.ndarray:
    if index == 0:
        return np.ones(grid.num_x)
    j = (index + 1) // 2
    if index % 2 == 1:
        return np.cos(j * grid.x)
    return np.sin(j * grid.x)


def _project(grid: SpectralGrid, values: np.ndarray, m_max: int) -> np.ndarray:
    ahat = np.fft.fft(values) / grid.num_x
    out = np.empty(2 * m_max + 1)
    out[0] = ahat[0].real
    for j in range(1, m_max + 1):
        out[2 * j - 1] = 2.0 * ahat[j].real
        out[2 * j] = -2.0 * ahat[j].imag
    return out


def discrete_linearization(grid: SpectralGrid, params: FluidParams,
                           boundary: BoundaryData, state: InterfaceState,
                           m_max: int, step: float = 1e-6, t: float = 0.0,
                           op: Optional[EvolutionOperator] = None) -> np.ndarray:
    """Central-difference Jacobian of the evolution operator at a state.

    Basis ordering: constant, then cos(jx), sin(jx) for j = 1..m_max;
    the matrix has shape (2*m_max+1, 2*m_max+1) with columns indexed by
    the perturbation direction.
    """
    if op is None:
        op = EvolutionOperator(grid, params, boundary)
    size = 2 * m_max + 1
    jac = np.empty((size, size))
    for idx in range(size):
        e = _basis_values(grid, idx)
        plus = InterfaceState(grid, values=state.values + step * e)
        minus = InterfaceState(grid, values=state.values - step * e)
        dphi = (op.rhs(t, plus) - op.rhs(t, minus)) / (2.0 * step)
        jac[:, idx] = _project(grid, dphi, m_max)
    return jac


def even_linearization(grid: SpectralGrid, params: FluidParams,
                       boundary: BoundaryData, state: InterfaceState,
                       n_modes: int, step: float = 1e-6, t: float = 0.0,
                       op: Optional[EvolutionOperator] = None,
                       diff: str = "central") -> np.ndarray:
    """Jacobian restricted to the even zero-mean subspace (cosine modes).

    Suitable for states that are themselves even in x, where the
    evolution operator preserves the subspace.  Forward differencing
    halves the cost when first-order step bias is affordable, e.g. for
    eigenvalue estimates.
    """
    if op is None:
        op = EvolutionOperator(grid, params, boundary)
    if diff not in ("central", "forward"):
        raise ValueError(f"unknown difference scheme: {diff!r}")
    base = op.rhs(t, state) if diff == "forward" else None
    jac = np.empty((n_modes, n_modes))
    for j in range(1, n_modes + 1):
        e = np.cos(j * grid.x)
        plus = InterfaceState(grid, values=state.values + step * e)
        if diff == "forward":
            dphi = (op.rhs(t, plus) - base) / step
        else:
            minus = InterfaceState(grid, values=state.values - step * e)
            dphi = (op.rhs(t, plus) - op.rhs(t, minus)) / (2.0 * step)
        ahat = np.fft.fft(dphi) / grid.num_x
        jac[:, j - 1] = 2.0 * ahat[1:n_modes + 1].real
    return jac


def discrete_mode_rate(grid: SpectralGrid, params: FluidParams,
                       boundary: BoundaryData, m: int, step: float = 1e-6,
                       interface_tol: float = 1e-10) -> float:
    """Diagonal Jacobian entry of mode m about the flat interface.

    The tight inversion tolerance keeps solver dust out of the
    difference quotient even when a large mean component (constant top
    flux) dominates the right-hand side.
    """
    flat = InterfaceState.flat(grid)
    op = EvolutionOperator(grid, params, boundary, interface_tol=interface_tol)
    e = np.cos(m * grid.x)
    plus = InterfaceState(grid, values=flat.values + step * e)
    minus = InterfaceState(grid, values=flat.values - step * e)
    dphi = (op.rhs(0.0, plus) - op.rhs(0.0, minus)) / (2.0 * step)
    ahat = np.fft.fft(dphi) / grid.num_x
    return float(2.0 * ahat[m].real)


def discrete_forcing_rate(grid: SpectralGrid, params: FluidParams, c2: float,
                          m: int, step: float = 1e-4,
                          interface_tol: float = 1e-10) -> float:
    """Diagonal entry of the forcing part alone, isolated by removing the
    capillary/gravity jump from the parameters.

    The velocity carries an order-one mean for any nonzero top flux, so
    a tiny step would drown the difference quotient in rounding noise;
    a larger step with one Richardson sweep removes the quadratic bias
    instead.
    """
    neutral = replace(params, surface_tension=0.0, rho_plus=0.0, rho_minus=0.0)
    boundary = BoundaryData(g2_mean=c2)
    fine = discrete_mode_rate(grid, neutral, boundary, m, step, interface_tol)
    coarse = discrete_mode_rate(grid, neutral, boundary, m, 2.0 * step,
                                interface_tol)
    return (4.0 * fine - coarse) / 3.0


def _cosine_part(grid: SpectralGrid, values: np.ndarray, m: int) -> float:
    if m == 0:
        return float(np.mean(np.real(values)))
    return cosine_coefficient(grid, np.real(values), m)


def discrete_interface_symbol(grid: SpectralGrid, params: FluidParams,
                              m: int) -> float:
    """Measured multiplier of the interface operator on cos(m x) at the
    flat state; compare with the closed-form interface_symbol."""
    state = InterfaceState.flat(grid)
    iop = InterfaceOperator(grid, params, state)
    out = iop.apply(np.cos(m * grid.x))
    return _cosine_part(grid, out, m)


def discrete_forcing_composition(grid: SpectralGrid, params: FluidParams,
                                 m: int) -> float:
    """Measured multiplier of the flux-to-flux layer composition.

    Pushes cos(m x) through the lower layer as an interface flux datum,
    extends its trace through the upper layer and reads the upper
    kinematic flux; the closed form is the product of the lower trace
    response and the upper flux response.
    """
    state = InterfaceState.flat(grid)
    probe = np.cos(m * grid.x)
    low = solve_lower(grid, params, state, flux=probe)
    up = solve_upper(grid, params, state, interface=low.interface_trace())
    out = interface_flux(grid, params, state, Side.UPPER, np.real(up.values))
    return _cosine_part(grid, out, m)


# ---------------------------------------------------------------------------
# rate fits

#: amplitudes below this are considered numerically zero for fitting
FIT_FLOOR = 1e-14

#: auto-windowed fits require the amplitude to span this many decades
FIT_MIN_DECADES = 2.0


@dataclass(frozen=True)
class DecayFit:
    mode: int
    rate: float                    # signed d/dt log |a_m|; negative = decay
    window: Tuple[float, float]
    residual: float                # rms of the log-linear fit residual
    n_points: int


def fit_decay_rate(traj: Trajectory, mode: int,
                   window: Optional[Tuple[float, float]] = None) -> DecayFit:
    """Log-linear fit of |a_mode|(t) over a window.

    Without an explicit window the fit uses every sample above the
    amplitude floor and requires at least two decades of variation, so
    that a rate is never extracted from flat noise.
    """
    times = traj.times()
    amps = traj.mode_amplitude(mode)
    if window is not None:
        t0, t1 = window
        sel = (times >= t0) & (times <= t1) & (amps > FIT_FLOOR)
    else:
        sel = amps > FIT_FLOOR
    if np.count_nonzero(sel) < 3:
        raise FitError(f"mode {mode}: not enough usable samples for a rate fit")
    t_sel = times[sel]
    log_amp = np.log(amps[sel])
    if window is None:
        decades = (log_amp.max() - log_amp.min()) / np.log(10.0)
        if decades < FIT_MIN_DECADES:
            raise FitError(
                f"mode {mode}: amplitude spans only {decades:.2f} decades; "
                "pass an explicit window")
    slope, intercept = np.polyfit(t_sel, log_amp, 1)
    fitted = slope * t_sel + intercept
    residual = float(np.sqrt(np.mean((fitted - log_amp) ** 2)))
    return DecayFit(mode=mode, rate=float(slope),
                    window=(float(t_sel[0]), float(t_sel[-1])),
                    residual=residual, n_points=int(np.count_nonzero(sel)))


def fits_to_csv(path, fits: List[DecayFit], comments=()) -> None:
    write_csv(path, list(comments) + ["muskatlab decay fits"],
              ["mode", "rate", "window_start", "window_end", "residual"],
              [(f.mode, f.rate, f.window[0], f.window[1], f.residual) for f in fits])
