"""Interface evolution: right-hand side assembly and time stepping.

The interface velocity is obtained by eliminating both layer problems
onto the interface: assemble the upper kinematic flux of (a) the
extension of the curvature/gravity jump, (b) the lift of the bottom
Dirichlet perturbation through the lower layer, and (c) the extension
of the top flux datum; then invert the interface operator on their sum
and flip the sign.  A constant bottom datum drops out identically and
is skipped.

Steppers treat the diagonal linearised rates implicitly (backward Euler
or Crank-Nicolson) and the remainder explicitly (forward Euler or
two-step Adams-Bashforth); a classic fourth-order Runge-Kutta stepper
is available for short ill-posed demonstrations.  All steppers project
onto the dealiased band after every step.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .csvio import write_csv
from .elliptic import (InterfaceOperator, LayerContext, growth_rate, solve_layer,
                       solve_lower, solve_upper)
from .errors import AdmissibilityError, IllPosedRegimeError, SolverConvergenceError
from .grid import Side, SpectralGrid, fourier_coeffs
from .interface import ADMISSIBLE_MARGIN, InterfaceState, capillary_datum
from .params import BoundaryData, FluidParams, Parabolicity, classify_parabolicity


class EvolutionOperator:
    """Evaluates the interface velocity and the layer potentials."""

    def __init__(self, grid: SpectralGrid, params: FluidParams,
                 boundary: BoundaryData, *, layer_tol: float = 1e-11,
                 interface_tol: float = 1e-9, interface_maxiter: int = 200):
        self.grid = grid
        self.params = params
        self.boundary = boundary
        self.layer_tol = layer_tol
        self.interface_tol = interface_tol
        self.interface_maxiter = interface_maxiter

    def contexts(self, state: InterfaceState):
        lower = LayerContext(self.grid, self.params, state, Side.LOWER)
        upper = LayerContext(self.grid, self.params, state, Side.UPPER)
        return lower, upper

    def rhs(self, t: float, state: InterfaceState, contexts=None) -> np.ndarray:
        """Interface normal velocity at time t, grid values (2*M,)."""
        lower_ctx, upper_ctx = contexts if contexts is not None else self.contexts(state)
        g = self.grid
        parts = []

        datum = capillary_datum(state, self.params)
        if np.any(datum):
            parts.append(solve_layer(upper_ctx, dirichlet=datum, tol=self.layer_tol))

        if self.boundary.g1_perturbation is not None:
            g1p = np.asarray(self.boundary.g1_perturbation(t, g.x), dtype=float)
            if np.any(g1p):
                lifted = solve_layer(lower_ctx, dirichlet=g1p, tol=self.layer_tol)
                trace = lower_ctx.interface_trace(lifted)
                parts.append(solve_layer(upper_ctx, dirichlet=trace, tol=self.layer_tol))

        g2vals = self.boundary.g2(t, g.x)
        if np.any(g2vals):
            parts.append(solve_layer(upper_ctx, flux=g2vals, tol=self.layer_tol))

        if not parts:
            return np.zeros(g.num_x)
        total = parts[0]
        for p in parts[1:]:
            total = total + p
        b = upper_ctx.kinematic_flux(total)
        iop = InterfaceOperator(g, self.params, state, tol=self.interface_tol,
                                maxiter=self.interface_maxiter,
                                layer_tol=self.layer_tol,
                                lower_ctx=lower_ctx, upper_ctx=upper_ctx)
        return -np.real(iop.solve(b))

    def potentials(self, t: float, state: InterfaceState):
        """Interface velocity plus both layer potentials at time t.

        The lower potential carries the bottom Dirichlet datum and the
        kinematic flux consistent with the returned velocity; the upper
        potential carries the jump condition on the interface and the
        top flux datum.
        """
        lower_ctx, upper_ctx = self.contexts(state)
        phi = self.rhs(t, state, contexts=(lower_ctx, upper_ctx))
        g1vals = self.boundary.g1(t, self.grid.x)
        lower = solve_lower(self.grid, self.params, state, flux=-phi,
                            bottom=g1vals, tol=self.layer_tol, ctx=lower_ctx)
        interface_datum = lower.interface_trace() + capillary_datum(state, self.params)
        g2vals = self.boundary.g2(t, self.grid.x)
        upper = solve_upper(self.grid, self.params, state,
                            interface=interface_datum, top_flux=g2vals,
                            tol=self.layer_tol, ctx=upper_ctx)
        return phi, lower, upper


def linear_rates(grid: SpectralGrid, params: FluidParams, c2: float) -> np.ndarray:
    """Linearised growth rates over the fft mode ordering."""
    return np.array([growth_rate(m, params, c2) for m in grid.abs_modes])


# ---------------------------------------------------------------------------
# steppers

class _StepperBase:
    def __init__(self, op: EvolutionOperator, dt: float):
        self.op = op
        self.dt = dt
        self.grid = op.grid
        c2 = op.boundary.g2_mean
        self.rates = linear_rates(op.grid, op.params, c2)
        self.mask = op.grid.dealias_mask

    def _phi_hat(self, t, state):
        phi = self.op.rhs(t, state)
        return fourier_coeffs(self.grid, phi)

    def _make_state(self, coeffs):
        return InterfaceState(self.grid, coeffs=coeffs * self.mask)


class Imex1Stepper(_StepperBase):
    """Backward Euler on the diagonal rates, forward Euler on the rest."""

    order = 1

    def step(self, t, state):
        fhat = state.coeffs
        nhat = self._phi_hat(t, state) - self.rates * fhat
        new = (fhat + self.dt * nhat) / (1.0 - self.dt * self.rates)
        return self._make_state(new)


class Imex2Stepper(_StepperBase):
    """Crank-Nicolson on the diagonal rates, Adams-Bashforth 2 on the rest.

    The first step falls back to a forward-Euler treatment of the
    explicit part, which does not affect the global order.
    """

    order = 2

    def __init__(self, op, dt):
        super().__init__(op, dt)
        self._prev = None

    def step(self, t, state):
        fhat = state.coeffs
        nhat = self._phi_hat(t, state) - self.rates * fhat
        if self._prev is None:
            expl = nhat
        else:
            expl = 1.5 * nhat - 0.5 * self._prev
        self._prev = nhat
        half = 0.5 * self.dt * self.rates
        new = ((1.0 + half) * fhat + self.dt * expl) / (1.0 - half)
        return self._make_state(new)


class Rk4Stepper(_StepperBase):
    """Classic explicit Runge-Kutta 4 on the full right-hand side."""

    order = 4

    def step(self, t, state):
        g = self.grid
        dt = self.dt
        v0 = state.values
        k1 = self.op.rhs(t, state)
        k2 = self.op.rhs(t + dt / 2, InterfaceState(g, values=v0 + dt / 2 * k1))
        k3 = self.op.rhs(t + dt / 2, InterfaceState(g, values=v0 + dt / 2 * k2))
        k4 = self.op.rhs(t + dt, InterfaceState(g, values=v0 + dt * k3))
        new_vals = v0 + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        return self._make_state(fourier_coeffs(g, new_vals))


STEPPERS = {"imex1": Imex1Stepper, "imex2": Imex2Stepper, "rk4": Rk4Stepper}


def default_dt(stepper_name: str, grid: SpectralGrid, params: FluidParams,
               c2: float, t_final: float) -> float:
    """Stability-motivated default step.

    rk4 treats every resolved rate explicitly and is bounded by the
    fastest one; the IMEX steppers handle the diagonal rates implicitly,
    leaving no explicit linear scale, so a fixed modest default applies.
    Either way at least fifty steps cover the horizon.
    """
    if stepper_name == "rk4":
        resolved = [abs(growth_rate(m, params, c2))
                    for m in range(1, grid.dealias_cutoff + 1)]
        dt = 0.5 / max(max(resolved), 1e-12)
    else:
        dt = 0.5
    return min(dt, t_final / 50.0)


# ---------------------------------------------------------------------------
# simulation driver

@dataclass
class SimulationSetup:
    grid: SpectralGrid
    params: FluidParams
    boundary: BoundaryData
    initial: InterfaceState
    t_final: float
    dt: float = 0.0                # 0 selects the default step
    stepper: str = "imex1"
    output_stride: int = 1
    allow_illposed: bool = False
    layer_tol: float = 1e-11
    interface_tol: float = 1e-9


@dataclass
class TrajectoryPoint:
    t: float
    state: InterfaceState
    diagnostics: dict


@dataclass
class Trajectory:
    points: List[TrajectoryPoint]
    status: str                    # completed | blowup
    reason: str
    dt: float
    stepper: str
    setup: Optional[SimulationSetup] = field(default=None, repr=False)

    def times(self) -> np.ndarray:
        return np.array([p.t for p in self.points])

    def mode_amplitude(self, m: int) -> np.ndarray:
        return np.array([abs(p.state.coefficient(m)) for p in self.points])

    def means(self) -> np.ndarray:
        return np.array([p.state.mean for p in self.points])

    def final_state(self) -> InterfaceState:
        return self.points[-1].state

    def to_csv(self, path, m_out: int = 8, comments=()) -> None:
        header = ["t", "mean", "sup_norm"]
        for m in range(m_out + 1):
            header += [f"a{m}_re", f"a{m}_im"]
        rows = []
        for p in self.points:
            row = [p.t, p.state.mean, p.state.sup_norm]
            for m in range(m_out + 1):
                c = p.state.coefficient(m)
                row += [c.real, c.imag]
            rows.append(row)
        base = [
            "muskatlab trajectory",
            f"status = {self.status}",
            f"stepper = {self.stepper}",
            f"dt = {self.dt!r}",
            f"m_out = {m_out}",
        ]
        write_csv(path, list(comments) + base, header, rows)


def _diagnostics(grid: SpectralGrid, state: InterfaceState) -> dict:
    fx = state.derivative(1)
    return {
        "mean": state.mean,
        "sup_norm": state.sup_norm,
        "l2_norm": float(np.sqrt(2.0 * np.pi * np.mean(state.values ** 2))),
        "max_slope": float(np.max(np.abs(fx))),
    }


def simulate(setup: SimulationSetup) -> Trajectory:
    """Run the interface evolution over [0, t_final].

    Blow-up ends the run with status "blowup" and the last good state
    kept; it is an outcome, not an exception.  It covers the interface
    approaching the strip boundary, losing finiteness, or degrading the
    geometry until the layer solves miss their residual contracts, which
    is how a slope singularity manifests on a fixed grid.  Ill-posed
    parameter regimes are refused unless the setup opts in.
    """
    regime = classify_parabolicity(setup.params, setup.boundary.g2_mean)
    if regime is Parabolicity.ILL_POSED and not setup.allow_illposed:
        raise IllPosedRegimeError(
            "parameters are in the ill-posed regime; set allow_illposed to run anyway")

    if setup.t_final <= 0.0:
        raise ValueError("t_final must be positive")
    dt = setup.dt
    if dt <= 0.0:
        dt = default_dt(setup.stepper, setup.grid, setup.params,
                        setup.boundary.g2_mean, setup.t_final)
    n_steps = max(1, round(setup.t_final / dt))
    dt = setup.t_final / n_steps

    try:
        stepper_cls = STEPPERS[setup.stepper]
    except KeyError:
        raise ValueError(f"unknown stepper: {setup.stepper!r}") from None
    op = EvolutionOperator(setup.grid, setup.params, setup.boundary,
                           layer_tol=setup.layer_tol,
                           interface_tol=setup.interface_tol)
    stepper = stepper_cls(op, dt)

    state = setup.initial.ensure_margin()
    points = [TrajectoryPoint(0.0, state, _diagnostics(setup.grid, state))]
    status, reason = "completed", ""
    for k in range(n_steps):
        t = k * dt
        try:
            state = stepper.step(t, state)
        except (AdmissibilityError, SolverConvergenceError) as err:
            status, reason = "blowup", str(err)
            break
        t_next = (k + 1) * dt
        if state.sup_norm >= ADMISSIBLE_MARGIN:
            points.append(TrajectoryPoint(t_next, state, _diagnostics(setup.grid, state)))
            status, reason = "blowup", (
                f"sup |f| = {state.sup_norm:.4g} reached the margin {ADMISSIBLE_MARGIN}")
            break
        if (k + 1) % setup.output_stride == 0 or k + 1 == n_steps:
            points.append(TrajectoryPoint(t_next, state, _diagnostics(setup.grid, state)))
    return Trajectory(points=points, status=status, reason=reason, dt=dt,
                      stepper=setup.stepper, setup=setup)


def flat_mean_height(params: FluidParams, c2: float, t: float) -> float:
    """Exact mean height of the flat solution under a constant top flux."""
    return -params.permeability / params.mu_plus * c2 * t
