"""Steady interface profiles: onset detection and finger branches.

Nontrivial steady profiles balance capillarity against gravity.  On
zero-mean even profiles the balance constant drops out by working with
the x-derivative of the balance, an odd function whose sine
coefficients form the Newton residual.  A compactified fixed-point form
of the same equation (third antiderivative applied to the nonlinear
terms) has a diagonal linearisation at the flat state whose sign
changes mark the bifurcation points; branches of finger profiles are
traced from these onsets with pseudo-arclength continuation in the
surface tension.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .csvio import write_csv
from .errors import AdmissibilityError
from .grid import SpectralGrid, dealias, x_derivative
from .interface import ADMISSIBLE_MARGIN, InterfaceState, curvature
from .params import BoundaryData, FluidParams


def onset_surface_tension(l: int, params: FluidParams) -> float:
    """Surface tension at which the mode-l finger branch bifurcates."""
    if params.buoyancy_jump <= 0.0:
        raise ValueError("finger onsets require a positive buoyancy jump")
    if l < 1:
        raise ValueError("wavenumber must be at least 1")
    return params.buoyancy_jump / (l * l)


def synthesize(grid: SpectralGrid, cos_coeffs: np.ndarray) -> np.ndarray:
    """Grid values of sum_j a_j cos(j x), a_1 first."""
    j = np.arange(1, len(cos_coeffs) + 1)
    return np.cos(np.outer(grid.x, j)) @ np.asarray(cos_coeffs)


def balance_values(grid: SpectralGrid, params: FluidParams, gamma: float,
                   values: np.ndarray) -> np.ndarray:
    """Pointwise curvature/gravity balance gamma*kappa + buoyancy_jump*f."""
    state = InterfaceState(grid, values=values)
    return gamma * curvature(state) + params.buoyancy_jump * values


def balance_derivative(grid: SpectralGrid, params: FluidParams, gamma: float,
                       values: np.ndarray) -> np.ndarray:
    """x-derivative of the balance; vanishes exactly at steady profiles
    and maps even profiles to odd functions."""
    return x_derivative(grid, balance_values(grid, params, gamma, values))


def sine_residual(grid: SpectralGrid, params: FluidParams, gamma: float,
                  cos_coeffs: np.ndarray) -> np.ndarray:
    """Sine coefficients 1..L of the balance derivative; the Newton residual."""
    values = synthesize(grid, cos_coeffs)
    ups = balance_derivative(grid, params, gamma, values)
    ahat = np.fft.fft(ups) / grid.num_x
    n = len(cos_coeffs)
    return -2.0 * ahat[1:n + 1].imag


def fixed_point_residual(grid: SpectralGrid, params: FluidParams, gamma: float,
                         cos_coeffs: np.ndarray) -> np.ndarray:
    """Cosine coefficients of the compactified steady equation.

    The balance derivative is normalised by the capillary prefactor and
    the third antiderivative is applied to the nonlinear remainder, so
    the flat linearisation acts diagonally with multiplier
    1 - buoyancy_jump / (gamma l^2) on cos(l x).
    """
    if gamma <= 0.0:
        raise ValueError("the fixed-point form needs positive surface tension")
    a = np.asarray(cos_coeffs, dtype=float)
    values = synthesize(grid, a)
    InterfaceState(grid, values=values)   # admissibility gate
    fx = x_derivative(grid, values)
    fxx = x_derivative(grid, values, 2)
    one = 1.0 + fx * fx
    bracket = dealias(grid, -3.0 * fx * fxx * fxx / one
                      + (params.buoyancy_jump / gamma) * fx * one ** 1.5)
    bhat = np.fft.fft(bracket) / grid.num_x
    n = len(a)
    sine = -2.0 * bhat[1:n + 1].imag
    j = np.arange(1, n + 1, dtype=float)
    return a + sine / j ** 3


def fp_multiplier(l: int, gamma: float, params: FluidParams) -> float:
    """Flat-state linearisation multiplier of the fixed-point form."""
    return 1.0 - params.buoyancy_jump / (gamma * l * l)


def fp_multiplier_fd(grid: SpectralGrid, params: FluidParams, gamma: float,
                     l: int, amplitude: float = 1e-6) -> float:
    """The same multiplier measured by central differences."""
    n = max(l, 4)
    e = np.zeros(n)
    e[l - 1] = amplitude
    plus = fixed_point_residual(grid, params, gamma, e)
    minus = fixed_point_residual(grid, params, gamma, -e)
    return float((plus[l - 1] - minus[l - 1]) / (2.0 * amplitude))


@dataclass(frozen=True)
class BifurcationPoint:
    wavenumber: int
    bracket_low: float
    bracket_high: float
    analytic: float


def detect_bifurcation_points(grid: SpectralGrid, params: FluidParams,
                              l_max: int, *, bracket_tol: float = 1e-10,
                              amplitude: float = 1e-6) -> List[BifurcationPoint]:
    """Bracket the sign changes of the measured fixed-point multiplier.

    For each wavenumber the multiplier is swept over a decade around the
    expected magnitude and the detected sign change is bisected down to
    the requested bracket width; the analytic onset rides along for
    comparison but never enters the bisection.
    """
    out = []
    for l in range(1, l_max + 1):
        scale = params.buoyancy_jump / (l * l)
        lo, hi = 0.3 * scale, 3.0 * scale
        mu_lo = fp_multiplier_fd(grid, params, lo, l, amplitude)
        mu_hi = fp_multiplier_fd(grid, params, hi, l, amplitude)
        if mu_lo * mu_hi > 0.0:
            raise RuntimeError(f"no sign change for wavenumber {l} in [{lo}, {hi}]")
        while hi - lo > bracket_tol:
            mid = 0.5 * (lo + hi)
            mu_mid = fp_multiplier_fd(grid, params, mid, l, amplitude)
            if mu_lo * mu_mid <= 0.0:
                hi = mid
            else:
                lo, mu_lo = mid, mu_mid
        out.append(BifurcationPoint(l, lo, hi, onset_surface_tension(l, params)))
    return out


# ---------------------------------------------------------------------------
# pseudo-arclength continuation

@dataclass
class ContinuationOptions:
    eps0: float = 1e-3
    ds0: float = 5e-3
    ds_min: float = 1e-4
    ds_max: float = 5e-2
    ds_fail_min: float = 1e-8
    newton_tol: float = 1e-10
    newton_maxiter: int = 25
    max_points: int = 40
    eps_max: float = 0.35
    gamma_min: float = 1e-3
    n_modes: Optional[int] = None
    fd_step: float = 1e-7
    eig_count: int = 4
    eig_modes: int = 16
    eig_stride: int = 1
    eig_fd_step: float = 1e-6
    # eigenvalues carry percent-level meaning, so the elliptic solves
    # behind them can run far looser than the continuation itself
    eig_layer_tol: float = 1e-9
    eig_interface_tol: float = 1e-7


@dataclass
class BranchPoint:
    gamma: float
    amplitude: float               # coefficient of cos(l x)
    cos_coeffs: np.ndarray
    sup_norm: float
    residual: float                # sup-norm of the balance derivative
    eigenvalues: Optional[np.ndarray] = None


@dataclass
class Branch:
    wavenumber: int
    onset: float
    points: List[BranchPoint] = field(default_factory=list)
    status: str = ""

    def amplitudes(self) -> np.ndarray:
        return np.array([p.amplitude for p in self.points])

    def gammas(self) -> np.ndarray:
        return np.array([p.gamma for p in self.points])


def _fd_jacobian(residual, u, r0, fd_step):
    n = len(u)
    jac = np.empty((len(r0), n))
    for i in range(n):
        h = fd_step * max(1.0, abs(u[i]))
        up = u.copy()
        up[i] += h
        jac[:, i] = (residual(up) - r0) / h
    return jac


def _newton(residual, u, tol, maxiter, fd_step):
    for _ in range(maxiter):
        r = residual(u)
        if float(np.max(np.abs(r))) < tol:
            return u, True
        jac = _fd_jacobian(residual, u, r, fd_step)
        u = u + np.linalg.solve(jac, -r)
    r = residual(u)
    return u, float(np.max(np.abs(r))) < tol


def continue_branch(grid: SpectralGrid, params: FluidParams, l: int,
                    opts: Optional[ContinuationOptions] = None,
                    compute_eigs: bool = True) -> Branch:
    """Trace the mode-l finger branch from its onset.

    The unknown vector stacks the cosine coefficients and the surface
    tension.  The first point pins the amplitude of cos(l x) at a small
    seed; afterwards pseudo-arclength steps follow the secant tangent
    with Newton correction orthogonal to it, halving the step on failure
    and growing it on fast convergence.
    """
    opts = opts or ContinuationOptions()
    n_modes = opts.n_modes or grid.dealias_cutoff
    if l < 1 or l > n_modes:
        raise ValueError(f"wavenumber {l} outside the retained band 1..{n_modes}")
    onset = onset_surface_tension(l, params)
    branch = Branch(wavenumber=l, onset=onset)

    def full_residual(u, constraint):
        a, gamma = u[:-1], u[-1]
        try:
            b = sine_residual(grid, params, gamma, a)
        except AdmissibilityError:
            return None
        return np.concatenate([b, [constraint(u)]])

    def corrector(u_start, constraint):
        def res(u):
            r = full_residual(u, constraint)
            if r is None:
                raise AdmissibilityError("profile left the strip during correction")
            return r
        try:
            return _newton(res, u_start, opts.newton_tol, opts.newton_maxiter,
                           opts.fd_step)
        except (AdmissibilityError, np.linalg.LinAlgError):
            return u_start, False

    def make_point(u):
        a, gamma = u[:-1].copy(), float(u[-1])
        values = synthesize(grid, a)
        ups = balance_derivative(grid, params, gamma, values)
        return BranchPoint(gamma=gamma, amplitude=float(a[l - 1]), cos_coeffs=a,
                           sup_norm=float(np.max(np.abs(values))),
                           residual=float(np.max(np.abs(ups))))

    # first point: pinned amplitude
    u = np.zeros(n_modes + 1)
    u[l - 1] = opts.eps0
    u[-1] = onset
    u, ok = corrector(u, lambda v: v[l - 1] - opts.eps0)
    if not ok:
        branch.status = "newton_failure"
        return branch
    branch.points.append(make_point(u))

    u_flat = np.zeros(n_modes + 1)
    u_flat[-1] = onset
    tangent = u - u_flat
    tangent /= np.linalg.norm(tangent)

    ds = opts.ds0
    status = "max_points"
    while len(branch.points) < opts.max_points:
        pred = u + ds * tangent
        u_new, ok = corrector(pred, lambda v: tangent @ (v - pred))
        if not ok:
            ds *= 0.5
            if ds < opts.ds_fail_min:
                status = "newton_failure"
                break
            continue
        step = u_new - u
        norm = np.linalg.norm(step)
        if norm > 0.0:
            tangent = step / norm
        u = u_new
        point = make_point(u)
        branch.points.append(point)
        ds = min(ds * 1.3, opts.ds_max)
        ds = max(ds, opts.ds_min)
        if abs(point.amplitude) >= opts.eps_max:
            status = "amplitude_target"
            break
        if point.gamma <= opts.gamma_min:
            status = "gamma_bound"
            break
        if point.sup_norm >= ADMISSIBLE_MARGIN:
            status = "admissibility"
            break
    branch.status = status

    if compute_eigs:
        attach_eigenvalues(grid, params, branch, opts)
    return branch


def attach_eigenvalues(grid: SpectralGrid, params: FluidParams, branch: Branch,
                       opts: ContinuationOptions) -> None:
    """Leading evolution eigenvalues at branch points (even subspace).

    Uses the branch point's surface tension in the evolution operator
    with quiescent boundary data; points are processed at the configured
    stride, the last point always included.
    """
    from .evolution import EvolutionOperator
    from .spectrum import even_linearization
    idx = set(range(0, len(branch.points), max(1, opts.eig_stride)))
    idx.add(len(branch.points) - 1)
    quiet = BoundaryData()
    for i in sorted(idx):
        pt = branch.points[i]
        pars = params.with_surface_tension(pt.gamma)
        op = EvolutionOperator(grid, pars, quiet,
                               layer_tol=opts.eig_layer_tol,
                               interface_tol=opts.eig_interface_tol)
        state = InterfaceState(grid, values=synthesize(grid, pt.cos_coeffs))
        jac = even_linearization(grid, pars, quiet, state, opts.eig_modes,
                                 step=opts.eig_fd_step, op=op, diff="forward")
        eigs = np.sort(np.linalg.eigvals(jac).real)[::-1]
        pt.eigenvalues = eigs[:opts.eig_count]


def supercritical_coefficient(branch: Branch, eps_window: float = 0.1,
                              eps_min: float = 0.0) -> float:
    """Least-squares coefficient Q in gamma(eps) = onset + Q*eps^2.

    Restricting to an amplitude band [eps_min, eps_window] keeps both
    the quartic tail and any near-onset solver noise out of the fit.
    """
    eps = branch.amplitudes()
    gam = branch.gammas()
    sel = (np.abs(eps) <= eps_window) & (np.abs(eps) >= eps_min)
    if np.count_nonzero(sel) < 3:
        sel = np.abs(eps) <= eps_window
    if np.count_nonzero(sel) < 3:
        sel = np.ones_like(eps, dtype=bool)
    x = eps[sel] ** 2
    y = gam[sel] - branch.onset
    return float(x @ y / (x @ x))


def onset_rate_slope(params: FluidParams) -> float:
    """d/d(gamma) of the mode-1 linearised rate; negative, used to
    normalise the exchange-of-stability ratio."""
    t = np.tanh(1.0)
    return -params.permeability * t / (params.mu_plus + params.mu_minus * t * t)


@dataclass(frozen=True)
class StabilityEntry:
    gamma: float
    amplitude: float
    leading_eig: float
    critical_eig: float
    predicted_critical: float       # onset reference rate for l >= 2
    ratio: float                    # critical/predicted (l=1), leading/reference (l>=2)


@dataclass
class StabilityReport:
    wavenumber: int
    onset: float
    kind: str                       # "onset_comparison" | "exchange_ratio"
    entries: List[StabilityEntry]


def branch_stability(branch: Branch, params: FluidParams) -> StabilityReport:
    """Stability summary along a branch.

    For wavenumbers >= 2 the leading eigenvalue is compared against the
    flat mode-1 rate frozen at the onset.  For the principal branch the
    critical eigenvalue is compared with the exchange-of-stability
    prediction -eps * gamma'(eps) * (d rate_1/d gamma) using the fitted
    quadratic of the branch curve.
    """
    entries = []
    if branch.wavenumber >= 2:
        from .elliptic import growth_rate
        reference = growth_rate(1, params.with_surface_tension(branch.onset), 0.0)
        for pt in branch.points:
            if pt.eigenvalues is None:
                continue
            leading = float(pt.eigenvalues[0])
            critical = float(pt.eigenvalues[np.argmin(np.abs(pt.eigenvalues))])
            entries.append(StabilityEntry(pt.gamma, pt.amplitude, leading,
                                          critical, reference,
                                          leading / reference if reference else np.nan))
        return StabilityReport(branch.wavenumber, branch.onset,
                               "onset_comparison", entries)

    q = supercritical_coefficient(branch)
    slope = onset_rate_slope(params)
    for pt in branch.points:
        if pt.eigenvalues is None:
            continue
        eps = pt.amplitude
        leading = float(pt.eigenvalues[0])
        critical = float(pt.eigenvalues[np.argmin(np.abs(pt.eigenvalues))])
        predicted = -eps * (2.0 * q * eps) * slope
        ratio = critical / predicted if predicted != 0.0 else np.nan
        entries.append(StabilityEntry(pt.gamma, eps, leading, critical,
                                      predicted, ratio))
    return StabilityReport(branch.wavenumber, branch.onset, "exchange_ratio", entries)


# ---------------------------------------------------------------------------
# export

def branch_to_csv(path, branch: Branch, params: FluidParams, comments=()) -> None:
    header = ["gamma", "epsilon", "sup_norm",
              "leading_eig_1", "leading_eig_2", "leading_eig_3", "leading_eig_4",
              "residual"]
    rows = []
    for pt in branch.points:
        eigs = [np.nan] * 4
        if pt.eigenvalues is not None:
            for i, v in enumerate(pt.eigenvalues[:4]):
                eigs[i] = float(v)
        rows.append([pt.gamma, pt.amplitude, pt.sup_norm, *eigs, pt.residual])
    meta = [
        "muskatlab branch",
        f"wavenumber_l = {branch.wavenumber}",
        f"buoyancy_jump = {params.buoyancy_jump!r}",
        f"onset_surface_tension = {branch.onset!r}",
        f"status = {branch.status}",
    ]
    write_csv(path, list(comments) + meta, header, rows)


def stability_to_csv(path, report: StabilityReport, comments=()) -> None:
    write_csv(path, list(comments) + [
        "muskatlab branch stability",
        f"wavenumber_l = {report.wavenumber}",
        f"kind = {report.kind}",
    ], ["gamma", "epsilon", "leading_eig", "critical_eig", "predicted_critical",
        "ratio"],
        [(e.gamma, e.amplitude, e.leading_eig, e.critical_eig,
          e.predicted_critical, e.ratio) for e in report.entries])
