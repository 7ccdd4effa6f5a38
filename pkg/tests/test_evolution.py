import numpy as np
import pytest

from muskatlab import (BoundaryData, EvolutionOperator, FluidParams,
                       IllPosedRegimeError, InterfaceState, LayerContext, Side,
                       SimulationSetup, Trajectory, capillary_datum,
                       default_dt, flat_mean_height, growth_rate,
                       interface_symbol, linear_rates, simulate, top_flux)


def test_rhs_vanishes_without_data(medium_grid, contrast_params):
    op = EvolutionOperator(medium_grid, contrast_params, BoundaryData())
    phi = op.rhs(0.0, InterfaceState.flat(medium_grid))
    np.testing.assert_array_equal(phi, np.zeros(medium_grid.num_x))


def test_rhs_flat_with_constant_top_flux(medium_grid, contrast_params):
    c2 = 0.8
    op = EvolutionOperator(medium_grid, contrast_params, BoundaryData(g2_mean=c2))
    phi = op.rhs(0.0, InterfaceState.flat(medium_grid))
    expect = -contrast_params.mobility(lower=False) * c2
    np.testing.assert_allclose(phi, np.full(medium_grid.num_x, expect),
                               atol=1e-12)


def test_constant_bottom_datum_is_inert(medium_grid, contrast_params):
    op = EvolutionOperator(medium_grid, contrast_params, BoundaryData(g1_mean=5.0))
    phi = op.rhs(0.0, InterfaceState.flat(medium_grid))
    np.testing.assert_array_equal(phi, np.zeros(medium_grid.num_x))


@pytest.mark.parametrize("m", [1, 3])
def test_rhs_bottom_perturbation_lift(medium_grid, contrast_params, m):
    # Dirichlet wiggle at the bottom reaches the interface through both
    # layers: sech m from the lift, m tanh m from the upper flux, all
    # divided by the interface symbol
    g = medium_grid
    p = contrast_params
    eps = 1e-3
    boundary = BoundaryData(g1_perturbation=lambda t, x: eps * np.cos(m * x))
    op = EvolutionOperator(g, p, boundary)
    phi = op.rhs(0.0, InterfaceState.flat(g))
    t = np.tanh(m)
    gain = (p.mobility(lower=False) * m * t / np.cosh(m)
            / interface_symbol(m, p))
    np.testing.assert_allclose(phi, eps * gain * np.cos(m * g.x),
                               atol=1e-10 * eps * max(gain, 1.0))


def test_potentials_satisfy_all_interface_conditions(medium_grid, heavy_top_params):
    g = medium_grid
    p = heavy_top_params
    state = InterfaceState.from_cosines(g, {1: 0.08, 2: 0.02})
    boundary = BoundaryData(g1_mean=0.3, g2_mean=0.4)
    op = EvolutionOperator(g, p, boundary)
    phi, lower, upper = op.potentials(0.0, state)

    np.testing.assert_allclose(lower.outer_trace(), 0.3 * np.ones(g.num_x),
                               atol=1e-9)
    np.testing.assert_allclose(top_flux(g, state, upper.values),
                               0.4 * np.ones(g.num_x), atol=1e-8)
    jump = upper.interface_trace() - lower.interface_trace()
    np.testing.assert_allclose(jump, capillary_datum(state, p), atol=1e-8)

    lower_ctx = LayerContext(g, p, state, Side.LOWER)
    upper_ctx = LayerContext(g, p, state, Side.UPPER)
    np.testing.assert_allclose(lower_ctx.kinematic_flux(lower.values), -phi,
                               atol=1e-8)
    np.testing.assert_allclose(upper_ctx.kinematic_flux(upper.values), -phi,
                               atol=1e-8)


def test_linear_rates_ordering(small_grid, contrast_params):
    rates = linear_rates(small_grid, contrast_params, 0.3)
    assert rates.shape == (small_grid.num_x,)
    assert rates[0] == 0.0
    assert rates[1] == growth_rate(1, contrast_params, 0.3)
    assert rates[-1] == rates[1]  # modes -1 and 1 coincide


# ---------------------------------------------------------------------------
# steppers
#
# self-convergence on a deliberately coarse grid: the spatial truncation
# is part of the ODE being solved, so it cancels between runs and only
# the stepper order shows

from muskatlab import SpectralGrid


def run_final(grid, params, initial, stepper, dt, t_final=0.4):
    setup = SimulationSetup(grid=grid, params=params, boundary=BoundaryData(),
                            initial=initial, t_final=t_final, dt=dt,
                            stepper=stepper)
    traj = simulate(setup)
    assert traj.status == "completed"
    return traj.final_state().values


@pytest.fixture(scope="module")
def conv_grid():
    return SpectralGrid(8, 8)


@pytest.fixture(scope="module")
def imex_problem(conv_grid):
    params = FluidParams(rho_plus=0.5, surface_tension=1.0)
    initial = InterfaceState.from_cosines(conv_grid, {1: 0.2})
    ref = run_final(conv_grid, params, initial, "imex2", 0.4 / 128)
    return params, initial, ref


@pytest.mark.parametrize("stepper,lo,hi", [
    ("imex1", 0.6, 1.5),
    ("imex2", 1.6, 2.7),
])
def test_imex_convergence_order(conv_grid, imex_problem, stepper, lo, hi):
    params, initial, ref = imex_problem
    e1 = np.max(np.abs(run_final(conv_grid, params, initial, stepper, 0.05) - ref))
    e2 = np.max(np.abs(run_final(conv_grid, params, initial, stepper, 0.025) - ref))
    order = np.log2(e1 / e2)
    assert lo < order < hi, f"{stepper} measured order {order:.2f}"


def test_rk4_convergence_order(conv_grid):
    # zero surface tension keeps the explicit spectrum mild enough for rk4
    params = FluidParams(rho_plus=0.5)
    initial = InterfaceState.from_cosines(conv_grid, {1: 0.2})
    ref = run_final(conv_grid, params, initial, "rk4", 0.4 / 32)
    e1 = np.max(np.abs(run_final(conv_grid, params, initial, "rk4", 0.1) - ref))
    e2 = np.max(np.abs(run_final(conv_grid, params, initial, "rk4", 0.05) - ref))
    order = np.log2(e1 / e2)
    assert 3.2 < order < 5.0, f"rk4 measured order {order:.2f}"


def test_default_dt_rules(small_grid):
    params = FluidParams(rho_plus=0.5, surface_tension=1.0)
    fastest = max(abs(growth_rate(m, params, 0.0))
                  for m in range(1, small_grid.dealias_cutoff + 1))
    assert default_dt("rk4", small_grid, params, 0.0, 100.0) == \
        pytest.approx(0.5 / fastest)
    assert default_dt("imex1", small_grid, params, 0.0, 100.0) == 0.5
    # the horizon cap always gives at least fifty steps
    assert default_dt("imex2", small_grid, params, 0.0, 1.0) == pytest.approx(0.02)


# ---------------------------------------------------------------------------
# simulation driver

def test_exact_mean_transport_under_constant_flux(small_grid):
    params = FluidParams(permeability=2.0, mu_plus=4.0)
    setup = SimulationSetup(grid=small_grid, params=params,
                            boundary=BoundaryData(g2_mean=0.8),
                            initial=InterfaceState.flat(small_grid),
                            t_final=1.0, dt=0.1, stepper="imex1")
    traj = simulate(setup)
    assert traj.status == "completed"
    expect = flat_mean_height(params, 0.8, 1.0)
    assert traj.final_state().mean == pytest.approx(expect, abs=1e-13)
    assert abs(traj.final_state().coefficient(1)) < 1e-13


def test_mean_is_conserved_without_forcing(small_grid, heavy_top_params):
    initial = InterfaceState.from_cosines(small_grid, {1: 0.1, 2: 0.05})
    setup = SimulationSetup(grid=small_grid, params=heavy_top_params,
                            boundary=BoundaryData(), initial=initial,
                            t_final=1.0, dt=0.05, stepper="imex2")
    traj = simulate(setup)
    assert traj.status == "completed"
    assert np.max(np.abs(traj.means())) < 1e-12


def test_illposed_regime_is_refused(small_grid):
    params = FluidParams(rho_plus=2.0)   # heavier on top, no tension
    setup = SimulationSetup(grid=small_grid, params=params,
                            boundary=BoundaryData(),
                            initial=InterfaceState.flat(small_grid),
                            t_final=1.0)
    with pytest.raises(IllPosedRegimeError):
        simulate(setup)


def test_illposed_optin_ends_in_blowup(conv_grid):
    params = FluidParams(rho_plus=3.0)
    initial = InterfaceState.from_cosines(conv_grid, {1: 0.5})
    setup = SimulationSetup(grid=conv_grid, params=params,
                            boundary=BoundaryData(), initial=initial,
                            t_final=3.0, dt=0.05, stepper="rk4",
                            allow_illposed=True)
    traj = simulate(setup)
    assert traj.status == "blowup"
    assert traj.reason
    assert traj.points[-1].t < 3.0


def test_simulate_input_validation(small_grid, heavy_top_params):
    good = dict(grid=small_grid, params=heavy_top_params,
                boundary=BoundaryData(),
                initial=InterfaceState.flat(small_grid))
    with pytest.raises(ValueError):
        simulate(SimulationSetup(t_final=0.0, **good))
    with pytest.raises(ValueError):
        simulate(SimulationSetup(t_final=1.0, stepper="euler", **good))


def test_output_stride_keeps_final_point(small_grid, heavy_top_params):
    initial = InterfaceState.from_cosines(small_grid, {1: 0.1})
    setup = SimulationSetup(grid=small_grid, params=heavy_top_params,
                            boundary=BoundaryData(), initial=initial,
                            t_final=1.0, dt=0.1, stepper="imex1",
                            output_stride=3)
    traj = simulate(setup)
    times = traj.times()
    assert times[0] == 0.0
    assert times[-1] == pytest.approx(1.0)
    assert len(times) < 11


def test_trajectory_views_and_csv(tmp_path, small_grid, heavy_top_params):
    initial = InterfaceState.from_cosines(small_grid, {1: 0.1})
    setup = SimulationSetup(grid=small_grid, params=heavy_top_params,
                            boundary=BoundaryData(), initial=initial,
                            t_final=0.5, dt=0.1, stepper="imex1")
    traj = simulate(setup)
    amp = traj.mode_amplitude(1)
    assert amp[0] == pytest.approx(0.05)   # half the cosine amplitude
    assert np.all(np.diff(amp) < 0.0)      # decays under stabilising data

    path = tmp_path / "traj.csv"
    traj.to_csv(path, m_out=2, comments=["extra"])
    lines = path.read_text().splitlines()
    comments = [l for l in lines if l.startswith("#")]
    assert comments[0] == "# extra"
    assert any("muskatlab trajectory" in c for c in comments)
    header = next(l for l in lines if not l.startswith("#"))
    assert header.split(",") == ["t", "mean", "sup_norm",
                                 "a0_re", "a0_im", "a1_re", "a1_im",
                                 "a2_re", "a2_im"]
    body = [l for l in lines if not l.startswith("#")][1:]
    assert len(body) == len(traj.points)
    first = np.array(body[0].split(","), dtype=float)
    assert first[0] == 0.0 and first[3 + 2] == pytest.approx(0.05)
