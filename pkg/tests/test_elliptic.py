import numpy as np
import pytest

from muskatlab import (FlatResponse, FluidParams, InterfaceOperator,
                       InterfaceState, LayerContext, Side,
                       SolverConvergenceError, capillary_rate,
                       capillary_solution, dealias, capillary_datum,
                       flat_response, forcing_rate, growth_rate,
                       interface_symbol, layer_residuals, lower_trace_response,
                       cosine_coefficient, solve_layer, solve_lower,
                       solve_upper, upper_flux_response)


# ---------------------------------------------------------------------------
# closed-form multipliers

def test_lower_trace_response_values(contrast_params):
    p = contrast_params
    assert lower_trace_response(0, p) == pytest.approx(p.mu_minus / p.permeability)
    t = np.tanh(3.0)
    assert lower_trace_response(3, p) == pytest.approx(p.mu_minus * t / 3.0)
    assert lower_trace_response(-3, p) == lower_trace_response(3, p)


def test_upper_flux_response_values(contrast_params):
    p = contrast_params
    assert upper_flux_response(0, p) == 0.0
    assert upper_flux_response(2, p) == pytest.approx(-2.0 * np.tanh(2.0) / p.mu_plus)


def test_interface_symbol_oracle():
    p = FluidParams(mu_minus=2.0)
    assert interface_symbol(1, p) == pytest.approx(2.1600513167719475, rel=1e-14)
    assert interface_symbol(0, p) == 1.0


def test_growth_rate_oracle():
    p = FluidParams(rho_plus=0.5, surface_tension=1.0)
    assert growth_rate(1, p) == pytest.approx(-0.7230206850568627, rel=1e-14)
    assert growth_rate(0, p) == 0.0
    assert growth_rate(-1, p) == growth_rate(1, p)


def test_growth_rate_splits_into_parts(contrast_params):
    p = contrast_params
    for m in (1, 2, 5):
        assert growth_rate(m, p, 0.7) == pytest.approx(
            capillary_rate(m, p) + forcing_rate(m, p, 0.7), rel=1e-15)


def test_forcing_rate_sign_follows_viscosity_contrast():
    thick_below = FluidParams(mu_minus=2.0, mu_plus=1.0)
    thin_below = FluidParams(mu_minus=1.0, mu_plus=2.0)
    assert forcing_rate(1, thick_below, 1.0) > 0.0
    assert forcing_rate(1, thin_below, 1.0) < 0.0
    assert forcing_rate(1, FluidParams(), 1.0) == 0.0


def test_flat_response_dispatch(contrast_params):
    p = contrast_params
    cases = [
        (FlatResponse.LOWER_TRACE, lower_trace_response(2, p)),
        (FlatResponse.UPPER_FLUX, upper_flux_response(2, p)),
        (FlatResponse.INTERFACE_OP, interface_symbol(2, p)),
        (FlatResponse.CAPILLARY_RATE, capillary_rate(2, p)),
    ]
    for kind, expect in cases:
        assert flat_response(kind, 2, p) == expect
    assert flat_response(FlatResponse.FORCING_RATE, 2, p, c2=0.4) == \
        forcing_rate(2, p, 0.4)


# ---------------------------------------------------------------------------
# flat solves against the closed forms

@pytest.mark.parametrize("m", [0, 1, 2, 5])
def test_flat_lower_trace_matches_symbol(medium_grid, contrast_params, m):
    g = medium_grid
    flat = InterfaceState.flat(g)
    datum = np.cos(m * g.x) if m else np.ones(g.num_x)
    field = solve_lower(g, contrast_params, flat, flux=datum)
    got = field.interface_trace()
    expect = lower_trace_response(m, contrast_params) * datum
    assert np.max(np.abs(got - expect)) < 1e-8 * max(np.max(np.abs(expect)), 1.0)


@pytest.mark.parametrize("m", [1, 2, 5])
def test_flat_upper_flux_matches_symbol(medium_grid, contrast_params, m):
    g = medium_grid
    flat = InterfaceState.flat(g)
    ctx = LayerContext(g, contrast_params, flat, Side.UPPER)
    datum = np.cos(m * g.x)
    field = solve_upper(g, contrast_params, flat, interface=datum, ctx=ctx)
    got = ctx.kinematic_flux(field.values)
    expect = upper_flux_response(m, contrast_params) * datum
    assert np.max(np.abs(got - expect)) < 1e-8 * np.max(np.abs(expect))


def test_constant_data_are_reproduced_exactly(small_grid, contrast_params):
    g = small_grid
    flat = InterfaceState.flat(g)
    lower = solve_lower(g, contrast_params, flat, bottom=2.5)
    np.testing.assert_array_equal(lower.values,
                                  np.full((g.num_x, g.num_vertical), 2.5))
    upper = solve_upper(g, contrast_params, flat, interface=-1.5)
    np.testing.assert_array_equal(upper.values,
                                  np.full((g.num_x, g.num_vertical), -1.5))


def test_constant_bottom_shortcut_holds_for_bent_states(medium_grid, contrast_params):
    g = medium_grid
    state = InterfaceState.from_cosines(g, {1: 0.1})
    lower = solve_lower(g, contrast_params, state, bottom=3.0)
    np.testing.assert_array_equal(lower.values,
                                  np.full((g.num_x, g.num_vertical), 3.0))


def test_solution_is_linear_in_the_data(medium_grid, contrast_params):
    g = medium_grid
    state = InterfaceState.from_cosines(g, {1: 0.05})
    ctx = LayerContext(g, contrast_params, state, Side.LOWER)
    q1 = np.cos(g.x)
    q2 = np.sin(2.0 * g.x)
    a = solve_lower(g, contrast_params, state, flux=q1, ctx=ctx)
    b = solve_lower(g, contrast_params, state, flux=q2, ctx=ctx)
    both = solve_lower(g, contrast_params, state, flux=q1 + 2.0 * q2, ctx=ctx)
    np.testing.assert_allclose(both.values, a.values + 2.0 * b.values,
                               atol=1e-10)


def test_strip_field_traces(small_grid, contrast_params):
    g = small_grid
    flat = InterfaceState.flat(g)
    field = solve_upper(g, contrast_params, flat, interface=np.cos(g.x))
    np.testing.assert_allclose(field.interface_trace(), np.cos(g.x), atol=1e-10)
    assert field.outer_trace().shape == (g.num_x,)


# ---------------------------------------------------------------------------
# bent-interface solves against manufactured solutions

def reference_harmonic(grid, state, side, m, sign):
    """Pullback of the harmonic exp(sign*m*y) cos(m x) to the strip."""
    s = side.orientation
    y_ref = grid.y_nodes(side)[None, :]
    y_phys = y_ref + (1.0 - s * y_ref) * state.values[:, None]
    return np.exp(sign * m * y_phys) * np.cos(m * grid.x)[:, None]


@pytest.mark.parametrize("side", [Side.LOWER, Side.UPPER])
def test_manufactured_solution_recovered(medium_grid, contrast_params, side):
    g = medium_grid
    state = InterfaceState.from_cosines(g, {1: 0.02})
    ctx = LayerContext(g, contrast_params, state, side)
    exact = reference_harmonic(g, state, side, 2, 1)
    scale = np.max(np.abs(exact))
    if side is Side.LOWER:
        got = solve_lower(g, contrast_params, state,
                          flux=ctx.kinematic_flux(exact),
                          bottom=exact[:, 0], ctx=ctx)
    else:
        got = solve_upper(g, contrast_params, state,
                          interface=exact[:, 0],
                          top_flux=ctx.apply_flux_row(exact), ctx=ctx)
    # the manufactured field satisfies the interior equation only up to
    # the pullback truncation error, so the match is spectral, not exact
    assert np.max(np.abs(got.values - exact)) < 1e-7 * scale


@pytest.mark.parametrize("side", [Side.LOWER, Side.UPPER])
def test_solve_meets_row_residual_contract(medium_grid, contrast_params, side, rng):
    g = medium_grid
    state = InterfaceState.from_cosines(g, {1: 0.05, 2: 0.02})
    ctx = LayerContext(g, contrast_params, state, side)
    datum = dealias(g, rng.standard_normal(g.num_x))
    sol = solve_layer(ctx, flux=datum)
    res = layer_residuals(ctx, sol, flux=datum)
    scale = max(np.max(np.abs(sol)), 1.0)
    assert res["dirichlet"] < 1e-9 * scale
    assert res["flux"] < 1e-9 * scale
    assert res["interior"] < 1e-8 * scale


def test_capillary_solution_extends_jump_datum(medium_grid, heavy_top_params):
    g = medium_grid
    state = InterfaceState.from_cosines(g, {1: 0.05})
    field = capillary_solution(g, heavy_top_params, state)
    datum = capillary_datum(state, heavy_top_params)
    np.testing.assert_allclose(field.interface_trace(), datum, atol=1e-9)


# ---------------------------------------------------------------------------
# interface operator

@pytest.mark.parametrize("m", [0, 1, 2, 5])
def test_interface_operator_flat_symbol(medium_grid, contrast_params, m):
    g = medium_grid
    iop = InterfaceOperator(g, contrast_params, InterfaceState.flat(g))
    q = np.cos(m * g.x) if m else np.ones(g.num_x)
    out = iop.apply(q)
    expect = interface_symbol(m, contrast_params) * q
    assert np.max(np.abs(out - expect)) < 1e-8


def test_interface_operator_solve_flat_round_trip(medium_grid, contrast_params, rng):
    g = medium_grid
    iop = InterfaceOperator(g, contrast_params, InterfaceState.flat(g))
    p = dealias(g, rng.standard_normal(g.num_x))
    q = iop.solve(p)
    assert np.isrealobj(q)
    res = np.max(np.abs(iop.apply(q) - p)) / np.max(np.abs(p))
    assert res <= iop.tol


def test_interface_operator_solve_bent_round_trip(medium_grid, contrast_params, rng):
    g = medium_grid
    state = InterfaceState.from_cosines(g, {1: 0.1, 3: 0.03})
    iop = InterfaceOperator(g, contrast_params, state)
    p = dealias(g, rng.standard_normal(g.num_x))
    q = iop.solve(p)
    res = np.max(np.abs(iop.apply(q) - p)) / np.max(np.abs(p))
    assert res <= iop.tol


def test_interface_operator_zero_input(medium_grid, contrast_params):
    g = medium_grid
    iop = InterfaceOperator(g, contrast_params, InterfaceState.flat(g))
    out = iop.solve(np.zeros(g.num_x))
    np.testing.assert_array_equal(out, np.zeros(g.num_x))


def test_interface_operator_preserves_constants(medium_grid, contrast_params):
    # the mean mode has symbol one, so constants pass through untouched
    g = medium_grid
    iop = InterfaceOperator(g, contrast_params, InterfaceState.flat(g))
    q = np.full(g.num_x, 0.3)
    np.testing.assert_allclose(iop.apply(q), q, atol=1e-12)


def test_interface_operator_unattainable_tolerance_raises(medium_grid,
                                                          contrast_params):
    g = medium_grid
    state = InterfaceState.from_cosines(g, {1: 0.1})
    iop = InterfaceOperator(g, contrast_params, state, tol=1e-16)
    with pytest.raises(SolverConvergenceError) as err:
        iop.solve(np.cos(g.x))
    assert err.value.residual is not None and err.value.residual > 1e-16
