"""Spectral laboratory for a two-phase porous-medium interface.

A periodic strip holds two immiscible fluids separated by a graph
interface.  The package provides the straightened-domain elliptic
solvers, the interface evolution operator with IMEX and Runge-Kutta
steppers, closed-form linearised rates with matching discrete probes,
steady finger branches by pseudo-arclength continuation, and the view
of a run in a vertically translating frame.
"""

__version__ = "0.1.0"

from .errors import (AdmissibilityError, ConfigError, FitError,
                     IllPosedRegimeError, MuskatError, SolverConvergenceError)
from .grid import (Side, SpectralGrid, chebyshev_lobatto, cosine_coefficient,
                   dealias, fourier_coeffs, mean_value, sine_coefficient,
                   values_from_coeffs, x_derivative, y_derivative)
from .params import (BoundaryData, FluidParams, Parabolicity,
                     classify_parabolicity, optimal_velocity)
from .interface import (ADMISSIBLE_MARGIN, InterfaceState, capillary_datum,
                        curvature)
from .operators import (MapDirection, OperatorCoefficients, apply_operator,
                        assemble_coefficients, interface_flux, map_coordinates,
                        top_flux)
from .elliptic import (DEFAULT_INTERFACE_TOL, DEFAULT_LAYER_TOL, FlatResponse,
                       InterfaceOperator, LayerContext, StripField,
                       capillary_rate, capillary_solution, flat_response,
                       forcing_rate, growth_rate, interface_symbol,
                       layer_residuals, lower_trace_response, solve_layer,
                       solve_lower, solve_upper, upper_flux_response)
from .evolution import (STEPPERS, EvolutionOperator, SimulationSetup,
                        Trajectory, TrajectoryPoint, default_dt,
                        flat_mean_height, linear_rates, simulate)
from .spectrum import (DecayFit, SpectrumEntry, basis_labels,
                       discrete_forcing_composition, discrete_forcing_rate,
                       discrete_interface_symbol, discrete_linearization,
                       discrete_mode_rate, even_linearization, fit_decay_rate,
                       fits_to_csv, linear_spectrum, spectrum_to_csv)
from .steady import (BifurcationPoint, Branch, BranchPoint, ContinuationOptions,
                     StabilityEntry, StabilityReport, branch_stability,
                     branch_to_csv, continue_branch, detect_bifurcation_points,
                     fixed_point_residual, fp_multiplier, fp_multiplier_fd,
                     onset_rate_slope, onset_surface_tension, sine_residual,
                     stability_to_csv, supercritical_coefficient, synthesize)
from .frame import (MovingFrameConfig, MovingFramePoint, MovingTrajectory,
                    TravelingCheck, bottom_velocity_gap, frame_residuals,
                    to_moving_frame, traveling_decay_check)
from .configio import (DEFAULTS, config_comments, load_config, make_boundary,
                       make_continuation, make_frame, make_grid, make_initial,
                       make_params)

__all__ = [name for name in dir() if not name.startswith("_")]
