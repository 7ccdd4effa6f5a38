"""Command-line entry point.

Each invocation runs one experiment, writes its CSV artifacts into the
output directory and always leaves a run_manifest.json with the fully
resolved config, code version and wall time.  Failures additionally
write error.json and map onto stable exit codes: 2 for config
problems, 3 for numerical failures, 4 for ill-posedness or blow-up
detected in a run that was expected to be parabolic.
"""

from __future__ import annotations

import argparse
import json
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .configio import (config_comments, load_config, make_boundary,
                       make_continuation, make_frame, make_grid, make_initial,
                       make_params)
from .csvio import write_csv
from .elliptic import (capillary_rate, forcing_rate, growth_rate,
                       interface_symbol, lower_trace_response,
                       upper_flux_response)
from .errors import (AdmissibilityError, ConfigError, FitError,
                     IllPosedRegimeError, MuskatError, SolverConvergenceError)
from .evolution import STEPPERS, EvolutionOperator, SimulationSetup, simulate
from .frame import frame_residuals, to_moving_frame
from .interface import InterfaceState
from .params import BoundaryData, Parabolicity, classify_parabolicity
from .spectrum import (basis_labels, discrete_forcing_composition,
                       discrete_forcing_rate, discrete_interface_symbol,
                       discrete_linearization, discrete_mode_rate,
                       fit_decay_rate, linear_spectrum, spectrum_to_csv)
from .steady import branch_stability, branch_to_csv, continue_branch, stability_to_csv

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_REGIME = 4


def _setup_from_config(cfg, grid, params, boundary, initial):
    tsec = cfg["time"]
    if tsec["stepper"] not in STEPPERS:
        known = ", ".join(sorted(STEPPERS))
        raise ConfigError(f"time.stepper must be one of {known}, "
                          f"got {tsec['stepper']!r}")
    return SimulationSetup(grid=grid, params=params, boundary=boundary,
                           initial=initial, t_final=tsec["t_final"],
                           dt=tsec["dt"], stepper=tsec["stepper"],
                           output_stride=tsec["output_stride"],
                           allow_illposed=tsec["allow_illposed"])


def _blowup_record(traj, params, c2):
    """Exit-4 record when a run that should be parabolic blew up."""
    if traj.status != "blowup":
        return None
    if classify_parabolicity(params, c2) is not Parabolicity.WELL_POSED:
        return None
    return {"error": "BlowUp", "message": traj.reason, "exit_code": EXIT_REGIME}


def cmd_simulate(cfg, outdir, seed):
    grid = make_grid(cfg)
    params = make_params(cfg)
    boundary = make_boundary(cfg)
    initial = make_initial(cfg, grid, seed)
    traj = simulate(_setup_from_config(cfg, grid, params, boundary, initial))
    traj.to_csv(outdir / "trajectory.csv", m_out=cfg["output"]["m_out"],
                comments=config_comments(cfg))
    return {"trajectory": "trajectory.csv"}, _blowup_record(traj, params,
                                                            boundary.g2_mean)


def cmd_spectrum(cfg, outdir, seed):
    params = make_params(cfg)
    boundary = make_boundary(cfg)
    entries = linear_spectrum(params, boundary.g2_mean,
                              cfg["output"]["spectrum_m_max"])
    spectrum_to_csv(outdir / "spectrum.csv", entries,
                    comments=config_comments(cfg))
    return {"spectrum": "spectrum.csv"}, None


def cmd_jacobian_check(cfg, outdir, seed):
    grid = make_grid(cfg)
    params = make_params(cfg)
    boundary = make_boundary(cfg)
    m_max = cfg["output"]["jacobian_m_max"]
    jac = discrete_linearization(grid, params, boundary,
                                 InterfaceState.flat(grid), m_max)
    labels = basis_labels(m_max)
    c2 = boundary.g2_mean
    predicted = [0.0]
    for j in range(1, m_max + 1):
        predicted += [growth_rate(j, params, c2)] * 2
    rows = []
    off = jac - np.diag(np.diag(jac))
    for i, label in enumerate(labels):
        rows.append([label, jac[i, i], predicted[i],
                     float(np.max(np.abs(off[i, :])))])
    diag_err = float(np.max(np.abs(np.diag(jac) - np.array(predicted))))
    comments = config_comments(cfg) + [
        f"max_diag_error = {diag_err!r}",
        f"max_offdiag = {float(np.max(np.abs(off)))!r}",
    ]
    write_csv(outdir / "jacobian.csv", comments,
              ["basis", "measured", "predicted", "max_offdiag"], rows)
    return {"jacobian": "jacobian.csv"}, None


def cmd_bifurcate(cfg, outdir, seed):
    grid = make_grid(cfg)
    params = make_params(cfg)
    opts = make_continuation(cfg)
    l = cfg["continuation"]["wavenumber"]
    branch = continue_branch(grid, params, l, opts)
    name = f"branch_l{l}.csv"
    branch_to_csv(outdir / name, branch, params, comments=config_comments(cfg))
    return {"branch": name}, None


def cmd_branch_stability(cfg, outdir, seed):
    grid = make_grid(cfg)
    params = make_params(cfg)
    opts = make_continuation(cfg)
    l = cfg["continuation"]["wavenumber"]
    branch = continue_branch(grid, params, l, opts)
    report = branch_stability(branch, params)
    bname, sname = f"branch_l{l}.csv", f"stability_l{l}.csv"
    branch_to_csv(outdir / bname, branch, params, comments=config_comments(cfg))
    stability_to_csv(outdir / sname, report, comments=config_comments(cfg))
    return {"branch": bname, "stability": sname}, None


_RESIDUAL_KEYS = ("interior_lower", "interior_upper", "top", "bottom",
                  "jump", "kinematic_lower", "kinematic_upper")


def cmd_moving_frame(cfg, outdir, seed):
    grid = make_grid(cfg)
    params = make_params(cfg)
    fcfg = make_frame(cfg, params)
    boundary = BoundaryData(g1_mean=fcfg.bottom_potential)
    initial = make_initial(cfg, grid, seed)
    traj = simulate(_setup_from_config(cfg, grid, params, boundary, initial))
    moving = to_moving_frame(traj, fcfg, params)
    moving.to_csv(outdir / "moving.csv", m_out=cfg["output"]["m_out"],
                  comments=config_comments(cfg))

    op = EvolutionOperator(grid, params, boundary)
    count = min(5, len(moving.points))
    idx = sorted(set(np.linspace(0, len(moving.points) - 1, count).round()
                     .astype(int).tolist()))
    rows = []
    for i in idx:
        point = moving.points[i]
        res = frame_residuals(op, point, fcfg)
        rows.append([point.t] + [res[k] for k in _RESIDUAL_KEYS])
    write_csv(outdir / "frame_residuals.csv", config_comments(cfg),
              ["t", *_RESIDUAL_KEYS], rows)
    outputs = {"moving": "moving.csv", "residuals": "frame_residuals.csv"}
    return outputs, _blowup_record(traj, params, 0.0)


def cmd_oracle_check(cfg, outdir, seed, m_max=8, tol=1e-8):
    grid = make_grid(cfg)
    params = make_params(cfg)
    quiet = BoundaryData()
    rows = []
    worst = 0.0
    for m in range(m_max + 1):
        checks = [
            ("interface_symbol", discrete_interface_symbol(grid, params, m),
             interface_symbol(m, params)),
            ("layer_composition", discrete_forcing_composition(grid, params, m),
             lower_trace_response(m, params) * upper_flux_response(m, params)),
            ("capillary_rate", discrete_mode_rate(grid, params, quiet, m),
             capillary_rate(m, params)),
            ("forcing_rate", discrete_forcing_rate(grid, params, 1.0, m),
             forcing_rate(m, params, 1.0)),
        ]
        for name, measured, expected in checks:
            denom = abs(expected) if abs(expected) > tol else 1.0
            err = float(abs(measured - expected) / denom)
            worst = max(worst, err)
            rows.append([name, m, measured, expected, err])
    comments = config_comments(cfg) + [f"tolerance = {tol!r}",
                                       f"worst_error = {worst!r}"]
    write_csv(outdir / "oracle.csv", comments,
              ["check", "m", "measured", "expected", "error"], rows)
    outputs = {"oracle": "oracle.csv"}
    if worst > tol:
        return outputs, {"error": "OracleMismatch",
                         "message": f"worst relative error {worst:.3e} exceeds "
                                    f"{tol:.1e}", "exit_code": EXIT_NUMERICAL}
    return outputs, None


def cmd_illposed_demo(cfg, outdir, seed, modes=(1, 2, 4, 8),
                      amplitude=1e-6, t_final=0.5, dt=0.01):
    grid = make_grid(cfg)
    params = replace(make_params(cfg), surface_tension=0.0)
    if classify_parabolicity(params, 0.0) is not Parabolicity.ILL_POSED:
        raise ConfigError("the demonstration needs rho_plus > rho_minus so the "
                          "zero-surface-tension problem is backward parabolic")
    modes = tuple(m for m in modes if m <= grid.dealias_cutoff)
    initial = InterfaceState.from_cosines(grid, {m: amplitude for m in modes})
    setup = SimulationSetup(grid=grid, params=params, boundary=BoundaryData(),
                            initial=initial, t_final=t_final, dt=dt,
                            stepper="rk4", allow_illposed=True)
    traj = simulate(setup)
    rows = []
    for m in modes:
        fit = fit_decay_rate(traj, m, window=(0.0, t_final))
        rows.append([m, fit.rate, growth_rate(m, params, 0.0)])
    comments = config_comments(cfg) + [
        "surface_tension forced to 0 for the demonstration",
        f"amplitude = {amplitude!r}, t_final = {t_final!r}, dt = {dt!r}, "
        "stepper = rk4",
    ]
    write_csv(outdir / "illposed.csv", comments,
              ["mode", "rate", "predicted"], rows)
    return {"illposed": "illposed.csv"}, None


COMMANDS = {
    "simulate": cmd_simulate,
    "spectrum": cmd_spectrum,
    "jacobian-check": cmd_jacobian_check,
    "bifurcate": cmd_bifurcate,
    "branch-stability": cmd_branch_stability,
    "moving-frame": cmd_moving_frame,
    "oracle-check": cmd_oracle_check,
    "illposed-demo": cmd_illposed_demo,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="muskatlab",
        description="Two-phase porous-medium interface laboratory")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", default=None, metavar="PATH",
                        help="TOML config file; defaults apply when omitted")
    parser.add_argument("--out", default=".", metavar="DIR",
                        help="output directory for CSVs and the manifest")
    parser.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="KEY=VALUE",
                        help="override one config entry, e.g. time.dt=0.01")
    parser.add_argument("--seed", type=int, default=None,
                        help="overrides initial.seed for random initial data")
    return parser


def _exit_code_for(exc) -> int:
    # LinAlgError subclasses ValueError, so the numerical bucket goes first
    if isinstance(exc, (SolverConvergenceError, AdmissibilityError, FitError,
                        np.linalg.LinAlgError)):
        return EXIT_NUMERICAL
    if isinstance(exc, IllPosedRegimeError):
        return EXIT_REGIME
    if isinstance(exc, ConfigError) or isinstance(exc, ValueError):
        return EXIT_CONFIG
    return EXIT_FAILURE


def _write_error(outdir: Path, record: dict) -> None:
    with open(outdir / "error.json", "w", encoding="utf-8") as fh:
        json.dump(record, fh, indent=2)
        fh.write("\n")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()
    manifest = {
        "command": args.command,
        "version": __version__,
        "seed": args.seed,
        "status": "error",
        "exit_code": EXIT_FAILURE,
        "outputs": {},
    }
    try:
        cfg = load_config(args.config, args.overrides)
        manifest["config"] = cfg
        outputs, failure = COMMANDS[args.command](cfg, outdir, args.seed)
        manifest["outputs"] = outputs
        if failure is None:
            manifest["status"] = "ok"
            manifest["exit_code"] = EXIT_OK
        else:
            manifest["error"] = failure
            manifest["exit_code"] = failure["exit_code"]
            _write_error(outdir, failure)
    except (MuskatError, ValueError, np.linalg.LinAlgError) as exc:
        code = _exit_code_for(exc)
        record = {"error": type(exc).__name__, "message": str(exc),
                  "exit_code": code}
        manifest["error"] = record
        manifest["exit_code"] = code
        _write_error(outdir, record)
    finally:
        manifest["wall_time_s"] = round(time.perf_counter() - started, 6)
        with open(outdir / "run_manifest.json", "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2)
            fh.write("\n")
    return manifest["exit_code"]


if __name__ == "__main__":
    raise SystemExit(main())
