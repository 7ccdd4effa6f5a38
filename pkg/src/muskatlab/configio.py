"""Config loading: nested TOML sections with documented defaults.

Every run is described by one table per concern; unknown sections or
keys are rejected by name so typos cannot silently fall back to a
default.  Dotted --set overrides reuse the same validation and coerce
to the type of the default they replace.
"""

from __future__ import annotations

import copy
import math

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:        # python < 3.11
    import tomli as tomllib

from .errors import ConfigError
from .frame import MovingFrameConfig
from .grid import SpectralGrid
from .interface import InterfaceState
from .params import BoundaryData, FluidParams
from .steady import ContinuationOptions

DEFAULTS = {
    "fluids": {
        "permeability": 1.0,
        "mu_minus": 1.0,
        "mu_plus": 1.0,
        "rho_minus": 1.0,
        "rho_plus": 2.0,
        "gravity": 1.0,
        "surface_tension": 1.5,
    },
    "boundary": {
        "g1_mean": 0.0,
        "g2_mean": 0.0,
        "g2_sin_amplitude": 0.0,   # adds g2_sin_amplitude*sin(w t + phase)
        "g2_sin_omega": 1.0,
        "g2_sin_phase": 0.0,
    },
    "grid": {
        "num_modes": 64,
        "num_vertical": 32,
    },
    "time": {
        "dt": 0.0,                 # 0 picks the stepper default
        "t_final": 1.0,
        "stepper": "imex1",
        "output_stride": 1,
        "allow_illposed": False,
    },
    "initial": {
        "kind": "zero",            # zero | cosine | random
        "amplitude": 1e-3,
        "mode": 1,
        "max_mode": 8,
        "decay": 0.5,
        "seed": 0,
    },
    "continuation": {
        "wavenumber": 1,
        "eps0": 1e-3,
        "ds0": 5e-3,
        "ds_min": 1e-4,
        "ds_max": 5e-2,
        "newton_tol": 1e-10,
        "newton_maxiter": 25,
        "max_points": 40,
        "eps_max": 0.35,
        "eig_count": 4,
        "eig_modes": 16,
        "eig_stride": 1,
        "l_max": 4,
    },
    "frame": {
        "velocity": 0.5,
        "bottom_potential": 0.0,
    },
    "output": {
        "m_out": 8,
        "spectrum_m_max": 32,
        "jacobian_m_max": 8,
        "fit_mode": 1,
    },
}


def _merge(target: dict, incoming: dict) -> None:
    for section, body in incoming.items():
        if section not in target:
            raise ConfigError(f"unknown config section [{section}]")
        if not isinstance(body, dict):
            raise ConfigError(f"section [{section}] must be a table")
        for key, value in body.items():
            if key not in target[section]:
                raise ConfigError(f"unknown config key {section}.{key}")
            target[section][key] = _coerce(section, key, value,
                                           target[section][key])


def _coerce(section, key, value, default):
    name = f"{section}.{key}"
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{name} must be a boolean, got {value!r}")
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{name} must be an integer, got {value!r}")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{name} must be a number, got {value!r}")
        return float(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(f"{name} must be a string, got {value!r}")
        return value
    raise ConfigError(f"{name} has unsupported default type")   # pragma: no cover


def _parse_override(item: str):
    if "=" not in item:
        raise ConfigError(f"override {item!r} is not of the form key=value")
    path, raw = item.split("=", 1)
    parts = path.strip().split(".")
    if len(parts) != 2:
        raise ConfigError(f"override key {path!r} must be section.key")
    return parts[0].strip(), parts[1].strip(), raw.strip()


def _override_value(section, key, raw, default):
    name = f"{section}.{key}"
    if isinstance(default, bool):
        low = raw.lower()
        if low in ("true", "1", "yes"):
            return True
        if low in ("false", "0", "no"):
            return False
        raise ConfigError(f"{name} must be a boolean, got {raw!r}")
    try:
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
    except ValueError:
        raise ConfigError(f"{name}: cannot parse {raw!r}") from None
    return raw


def load_config(path=None, overrides=()) -> dict:
    """Defaults, optionally updated from a TOML file and --set overrides."""
    cfg = copy.deepcopy(DEFAULTS)
    if path is not None:
        try:
            with open(path, "rb") as fh:
                data = tomllib.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid TOML: {exc}") from None
        _merge(cfg, data)
    for item in overrides:
        section, key, raw = _parse_override(item)
        if section not in cfg or key not in cfg[section]:
            raise ConfigError(f"unknown config key {section}.{key}")
        cfg[section][key] = _override_value(section, key, raw, cfg[section][key])
    return cfg


def config_comments(cfg: dict) -> list:
    """Flat `section.key = value` lines for CSV headers."""
    lines = []
    for section in cfg:
        for key, value in cfg[section].items():
            lines.append(f"{section}.{key} = {value!r}")
    return lines


# ---------------------------------------------------------------------------
# builders

def make_grid(cfg: dict) -> SpectralGrid:
    sec = cfg["grid"]
    try:
        return SpectralGrid(num_modes=sec["num_modes"],
                            num_vertical=sec["num_vertical"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def make_params(cfg: dict) -> FluidParams:
    try:
        return FluidParams(**cfg["fluids"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def make_boundary(cfg: dict) -> BoundaryData:
    sec = cfg["boundary"]
    pert = None
    amp = sec["g2_sin_amplitude"]
    if amp != 0.0:
        omega, phase = sec["g2_sin_omega"], sec["g2_sin_phase"]

        def pert(t, x):
            return amp * math.sin(omega * t + phase) * np.ones_like(x)

    return BoundaryData(g1_mean=sec["g1_mean"], g2_mean=sec["g2_mean"],
                        g2_perturbation=pert)


def make_initial(cfg: dict, grid: SpectralGrid, seed=None) -> InterfaceState:
    sec = cfg["initial"]
    kind = sec["kind"]
    if kind == "zero":
        return InterfaceState.flat(grid, 0.0)
    if kind == "cosine":
        return InterfaceState.from_cosines(grid, {sec["mode"]: sec["amplitude"]})
    if kind == "random":
        effective = sec["seed"] if seed is None else seed
        rng = np.random.default_rng(effective)
        return InterfaceState.from_random_modes(grid, rng, sec["max_mode"],
                                                sec["amplitude"], sec["decay"])
    raise ConfigError(f"initial.kind must be zero, cosine or random, got {kind!r}")


def make_continuation(cfg: dict) -> ContinuationOptions:
    sec = cfg["continuation"]
    return ContinuationOptions(
        eps0=sec["eps0"], ds0=sec["ds0"], ds_min=sec["ds_min"],
        ds_max=sec["ds_max"], newton_tol=sec["newton_tol"],
        newton_maxiter=sec["newton_maxiter"], max_points=sec["max_points"],
        eps_max=sec["eps_max"], eig_count=sec["eig_count"],
        eig_modes=sec["eig_modes"], eig_stride=sec["eig_stride"])


def make_frame(cfg: dict, params: FluidParams) -> MovingFrameConfig:
    sec = cfg["frame"]
    try:
        return MovingFrameConfig.from_params(params, sec["velocity"],
                                             sec["bottom_potential"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
