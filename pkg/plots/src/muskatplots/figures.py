"""Figure rendering for the four supported plot kinds.

Figures are built on explicit Figure objects (no pyplot state) and
saved without timestamps or tool-version metadata, so re-rendering the
same inputs reproduces the image byte for byte.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple

import matplotlib
import numpy as np
from matplotlib.figure import Figure

from .tables import (branch_onset, branch_wavenumber, read_branch, read_fits,
                     read_spectrum, read_trajectory,
                     trajectory_mode_amplitude)

FIGSIZE = (6.4, 4.2)
SOFTWARE_TAG = "muskat-plots"


@dataclass(frozen=True)
class PlotJob:
    """One figure: input CSVs, the kind to render, where to save it."""

    kind: str                       # bifurcation | finger | spectrum | decay
    inputs: Tuple[Path, ...]
    output: Path
    mode: int = 1                   # tracked coefficient for decay plots
    title: Optional[str] = None
    dpi: int = 150


def _save(fig: Figure, output: Path, dpi: int) -> None:
    suffix = output.suffix.lower()
    if suffix == ".png":
        fig.savefig(output, dpi=dpi, metadata={"Software": SOFTWARE_TAG})
    elif suffix == ".svg":
        with matplotlib.rc_context({"svg.hashsalt": SOFTWARE_TAG}):
            fig.savefig(output, metadata={"Date": None,
                                          "Creator": SOFTWARE_TAG})
    else:
        raise ValueError(f"unsupported output format {suffix!r}; "
                         "use .png or .svg")


def _new_axes(title: Optional[str]):
    fig = Figure(figsize=FIGSIZE, constrained_layout=True)
    ax = fig.subplots()
    if title:
        ax.set_title(title)
    return fig, ax


def _require_inputs(job: PlotJob, low: int, high: int) -> None:
    n = len(job.inputs)
    if not low <= n <= high:
        wanted = str(low) if low == high else f"{low} to {high}"
        raise ValueError(f"{job.kind} takes {wanted} input file(s), got {n}")


def _render_bifurcation(job: PlotJob) -> Figure:
    _require_inputs(job, 1, 8)
    tables = [read_branch(p) for p in job.inputs]
    fig, ax = _new_axes(job.title or "Finger branches")
    gamma_range = [np.inf, -np.inf]
    for table in tables:
        gamma, eps = table.column("gamma"), table.column("epsilon")
        label = f"mode {branch_wavenumber(table)}" \
            if table.comment_value("wavenumber_l") else table.path.stem
        ax.plot(gamma, eps, marker="o", markersize=3, label=label)
        onset = branch_onset(table)
        if onset is not None:
            ax.plot([onset], [0.0], marker="x", markersize=8, color="black",
                    zorder=5)
        gamma_range = [min(gamma_range[0], gamma.min()),
                       max(gamma_range[1], gamma.max())]
    ax.axhline(0.0, color="0.5", linewidth=1.0, label="flat interface")
    ax.set_xlabel("surface tension")
    ax.set_ylabel("finger amplitude")
    ax.legend(loc="upper left")
    return fig


def _render_finger(job: PlotJob) -> Figure:
    _require_inputs(job, 1, 1)
    table = read_branch(job.inputs[0])
    l = branch_wavenumber(table)
    eps = table.column("epsilon")
    # leading-order profiles at three stations along the branch
    idx = sorted(set(np.linspace(0, len(eps) - 1, 3).round().astype(int)))
    x = np.linspace(0.0, 2.0 * np.pi, 513)
    fig, ax = _new_axes(job.title or f"Steady finger, mode {l}")
    for i in idx:
        ax.plot(x, eps[i] * np.cos(l * x),
                label=f"amplitude {eps[i]:.3g}")
    for y in (-1.0, 1.0):
        ax.axhline(y, color="black", linewidth=1.5)
    for xv in (0.0, 2.0 * np.pi):
        ax.axvline(xv, color="black", linewidth=1.5)
    ax.set_xlim(-0.2, 2.0 * np.pi + 0.2)
    ax.set_ylim(-1.25, 1.25)
    ax.set_xlabel("x over one period")
    ax.set_ylabel("interface height")
    ax.legend(loc="upper right")
    return fig


def _render_spectrum(job: PlotJob) -> Figure:
    _require_inputs(job, 1, 1)
    table = read_spectrum(job.inputs[0])
    fig, ax = _new_axes(job.title or "Linearised growth rates")
    ax.plot(table.column("m"), table.column("rate"), marker="o")
    ax.axhline(0.0, color="0.5", linewidth=1.0)
    ax.set_xlabel("mode")
    ax.set_ylabel("growth rate")
    return fig


def _render_decay(job: PlotJob) -> Figure:
    _require_inputs(job, 1, 2)
    traj = read_trajectory(job.inputs[0])
    fits = read_fits(job.inputs[1]) if len(job.inputs) > 1 else None
    t = traj.column("t")
    amp = trajectory_mode_amplitude(traj, job.mode)
    fig, ax = _new_axes(job.title or f"Mode {job.mode} amplitude")
    ax.semilogy(t, amp, marker=".", label="measured")
    if fits is not None:
        match = fits.rows[fits.column("mode") == job.mode]
        if len(match) == 0:
            raise ValueError(f"{fits.path}: no fit entry for mode {job.mode}")
        rate, t0, t1 = match[0][1], match[0][2], match[0][3]
        inside = (t >= t0) & (t <= t1)
        if np.any(inside):
            ta, aa = t[inside][0], amp[inside][0]
            ts = np.linspace(t0, t1, 64)
            ax.semilogy(ts, aa * np.exp(rate * (ts - ta)), "--",
                        label=f"fit rate {rate:.4g}")
    ax.set_xlabel("t")
    ax.set_ylabel("amplitude")
    ax.legend(loc="best")
    return fig


KINDS = {
    "bifurcation": _render_bifurcation,
    "finger": _render_finger,
    "spectrum": _render_spectrum,
    "decay": _render_decay,
}


def render(job: PlotJob) -> Path:
    """Validate the inputs, draw the figure, write the image.

    All reading and validation happens before the output is touched, so
    a rejected input never leaves a file behind.
    """
    try:
        builder = KINDS[job.kind]
    except KeyError:
        raise ValueError(f"unknown plot kind {job.kind!r}; "
                         f"choose from {', '.join(sorted(KINDS))}") from None
    output = Path(job.output)
    if output.suffix.lower() not in (".png", ".svg"):
        raise ValueError(f"unsupported output format {output.suffix!r}; "
                         "use .png or .svg")
    fig = builder(job)
    _save(fig, output, job.dpi)
    return output
