"""Reading and validating the CSV artifacts written by muskatlab.

Files start with '#' comment lines (key = value metadata among them),
then a header row and float data.  Every reader here rejects inputs
whose header does not match the emitting module's documented schema,
so a figure can never be built from the wrong kind of file.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np


class PlotInputError(Exception):
    """Structured rejection of an input file."""

    def __init__(self, path, detail: str):
        self.path = Path(path)
        self.detail = detail
        super().__init__(f"{self.path}: {detail}")


class SchemaError(PlotInputError):
    pass


class EmptyInputError(PlotInputError):
    def __init__(self, path):
        super().__init__(path, "no data rows")


@dataclass(frozen=True)
class CsvTable:
    path: Path
    comments: Tuple[str, ...]
    header: Tuple[str, ...]
    rows: np.ndarray             # (n_rows, n_columns) floats

    def column(self, name: str) -> np.ndarray:
        return self.rows[:, self.header.index(name)]

    def comment_value(self, key: str) -> Optional[str]:
        prefix = f"{key} = "
        for c in self.comments:
            if c.startswith(prefix):
                return c[len(prefix):]
        return None


def read_table(path) -> CsvTable:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise PlotInputError(path,
                             f"cannot read input ({exc.strerror or exc})") \
            from None
    lines = [l for l in text.splitlines() if l]
    comments = tuple(l[1:].strip() for l in lines if l.startswith("#"))
    body = [l for l in lines if not l.startswith("#")]
    if not body:
        raise EmptyInputError(path)
    header = tuple(body[0].split(","))
    rows = []
    for line in body[1:]:
        cells = line.split(",")
        if len(cells) != len(header):
            raise SchemaError(path, f"row with {len(cells)} cells under a "
                                    f"{len(header)}-column header")
        try:
            rows.append([float(c) for c in cells])
        except ValueError:
            raise SchemaError(path, f"non-numeric cell in row {line!r}") from None
    if not rows:
        raise EmptyInputError(path)
    return CsvTable(path, comments, header, np.array(rows))


# ---------------------------------------------------------------------------
# per-artifact schemas

BRANCH_HEADER = ("gamma", "epsilon", "sup_norm", "leading_eig_1",
                 "leading_eig_2", "leading_eig_3", "leading_eig_4", "residual")
SPECTRUM_HEADER = ("m", "rate")
FITS_HEADER = ("mode", "rate", "window_start", "window_end", "residual")


def _expect(table: CsvTable, header: Tuple[str, ...], what: str) -> CsvTable:
    if table.header != header:
        raise SchemaError(table.path,
                          f"not a {what} file; expected columns "
                          f"{','.join(header)}, found {','.join(table.header)}")
    return table


def read_branch(path) -> CsvTable:
    return _expect(read_table(path), BRANCH_HEADER, "branch")


def read_spectrum(path) -> CsvTable:
    return _expect(read_table(path), SPECTRUM_HEADER, "spectrum")


def read_fits(path) -> CsvTable:
    return _expect(read_table(path), FITS_HEADER, "decay-fit")


def read_trajectory(path) -> CsvTable:
    """Trajectory files carry t, mean, sup_norm, then coefficient pairs
    a0_re, a0_im, ...; moving-frame exports append a final tV column."""
    table = read_table(path)
    names = list(table.header)
    if names and names[-1] == "tV":
        names = names[:-1]
    ok = names[:3] == ["t", "mean", "sup_norm"] and len(names) > 3 \
        and len(names) % 2 == 1
    if ok:
        for k, name in enumerate(names[3:]):
            part = "re" if k % 2 == 0 else "im"
            if name != f"a{k // 2}_{part}":
                ok = False
                break
    if not ok:
        raise SchemaError(table.path,
                          "not a trajectory file; expected columns "
                          "t,mean,sup_norm,a0_re,a0_im,... (optional tV)")
    return table


def trajectory_mode_amplitude(table: CsvTable, mode: int) -> np.ndarray:
    """|a_mode|(t); the file must retain that coefficient."""
    re, im = f"a{mode}_re", f"a{mode}_im"
    if re not in table.header:
        raise SchemaError(table.path,
                          f"no columns for mode {mode}; the file stops at "
                          f"{table.header[-2]}")
    return np.hypot(table.column(re), table.column(im))


def branch_wavenumber(table: CsvTable) -> int:
    raw = table.comment_value("wavenumber_l")
    if raw is None:
        raise SchemaError(table.path, "missing 'wavenumber_l' metadata comment")
    try:
        l = int(raw)
    except ValueError:
        raise SchemaError(table.path,
                          f"unreadable wavenumber_l metadata {raw!r}") from None
    if l < 1:
        raise SchemaError(table.path, f"wavenumber_l must be positive, got {l}")
    return l


def branch_onset(table: CsvTable) -> Optional[float]:
    raw = table.comment_value("onset_surface_tension")
    if raw is None:
        return None
    try:
        return float(raw)
    except ValueError:
        raise SchemaError(table.path,
                          f"unreadable onset metadata {raw!r}") from None
