"""Batch figure generation from muskatlab CSV artifacts.

Four figure kinds, each reading the documented CSV schema of the
emitting command: bifurcation diagrams from branch files, leading-order
finger profiles, linear spectra, and decay-rate fits.  Inputs are
validated before anything is drawn and images carry no timestamps, so
identical inputs give identical bytes.
"""

__version__ = "0.1.0"

from .figures import FIGSIZE, KINDS, PlotJob, render
from .tables import (BRANCH_HEADER, CsvTable, EmptyInputError, FITS_HEADER,
                     PlotInputError, SPECTRUM_HEADER, SchemaError,
                     branch_onset, branch_wavenumber, read_branch, read_fits,
                     read_spectrum, read_table, read_trajectory,
                     trajectory_mode_amplitude)

__all__ = [name for name in dir() if not name.startswith("_")]
