"""Discretisation of the periodic strip.

The horizontal direction is 2*pi-periodic and carries a uniform grid with
2*M points differentiated by FFT.  Each fluid layer is a strip of unit
height resolved by N Chebyshev-Lobatto nodes (both endpoints included)
differentiated with the standard collocation matrix.  Interface
quantities are arrays of shape (2*M,), layer fields are arrays of shape
(2*M, N) with the x index first.

The lower layer occupies y in [-1, 0] with the outer boundary at index 0
and the interface at index N-1; the upper layer occupies y in [0, 1] with
the interface at index 0 and the outer boundary at index N-1.  Nodes are
stored in ascending y order on both strips.

Nonlinear pointwise products of spectral data are followed by a 2/3-rule
truncation in x (`dealias`) to keep aliasing out of the quadratic and
rational terms that appear in the pulled-back operators.
"""

from __future__ import annotations

from enum import Enum

import numpy as np


class Side(Enum):
    """Which fluid layer a field lives on."""

    LOWER = "lower"
    UPPER = "upper"

    @property
    def orientation(self) -> int:
        """+1 on the upper layer, -1 on the lower one.

        The graph maps use the combinations 1 - orientation*y and
        1 - orientation*f, which evaluate to (1-y, 1-f) above the
        interface and (1+y, 1+f) below it.
        """
        return 1 if self is Side.UPPER else -1


def chebyshev_lobatto(n):
    """Chebyshev-Lobatto nodes and differentiation matrix on [-1, 1].

    Returns the n nodes in ascending order and the dense collocation
    matrix D with (D @ v)[i] ~ v'(x_i).  The diagonal is filled by the
    negative-sum trick so that constants are differentiated to exactly
    zero.
    """
    if n < 2:
        raise ValueError("need at least two Chebyshev-Lobatto nodes")
    k = np.arange(n)
    x = -np.cos(np.pi * k / (n - 1))
    c = np.ones(n)
    c[0] = 2.0
    c[-1] = 2.0
    c = c * (-1.0) ** k
    dx = x[:, None] - x[None, :]
    d = np.outer(c, 1.0 / c) / (dx + np.eye(n))
    d = d - np.diag(d.sum(axis=1))
    return x, d


class SpectralGrid:
    """Fixed discretisation of both layers.

    Parameters
    ----------
    num_modes : int
        M.  The periodic direction carries 2*M uniform samples and
        resolves Fourier modes |m| <= M.
    num_vertical : int
        Number of Chebyshev-Lobatto nodes per layer.

    Attributes are plain numpy arrays and must not be mutated.
    """

    def __init__(self, num_modes=64, num_vertical=32):
        if num_modes < 4:
            raise ValueError("num_modes must be at least 4")
        if num_vertical < 4:
            raise ValueError("num_vertical must be at least 4")
        self.num_modes = int(num_modes)
        self.num_vertical = int(num_vertical)
        self.num_x = 2 * self.num_modes

        self.x = 2.0 * np.pi * np.arange(self.num_x) / self.num_x
        self.modes = np.rint(np.fft.fftfreq(self.num_x, 1.0 / self.num_x)).astype(int)
        self.abs_modes = np.abs(self.modes)
        self.nyquist_index = self.num_modes
        self.dealias_cutoff = (2 * self.num_modes) // 3
        self.dealias_mask = (self.abs_modes <= self.dealias_cutoff).astype(float)

        t, d = chebyshev_lobatto(self.num_vertical)
        # both strips have unit height, so one scaled matrix serves both
        self.d_y = 2.0 * d
        self.d_yy = self.d_y @ self.d_y
        self.y_lower = (t - 1.0) / 2.0
        self.y_upper = (t + 1.0) / 2.0

        for arr in (self.x, self.modes, self.abs_modes, self.dealias_mask,
                    self.d_y, self.d_yy, self.y_lower, self.y_upper):
            arr.flags.writeable = False

    def y_nodes(self, side: Side):
        return self.y_lower if side is Side.LOWER else self.y_upper

    def interface_index(self, side: Side) -> int:
        """Row index of the interface y = 0 on the given layer."""
        return self.num_vertical - 1 if side is Side.LOWER else 0

    def outer_index(self, side: Side) -> int:
        """Row index of the outer boundary (y = -1 below, y = +1 above)."""
        return 0 if side is Side.LOWER else self.num_vertical - 1

    def __eq__(self, other):
        return (isinstance(other, SpectralGrid)
                and self.num_modes == other.num_modes
                and self.num_vertical == other.num_vertical)

    def __hash__(self):
        return hash((self.num_modes, self.num_vertical))

    def __repr__(self):
        return f"SpectralGrid(num_modes={self.num_modes}, num_vertical={self.num_vertical})"


def fourier_coeffs(grid: SpectralGrid, values):
    """Fourier coefficients a_m of grid samples, fft ordering, a_0 first."""
    return np.fft.fft(values, axis=0) / grid.num_x


def values_from_coeffs(grid: SpectralGrid, coeffs):
    """Complex grid samples of a coefficient vector (fft ordering)."""
    return np.fft.ifft(coeffs * grid.num_x, axis=0)


def _broadcast_multiplier(mult, ndim):
    return mult if ndim == 1 else mult[:, None]


def x_derivative(grid: SpectralGrid, values, order=1):
    """Spectral x-derivative of an interface quantity or layer field.

    Odd-order derivatives zero the Nyquist mode, whose sine partner is
    not representable on the grid.
    """
    vhat = np.fft.fft(values, axis=0)
    mult = (1j * grid.modes.astype(float)) ** order
    if order % 2 == 1:
        mult = mult.copy()
        mult[grid.nyquist_index] = 0.0
    out = np.fft.ifft(vhat * _broadcast_multiplier(mult, values.ndim), axis=0)
    return out.real if np.isrealobj(values) else out


def dealias(grid: SpectralGrid, values):
    """2/3-rule truncation in x.  Apply after nonlinear pointwise products."""
    vhat = np.fft.fft(values, axis=0)
    vhat *= _broadcast_multiplier(grid.dealias_mask, values.ndim)
    out = np.fft.ifft(vhat, axis=0)
    return out.real if np.isrealobj(values) else out


def y_derivative(grid: SpectralGrid, field, order=1):
    """Chebyshev y-derivative of a layer field, any order >= 1."""
    d = grid.d_y if order == 1 else (grid.d_yy if order == 2 else None)
    if d is None:
        d = np.linalg.matrix_power(grid.d_y, order)
    return field @ d.T


def mean_value(grid: SpectralGrid, values):
    """Grid average, which is the exact a_0 coefficient for periodic data."""
    return float(np.mean(np.real(values)))


def cosine_coefficient(grid: SpectralGrid, values, m):
    """Coefficient of cos(m x) in real grid data (m >= 1)."""
    ahat = np.fft.fft(values) / grid.num_x
    return 2.0 * ahat[m].real


def sine_coefficient(grid: SpectralGrid, values, m):
    """Coefficient of sin(m x) in real grid data (m >= 1)."""
    ahat = np.fft.fft(values) / grid.num_x
    return -2.0 * ahat[m].imag
