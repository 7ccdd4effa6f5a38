import numpy as np
import pytest

from muskatlab import FluidParams, SpectralGrid


@pytest.fixture(scope="session")
def small_grid():
    """Coarse grid for structural tests; solver caches are shared."""
    return SpectralGrid(16, 12)


@pytest.fixture(scope="session")
def medium_grid():
    """Grid fine enough for quantitative spot checks up to mode ~4."""
    return SpectralGrid(24, 16)


@pytest.fixture(scope="session")
def probe_grid():
    """Grid used for flat-multiplier measurements up to mode ~8."""
    return SpectralGrid(32, 24)


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture(scope="session")
def contrast_params():
    """Unequal viscosities and a stabilising density jump."""
    return FluidParams(permeability=1.0, mu_minus=2.0, mu_plus=1.0,
                       rho_minus=1.0, rho_plus=0.5, gravity=1.0,
                       surface_tension=1.0)


@pytest.fixture(scope="session")
def heavy_top_params():
    """Heavier fluid above, regularised by surface tension."""
    return FluidParams(permeability=1.0, mu_minus=1.0, mu_plus=1.0,
                       rho_minus=1.0, rho_plus=2.0, gravity=1.0,
                       surface_tension=1.5)
