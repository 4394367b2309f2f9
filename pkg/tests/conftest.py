import numpy as np
import pytest

from qnls import build_root_basis, build_spectrum, make_grid


@pytest.fixture(scope="session")
def grid():
    return make_grid(40.0, 1024)


@pytest.fixture(scope="session")
def basis(grid):
    return build_root_basis(grid)


@pytest.fixture(scope="session")
def spectrum(grid):
    # full band for reconstruction/Plancherel identities
    return build_spectrum(grid)


@pytest.fixture()
def rng():
    return np.random.default_rng(20260811)


def schwartz_like(grid, rng, width=10.0, k_cut=3.0):
    """Smooth decaying random field: filtered complex noise under an envelope."""
    n = grid.point_count
    noise = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    smooth = np.fft.ifft(np.exp(-((grid.wavenumbers / k_cut) ** 2)) * np.fft.fft(noise))
    return smooth * np.exp(-grid.nodes ** 2 / width)
