"""Shared fixtures.

Most unit tests run on a deliberately small LLR grid so that the exact
O(cells^2) reference convolutions stay affordable; the full production
grid (A=60, Q=2^13) is exercised in test_acceptance.py.
"""

import numpy as np
import pytest

from polarfec.density import LlrGrid


@pytest.fixture(scope="session")
def small_grid():
    # 513 cells; dense pairs exceed the sparse-path cutoff, so FFT runs
    return LlrGrid(256, 8.0 / 256)


@pytest.fixture(scope="session")
def tiny_grid():
    return LlrGrid(32, 6.0 / 32)


@pytest.fixture(scope="session")
def ref_grid():
    return LlrGrid(1 << 13, 60.0 / (1 << 13))


@pytest.fixture
def rng():
    return np.random.default_rng(0xC0FFEE)


def random_density(grid, rng, atoms=None):
    """Random normalized density on `grid`; dense when atoms is None."""
    if atoms is None:
        mass = rng.random(grid.ncells)
    else:
        mass = np.zeros(grid.ncells)
        idx = rng.choice(grid.ncells, size=atoms, replace=False)
        mass[idx] = rng.random(atoms)
    mass /= mass.sum()
    from polarfec.density import QuantizedDensity
    return QuantizedDensity(grid, mass)
