import numpy as np
import pytest

from csslab.radial import ComplexField, RadialGrid


@pytest.fixture(scope="package")
def grid() -> RadialGrid:
    return RadialGrid.log_uniform(2048, 100.0)


@pytest.fixture(scope="package")
def fine_grid() -> RadialGrid:
    return RadialGrid.log_uniform(4096, 100.0)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture
def random_field(grid, rng):
    """Factory of smooth, rapidly decaying random profiles."""

    def make(m: int = 0) -> ComplexField:
        r = grid.radii
        coeffs = rng.normal(size=4) + 1j * rng.normal(size=4)
        width = rng.uniform(0.5, 2.0)
        poly = sum(c * r**k for k, c in enumerate(coeffs))
        return ComplexField(grid, r ** abs(m) * poly * np.exp(-((r / width) ** 2)), m)

    return make
