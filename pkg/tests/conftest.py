import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from sdot.density import DensityMesh, unit_square_mesh


@pytest.fixture
def square_mesh():
    return unit_square_mesh().normalize()


@pytest.fixture
def two_sites():
    return np.array([[0.25, 0.5], [0.75, 0.5]])


def random_density_mesh(rng, max_splits=3, uniform=False):
    """Random grid mesh of the unit square with positive densities."""
    from sdot.density import grid_mesh
    nx = int(rng.integers(1, max_splits + 1))
    ny = int(rng.integers(1, max_splits + 1))
    if uniform:
        densities = np.ones(2 * nx * ny)
    else:
        densities = rng.uniform(0.2, 2.0, size=2 * nx * ny)
    return grid_mesh(nx, ny, densities).normalize()


def random_instance(rng, n_min=3, n_max=12, uniform=False, max_splits=2):
    """(mesh, points, weights) with balanced unit masses."""
    mesh = random_density_mesh(rng, max_splits=max_splits, uniform=uniform)
    n = int(rng.integers(n_min, n_max + 1))
    pts = rng.uniform(0.08, 0.92, size=(n, 2))
    w = rng.uniform(0.2, 1.0, size=n)
    w /= w.sum()
    return mesh, pts, w
