import numpy as np
import pytest

from dirac_geodesic import CircleGrid, CurveField, SpinorField, catalog
from dirac_geodesic.fixtures import band_limited_field, great_circle, torus_winding

CURVED = ("round_sphere", "clifford_torus")


def base_curve(manifold, grid):
    """A smooth closed reference curve on any catalog target."""
    if manifold.name == "clifford_torus":
        return torus_winding(manifold, grid, 1, 1)
    if manifold.name == "flat_space":
        s = grid.nodes
        pts = np.zeros((grid.n, manifold.ambient_dim))
        pts[:, 0] = np.cos(s)
        pts[:, 1] = np.sin(s)
        return CurveField(grid, pts, manifold)
    return great_circle(manifold, grid)


def random_state(manifold, n, spin, seed, amplitude=0.1, spinor_amplitude=0.5, kmax=3):
    """Seeded smooth (curve, spinor) pair near the reference curve."""
    rng = np.random.default_rng(seed)
    grid = CircleGrid(n)
    q = manifold.ambient_dim
    pts = base_curve(manifold, grid).points + amplitude * band_limited_field(n, q, "sigma1", rng, kmax=kmax)
    gamma = CurveField.project_from(grid, pts, manifold)
    vals = spinor_amplitude * band_limited_field(n, q, spin, rng, kmax=kmax, complex_=True)
    return gamma, SpinorField.tangential(gamma, spin, vals)


@pytest.fixture
def sphere():
    return catalog("round_sphere")


@pytest.fixture
def torus():
    return catalog("clifford_torus")
