import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import CURVED, random_state
from dirac_geodesic import CircleGrid, CurveField, SpinorField, catalog
from dirac_geodesic.circle_spectral import SpinStructure
from dirac_geodesic.errors import IntegrityError, NoHarmonicSpinorError
from dirac_geodesic.fixtures import great_circle, latitude
from dirac_geodesic.oracle import SphereChart
from dirac_geodesic.spinors import (
    clifford_mul,
    construct_stationary,
    covariant_derivative,
    inner_product,
    twisted_dirac,
    twisted_laplacian,
)

SPINS = list(SpinStructure)


def test_equator_velocity_is_parallel():
    gamma = great_circle(catalog("round_sphere"), CircleGrid(32))
    psi = SpinorField.tangential(gamma, "sigma1", (0.3 - 0.7j) * gamma.velocity)
    assert np.max(np.abs(covariant_derivative(psi).values)) <= 1e-12


def test_constant_chart_spinor_on_latitude():
    # along the latitude theta = theta0, fields with constant chart
    # components c satisfy Lap psi = -cos(theta0)^2 psi
    r, z0 = 1.3, 0.6
    m = catalog("round_sphere", radius=r)
    gamma = latitude(m, CircleGrid(32), z0)
    theta0 = np.arccos(z0 / r)
    chart = SphereChart(r)
    y = chart.to_chart(gamma.points)
    c = np.array([0.4 + 0.2j, -0.3 + 0.5j])
    vals = np.einsum("nij,j->ni", chart.jacobian(y), c)
    psi = SpinorField(gamma, "sigma1", vals)
    lap = twisted_laplacian(psi).values
    np.testing.assert_allclose(lap, -np.cos(theta0) ** 2 * vals, atol=1e-12)


@pytest.mark.parametrize("name", CURVED)
@pytest.mark.parametrize("spin", SPINS)
def test_clifford_multiplication_is_skew_and_isometric(name, spin):
    gamma, psi = random_state(catalog(name), 32, spin, 0)
    _, phi = random_state(catalog(name), 32, spin, 0)
    phi = SpinorField.tangential(gamma, spin, phi.values[::-1])
    skew = inner_product(clifford_mul(psi), phi) + inner_product(psi, clifford_mul(phi))
    assert np.max(np.abs(skew)) <= 1e-15
    np.testing.assert_allclose(inner_product(clifford_mul(psi), clifford_mul(psi)), inner_product(psi, psi), rtol=1e-15)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), name=st.sampled_from(CURVED), spin=st.sampled_from(SPINS))
def test_dirac_symmetric_on_curved_base(seed, name, spin):
    gamma, psi = random_state(catalog(name), 32, spin, seed)
    rng = np.random.default_rng(seed + 1)
    phi = SpinorField.tangential(gamma, spin, rng.normal(size=psi.values.shape) + 1j * rng.normal(size=psi.values.shape))
    lhs = inner_product(twisted_dirac(psi), phi, "l2")
    rhs = inner_product(psi, twisted_dirac(phi), "l2")
    assert abs(lhs - rhs) <= 1e-10 * (1 + abs(lhs))


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), name=st.sampled_from(CURVED), spin=st.sampled_from(SPINS))
def test_dirac_squared_is_minus_laplacian(seed, name, spin):
    gamma, psi = random_state(catalog(name), 32, spin, seed)
    lhs = twisted_dirac(twisted_dirac(psi)).values
    assert np.max(np.abs(lhs + twisted_laplacian(psi).values)) <= 1e-12


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), spin=st.sampled_from(SPINS))
def test_laplacian_is_nonpositive(seed, spin):
    gamma, psi = random_state(catalog("round_sphere"), 32, spin, seed)
    lap = inner_product(psi, twisted_laplacian(psi), "l2")
    grad = inner_product(covariant_derivative(psi), covariant_derivative(psi), "l2")
    assert lap == pytest.approx(-grad, rel=1e-10, abs=1e-13)


def test_covariant_derivative_stays_tangent():
    gamma, psi = random_state(catalog("clifford_torus"), 32, "sigma2", 4)
    d = covariant_derivative(psi).values
    np.testing.assert_allclose(gamma.manifold.tangent_project(gamma.points, d), d, atol=1e-13)


def test_stationary_construction():
    gamma = great_circle(catalog("round_sphere"), CircleGrid(16))
    psi = construct_stationary(gamma, 2.0)
    np.testing.assert_allclose(psi.values, 2j * gamma.velocity, atol=1e-14)
    assert np.max(np.abs(construct_stationary(gamma, 0.0, "sigma2").values)) == 0.0


def test_stationary_construction_rejects_bad_input():
    grid = CircleGrid(16)
    with pytest.raises(NoHarmonicSpinorError):
        construct_stationary(great_circle(catalog("round_sphere"), grid), 1.0, "sigma2")
    with pytest.raises(IntegrityError):
        construct_stationary(latitude(catalog("round_sphere"), grid, 0.5), 1.0)


def test_field_integrity_checks():
    m = catalog("round_sphere")
    grid = CircleGrid(16)
    gamma = great_circle(m, grid)
    with pytest.raises(IntegrityError):
        SpinorField(gamma, "sigma1", gamma.points)
    with pytest.raises(IntegrityError):
        CurveField(grid, 2 * gamma.points, m)
    with pytest.raises(IntegrityError):
        CurveField(grid, np.full((16, 3), np.nan), m)
    other = latitude(m, grid, 0.2)
    with pytest.raises(IntegrityError):
        inner_product(SpinorField.zeros(gamma, "sigma1"), SpinorField.zeros(other, "sigma1"))
    with pytest.raises(IntegrityError):
        inner_product(SpinorField.zeros(gamma, "sigma1"), SpinorField.zeros(gamma, "sigma2"))
