import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dirac_geodesic import CircleGrid, catalog
from dirac_geodesic.errors import ConfigurationError, ProjectionSingularityError
from dirac_geodesic.fixtures import torus_winding
from dirac_geodesic.manifolds import CATALOG, geodesic_fixture, project_point
from dirac_geodesic.oracle import SphereChart

ALL = [catalog(name) for name in CATALOG] + [catalog("round_sphere", radius=1.7), catalog("flat_space", dim=2)]


def samples(m, rng, count=100):
    p = m.project(rng.normal(size=(count, m.ambient_dim)) + 0.5)
    tangent = [m.tangent_project(p, rng.normal(size=(count, m.ambient_dim))) for _ in range(4)]
    return p, tangent


def ip(a, b):
    return np.sum(a * b, axis=-1)


def fd_second_fundamental_form(m, p, X, Y, h=1e-6):
    # II(X, Y) = (D_X P) Y for tangent Y, P the tangent projector
    plus = m.projector(m.project(p + h * X))
    minus = m.projector(m.project(p - h * X))
    return np.einsum("nij,nj->ni", (plus - minus) / (2 * h), Y)


@pytest.mark.parametrize("m", ALL, ids=lambda m: f"{m.name}-{m.ambient_dim}")
def test_second_fundamental_form_matches_projector_derivative(m):
    rng = np.random.default_rng(0)
    p, (X, Y, _, _) = samples(m, rng)
    np.testing.assert_allclose(m.second_fundamental_form(p, X, Y), fd_second_fundamental_form(m, p, X, Y), atol=1e-7)


def test_round_sphere_second_fundamental_form_closed_form():
    m = catalog("round_sphere")
    rng = np.random.default_rng(1)
    p, (X, Y, _, _) = samples(m, rng)
    np.testing.assert_allclose(m.second_fundamental_form(p, X, Y), -ip(X, Y)[:, None] * p, atol=1e-14)


@pytest.mark.parametrize("m", ALL, ids=lambda m: f"{m.name}-{m.ambient_dim}")
def test_gauss_equation(m):
    rng = np.random.default_rng(2)
    p, (X, Y, Z, W) = samples(m, rng)
    II = m.second_fundamental_form
    lhs = ip(m.curvature(p, X, Y, Z), W)
    rhs = ip(II(p, X, W), II(p, Y, Z)) - ip(II(p, X, Z), II(p, Y, W))
    assert np.max(np.abs(lhs - rhs)) <= 1e-8


def test_gauss_equation_with_derived_second_fundamental_form():
    m = catalog("round_sphere", radius=1.3)
    p, (X, Y, Z, W) = samples(m, np.random.default_rng(3))
    fd = lambda A, B: fd_second_fundamental_form(m, p, A, B)
    rhs = ip(fd(X, W), fd(Y, Z)) - ip(fd(X, Z), fd(Y, W))
    assert np.max(np.abs(ip(m.curvature(p, X, Y, Z), W) - rhs)) <= 1e-6


@pytest.mark.parametrize("m", ALL, ids=lambda m: f"{m.name}-{m.ambient_dim}")
def test_shape_operator_duality(m):
    rng = np.random.default_rng(4)
    p, (X, Y, _, _) = samples(m, rng)
    nu = m.normal_part(p, rng.normal(size=p.shape))
    lhs = ip(m.shape_operator(p, nu, X), Y)
    rhs = ip(nu, m.second_fundamental_form(p, X, Y))
    assert np.max(np.abs(lhs - rhs)) <= 1e-12


@pytest.mark.parametrize("m", ALL, ids=lambda m: f"{m.name}-{m.ambient_dim}")
def test_projector_invariants(m):
    rng = np.random.default_rng(5)
    p, _ = samples(m, rng)
    P = m.projector(p)
    np.testing.assert_allclose(P @ P, P, atol=1e-13)
    np.testing.assert_allclose(P, np.swapaxes(P, -1, -2), atol=1e-13)
    np.testing.assert_allclose(np.trace(P, axis1=-2, axis2=-1), m.intrinsic_dim, atol=1e-12)
    basis = m.tangent_basis(p)
    np.testing.assert_allclose(np.swapaxes(basis, -1, -2) @ basis, np.broadcast_to(np.eye(m.intrinsic_dim), (100, m.intrinsic_dim, m.intrinsic_dim)), atol=1e-12)


@pytest.mark.parametrize("m", ALL, ids=lambda m: f"{m.name}-{m.ambient_dim}")
def test_curvature_symmetries(m):
    p, (X, Y, Z, W) = samples(m, np.random.default_rng(6))
    R = lambda a, b, c, d: ip(m.curvature(p, a, b, c), d)
    np.testing.assert_allclose(R(X, Y, Z, W), -R(Y, X, Z, W), atol=1e-12)
    np.testing.assert_allclose(R(X, Y, Z, W), -R(X, Y, W, Z), atol=1e-12)
    np.testing.assert_allclose(R(X, Y, Z, W), R(Z, W, X, Y), atol=1e-12)
    np.testing.assert_allclose(R(X, Y, Z, W) + R(Y, Z, X, W) + R(Z, X, Y, W), 0.0, atol=1e-12)


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), name=st.sampled_from(CATALOG))
def test_projection_is_idempotent_and_tangent_projection_complex_linear(seed, name):
    m = catalog(name)
    rng = np.random.default_rng(seed)
    p = m.project(rng.normal(size=m.ambient_dim) + 0.1)
    np.testing.assert_allclose(m.project(p), p, atol=1e-14)
    assert m.distance(p) <= 1e-14
    a, b = rng.normal(size=(2, m.ambient_dim))
    np.testing.assert_allclose(m.tangent_project(p, a + 1j * b), m.tangent_project(p, a) + 1j * m.tangent_project(p, b), atol=1e-14)


def test_sphere_sectional_curvature():
    m = catalog("round_sphere", radius=2.0)
    p = np.array([0.0, 0.0, 2.0])
    X, Y = np.array([1.0, 0, 0]), np.array([0, 1.0, 0])
    assert ip(m.curvature(p, X, Y, Y), X) == pytest.approx(0.25)


def test_clifford_torus_projection():
    m = catalog("clifford_torus")
    h = 1 / np.sqrt(2)
    np.testing.assert_allclose(project_point(m, [1.0, 0.0, 1.0, 0.0]), [h, 0.0, h, 0.0], atol=1e-15)


def test_torus_winding_has_constant_speed():
    m = catalog("clifford_torus")
    speed = torus_winding(m, CircleGrid(32), 1, 0).speed
    np.testing.assert_allclose(speed, 1 / np.sqrt(2), atol=1e-13)


def test_projection_singularities():
    with pytest.raises(ProjectionSingularityError):
        catalog("round_sphere").project([0.0, 0.0, 0.0])
    with pytest.raises(ProjectionSingularityError):
        catalog("clifford_torus").project([1.0, 0.0, 0.0, 0.0])


def test_catalog_errors():
    with pytest.raises(ConfigurationError):
        catalog("hyperbolic_plane")
    with pytest.raises(ConfigurationError):
        catalog("round_sphere", radius=-1)


def test_geodesic_fixture_closes_and_is_geodesic():
    m = catalog("round_sphere", radius=1.5)
    curve = geodesic_fixture(m, [0, 0, 1.5], [1.5, 0, 0])(CircleGrid(32))
    from dirac_geodesic.energy import tension_field

    assert np.max(np.abs(tension_field(curve))) <= 1e-12
    with pytest.raises(ConfigurationError):
        geodesic_fixture(m, [0, 0, 1.5], [1.0, 0, 0])
    with pytest.raises(ConfigurationError):
        geodesic_fixture(m, [0, 0, 1.5], [0, 0, 1.0])


def test_chart_riemann_matches_embedding():
    m = catalog("round_sphere", radius=1.3)
    chart = SphereChart(1.3)
    rng = np.random.default_rng(7)
    y = np.stack([rng.uniform(0.3, np.pi - 0.3, 100), rng.uniform(0, 2 * np.pi, 100)], axis=1)
    p = chart.from_chart(y)
    J = chart.jacobian(y)
    a, b, c = (rng.normal(size=(100, 2)) for _ in range(3))
    R = chart.riemann(y)  # R[m, l, i, j] with R(d_i, d_j) d_l = R^m_lij d_m
    chart_val = np.einsum("nmlij,ni,nj,nl->nm", R, a, b, c)
    push = lambda v: np.einsum("nij,nj->ni", J, v)
    np.testing.assert_allclose(push(chart_val), m.curvature(p, push(a), push(b), push(c)), atol=1e-6)
