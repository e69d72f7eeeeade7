import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dirac_geodesic import circle_spectral as cs
from dirac_geodesic.circle_spectral import CircleGrid, ModeVector, SpinStructure
from dirac_geodesic.errors import ConfigurationError, DomainError, InputShapeError

SPINS = list(SpinStructure)

# Coefficients of a seeded 16-node real signal, computed once by direct
# O(n^2) summation of f_j exp(-i lambda s_j) / n and frozen here.
FROZEN_SEED = 20240601
FROZEN_PERIODIC = {
    0: 0.2747924675551442 + 0.0j,
    1: -0.28002194408053044 - 0.06539117666662592j,
    3: 0.29276568460036206 + 0.12986571782483508j,
    -2: 0.32428422229122145 - 0.0981891505292251j,
    -8: -0.1133924623315675 + 0.0j,
}
FROZEN_ANTIPERIODIC = {
    0.5: 0.05590911408590393 - 0.2564823403560586j,
    -0.5: 0.05590911408590393 + 0.2564823403560586j,
    2.5: 0.034822230247413294 - 0.020358463495295506j,
    -7.5: 0.0852212691219826 + 0.07428368463732862j,
}


def naive_modes(values, spin):
    n = values.shape[0]
    s = 2 * np.pi * np.arange(n) / n
    lam = cs.frequencies(n, spin)
    return np.array([np.sum(values * np.exp(-1j * l * s)) / n for l in lam])


def seeded_signal():
    return np.random.default_rng(FROZEN_SEED).normal(size=16)


@pytest.mark.parametrize("spin", SPINS)
def test_forward_transform_matches_direct_summation(spin):
    f = np.random.default_rng(3).normal(size=16)
    modes = cs.forward_transform(f, spin)
    assert np.max(np.abs(modes.coefficients - naive_modes(f, spin))) <= 1e-12


def test_forward_transform_frozen_periodic():
    modes = cs.forward_transform(seeded_signal(), "sigma1")
    for lam, expected in FROZEN_PERIODIC.items():
        assert abs(modes.coefficient(lam) - expected) <= 1e-12


def test_forward_transform_frozen_antiperiodic():
    modes = cs.forward_transform(seeded_signal(), "sigma2")
    for lam, expected in FROZEN_ANTIPERIODIC.items():
        assert abs(modes.coefficient(lam) - expected) <= 1e-12


def test_frequency_sets():
    assert sorted(cs.frequencies(8, SpinStructure.PERIODIC)) == [-4, -3, -2, -1, 0, 1, 2, 3]
    assert sorted(cs.frequencies(8, SpinStructure.ANTIPERIODIC)) == [-3.5, -2.5, -1.5, -0.5, 0.5, 1.5, 2.5, 3.5]


@pytest.mark.parametrize("spin", SPINS)
def test_untwisted_dirac_eigenfunctions(spin):
    grid = CircleGrid(32)
    for lam in cs.dirac_eigenvalues(spin, range(-5, 6)):
        f = np.exp(1j * lam * grid.nodes)
        assert np.max(np.abs(cs.untwisted_dirac(f, spin, grid) + lam * f)) <= 1e-12


def test_untwisted_dirac_on_first_mode():
    grid = CircleGrid(16)
    f = np.exp(1j * grid.nodes)
    np.testing.assert_allclose(cs.untwisted_dirac(f, "sigma1"), -f, atol=1e-13)


def test_dirac_eigenvalue_labels():
    assert cs.dirac_eigenvalues("sigma1", range(-1, 2)) == [-1.0, 0.0, 1.0]
    assert cs.dirac_eigenvalues("sigma2", range(-1, 2)) == [-0.5, 0.5, 1.5]
    with pytest.raises(DomainError):
        cs.dirac_eigenvalues("sigma1", [])


def test_differentiate_drops_periodic_nyquist():
    grid = CircleGrid(8)
    alternating = np.cos(4 * grid.nodes)
    assert np.max(np.abs(cs.differentiate(alternating, "sigma1"))) <= 1e-14


def test_antiperiodic_derivative_of_half_mode():
    grid = CircleGrid(16)
    f = np.cos(1.5 * grid.nodes)
    np.testing.assert_allclose(cs.differentiate(f, "sigma2"), -1.5 * np.sin(1.5 * grid.nodes), atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), half=st.integers(2, 64), spin=st.sampled_from(SPINS))
def test_transform_round_trip(seed, half, spin):
    f = np.random.default_rng(seed).normal(size=(2 * half, 2)) @ np.array([1.0, 1j])
    back = cs.inverse_transform(cs.forward_transform(f, spin))
    assert np.max(np.abs(back - f)) <= 1e-12 * max(1.0, np.max(np.abs(f)))


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), spin=st.sampled_from(SPINS))
def test_untwisted_dirac_symmetric(seed, spin):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=32) + 1j * rng.normal(size=32)
    b = rng.normal(size=32) + 1j * rng.normal(size=32)
    lhs = cs.l2_pairing(cs.untwisted_dirac(a, spin), b)
    rhs = cs.l2_pairing(a, cs.untwisted_dirac(b, spin))
    assert abs(lhs - rhs) <= 1e-10 * (1 + abs(lhs))


def test_heat_exact_decays_modes():
    modes = ModeVector.from_dict(16, "sigma1", {0: 1.0, 2: 0.5, -3: 0.25j})
    out = cs.heat_exact(modes, 0.1)
    assert out.coefficient(0) == pytest.approx(1.0)
    assert out.coefficient(2) == pytest.approx(0.5 * np.exp(-0.4))
    assert out.coefficient(-3) == pytest.approx(0.25j * np.exp(-0.9))


@settings(max_examples=30, deadline=None)
@given(t1=st.floats(0, 1), t2=st.floats(0, 1), eps=st.floats(0.25, 4), spin=st.sampled_from(SPINS))
def test_flat_spinor_semigroup(t1, t2, eps, spin):
    rng = np.random.default_rng(0)
    modes = ModeVector(spin, (rng.normal(size=16) + 1j * rng.normal(size=16)) * 0.1)
    once = cs.flat_spinor_exact(modes, eps, t1 + t2)
    twice = cs.flat_spinor_exact(cs.flat_spinor_exact(modes, eps, t1), eps, t2)
    np.testing.assert_allclose(once.coefficients, twice.coefficients, rtol=1e-12, atol=1e-14)


def test_flat_spinor_rate_signs():
    # only modes with 0 < lambda < 1/eps grow
    assert cs.flat_spinor_rate(-1.0, 1.0) == -2.0
    assert cs.flat_spinor_rate(0.5, 1.0) == 0.25
    assert cs.flat_spinor_rate(1.0, 1.0) == 0.0
    modes = ModeVector.from_dict(16, "sigma1", {-2: 1.0})
    assert abs(cs.flat_spinor_exact(modes, 1.0, 1.0).coefficient(-2)) == pytest.approx(np.exp(-6.0))


def test_flat_spinor_exact_checks_spin():
    modes = ModeVector.from_dict(16, "sigma1", {1: 1.0})
    with pytest.raises(ConfigurationError):
        cs.flat_spinor_exact(modes, 1.0, 0.1, spin="sigma2")
    with pytest.raises(DomainError):
        cs.flat_spinor_exact(modes, 0.0, 0.1)
    with pytest.raises(DomainError):
        cs.flat_spinor_exact(modes, 1.0, -0.1)


@pytest.mark.parametrize("spin", SPINS)
def test_convolution_against_direct_quadrature(spin):
    n, eps, t = 32, 1.0, 0.1
    grid = CircleGrid(n)
    rng = np.random.default_rng(11)
    lam = cs.frequencies(n, spin)
    coeffs = (rng.normal(size=n) + 1j * rng.normal(size=n)) / (1 + lam**2)
    psi0 = cs.from_modes(coeffs, spin)
    kernel = cs.flat_spinor_kernel(n, spin, eps)
    fast = cs.convolve_initial(psi0, kernel, t, spin)
    chi = kernel(t)
    s = grid.nodes
    # (1/2pi) int psi0(y) chi(s - y) dy; the integrand is periodic in y
    direct = np.array([np.sum(psi0 * chi.evaluate(sj - s)) / n for sj in s])
    assert np.max(np.abs(fast - direct)) <= 1e-8


def test_convolution_with_heat_kernel_matches_heat_exact():
    grid = CircleGrid(32)
    f = np.cos(grid.nodes) + 0.3 * np.sin(3 * grid.nodes)
    out = cs.convolve_initial(f, cs.heat_kernel(32), 0.2, "sigma1")
    exact = np.exp(-0.2) * np.cos(grid.nodes) + 0.3 * np.exp(-1.8) * np.sin(3 * grid.nodes)
    np.testing.assert_allclose(out.real, exact, atol=1e-13)


def test_convolution_rejects_mismatched_spin():
    with pytest.raises(ConfigurationError):
        cs.convolve_initial(np.ones(16), cs.flat_spinor_kernel(16, "sigma1", 1.0), 0.1, "sigma2")


def test_grid_and_shape_errors():
    for bad in (3, 5, 2, 0):
        with pytest.raises(InputShapeError):
            CircleGrid(bad)
    with pytest.raises(InputShapeError):
        cs.forward_transform(np.ones(7), "sigma1")
    with pytest.raises(InputShapeError):
        cs.differentiate(np.ones(16), "sigma1", CircleGrid(8))


def test_mode_lookup_errors():
    modes = ModeVector.from_dict(8, "sigma1", {1: 1.0})
    with pytest.raises(DomainError):
        modes.coefficient(0.5)
    with pytest.raises(DomainError):
        ModeVector.from_dict(8, "sigma2", {1: 1.0})


def test_spin_aliases():
    assert SpinStructure.parse("σ1") is SpinStructure.PERIODIC
    assert SpinStructure.parse("antiperiodic") is SpinStructure.ANTIPERIODIC
    with pytest.raises(ConfigurationError):
        SpinStructure.parse("sigma3")


def test_quadrature_exact_for_band_limited():
    grid = CircleGrid(16)
    assert grid.integrate(np.cos(grid.nodes) ** 2) == pytest.approx(np.pi, abs=1e-14)
