"""Twisted spinors along a discrete closed curve.

A curve is stored extrinsically as points ``u_j`` in R^q lying on the target;
a twisted spinor is a complex q-vector per node tangent to the target at
``u_j``.  Clifford multiplication by the circle's unit vector is
multiplication by ``i``, the spinor metric is ``Re <a, b>`` (Hermitian),
and the covariant derivative is the tangential part of the spin-structure
aware spectral derivative.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import circle_spectral as cs
from .circle_spectral import CircleGrid, SpinStructure
from .errors import IntegrityError, NoHarmonicSpinorError
from .manifolds import ManifoldSpec

ON_MANIFOLD_TOL = 1e-10
TANGENCY_TOL = 1e-6
GEODESIC_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class CurveField:
    grid: CircleGrid
    points: np.ndarray
    manifold: ManifoldSpec

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.shape != (self.grid.n, self.manifold.ambient_dim):
            raise IntegrityError(f"curve points have shape {pts.shape}, expected {(self.grid.n, self.manifold.ambient_dim)}")
        if not np.all(np.isfinite(pts)):
            raise IntegrityError("curve contains non-finite values")
        off = float(np.max(self.manifold.distance(pts)))
        if off > ON_MANIFOLD_TOL * max(1.0, float(np.max(np.abs(pts)))):
            raise IntegrityError(f"curve is off {self.manifold.name} by {off:.3e}")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @classmethod
    def project_from(cls, grid, points, manifold) -> "CurveField":
        """Build a curve by projecting arbitrary ambient points onto the target."""
        return cls(grid, manifold.project(points), manifold)

    @property
    def velocity(self) -> np.ndarray:
        return cs.differentiate(self.points, SpinStructure.PERIODIC)

    @property
    def speed(self) -> np.ndarray:
        return np.linalg.norm(self.velocity, axis=1)


@dataclass(frozen=True, eq=False)
class SpinorField:
    base: CurveField
    spin: SpinStructure
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=complex)
        if vals.shape != self.base.points.shape:
            raise IntegrityError(f"spinor values have shape {vals.shape}, expected {self.base.points.shape}")
        object.__setattr__(self, "spin", SpinStructure.parse(self.spin))
        defect = tangency_defect(self.base.manifold, self.base.points, vals)
        if defect > TANGENCY_TOL * max(1.0, float(np.max(np.abs(vals), initial=0.0))):
            raise IntegrityError(f"spinor is not tangent along its base curve (defect {defect:.3e})")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def grid(self) -> CircleGrid:
        return self.base.grid

    @classmethod
    def tangential(cls, base: CurveField, spin, values) -> "SpinorField":
        """Project arbitrary complex q-vectors onto the tangent spaces along ``base``."""
        vals = base.manifold.tangent_project(base.points, np.asarray(values, dtype=complex))
        return cls(base, spin, vals)

    @classmethod
    def zeros(cls, base: CurveField, spin) -> "SpinorField":
        return cls(base, spin, np.zeros(base.points.shape, dtype=complex))

    def with_values(self, values) -> "SpinorField":
        return SpinorField(self.base, self.spin, values)


def tangency_defect(manifold: ManifoldSpec, points, values) -> float:
    values = np.asarray(values)
    if values.size == 0:
        return 0.0
    return float(np.max(np.abs(values - manifold.tangent_project(points, values))))


# -- array kernels (used directly by the flow for speed) ---------------------


def covariant_derivative_array(manifold, points, values, spin):
    d = cs.apply_symbol(values, cs.derivative_symbol(values.shape[0], spin), spin, real=False)
    return manifold.tangent_project(points, d)


def laplacian_array(manifold, points, values, spin):
    return covariant_derivative_array(manifold, points, covariant_derivative_array(manifold, points, values, spin), spin)


def _check_same_base(a: SpinorField, b: SpinorField):
    if a.base is not b.base and not (
        a.base.manifold == b.base.manifold
        and a.grid == b.grid
        and np.array_equal(a.base.points, b.base.points)
    ):
        raise IntegrityError("spinors live over different base curves")
    if a.spin is not b.spin:
        raise IntegrityError("spinors carry different spin structures")


# -- public operations --------------------------------------------------------


def clifford_mul(psi: SpinorField) -> SpinorField:
    return psi.with_values(1j * psi.values)


def covariant_derivative(psi: SpinorField) -> SpinorField:
    """Tangential part of d/ds applied to the extrinsic spinor."""
    m = psi.base.manifold
    return psi.with_values(covariant_derivative_array(m, psi.base.points, psi.values, psi.spin))


def twisted_dirac(psi: SpinorField) -> SpinorField:
    return clifford_mul(covariant_derivative(psi))


def twisted_laplacian(psi: SpinorField) -> SpinorField:
    return covariant_derivative(covariant_derivative(psi))


def inner_product(psi: SpinorField, phi: SpinorField, mode: str = "pointwise"):
    """Real spinor metric ``Re sum_a conj(psi^a) phi^a``; ``mode='l2'`` integrates over the circle."""
    _check_same_base(psi, phi)
    pointwise = np.real(np.sum(np.conj(psi.values) * phi.values, axis=1))
    if mode == "pointwise":
        return pointwise
    if mode.lower() == "l2":
        return float(psi.grid.integrate(pointwise))
    raise ValueError(f"unknown mode {mode!r}")


def construct_stationary(gamma: CurveField, chi, spin=SpinStructure.PERIODIC) -> SpinorField:
    """``psi = d_s . chi (x) gamma'`` for a geodesic ``gamma`` and a constant harmonic spinor ``chi``."""
    spin = SpinStructure.parse(spin)
    chi = complex(chi)
    d2u = cs.differentiate(gamma.velocity, SpinStructure.PERIODIC)
    tension = float(np.max(np.abs(gamma.manifold.tangent_project(gamma.points, d2u))))
    if tension > GEODESIC_TOL:
        raise IntegrityError(f"base curve is not a geodesic (tension {tension:.3e})")
    if spin is SpinStructure.ANTIPERIODIC and chi != 0:
        raise NoHarmonicSpinorError("sigma_2 carries no harmonic spinors; only chi = 0 is allowed")
    return SpinorField.tangential(gamma, spin, 1j * chi * gamma.velocity)
