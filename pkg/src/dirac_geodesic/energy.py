"""Energies, curvature terms, Euler-Lagrange residuals and the L2 gradient.

Discrete energy (trapezoidal rule, ``w = 2pi/n``)::

    E_eps = w/2 * sum_j ( |u'_j|^2 + <psi_j, D psi_j> + eps |nabla psi_j|^2 )

Curvature terms for ``psi = a + i b`` (real and imaginary parts, both tangent)::

    R(gamma, psi)   = R^N(b, a) gamma'
    R_c(gamma, psi) = R^N(Re nabla psi, a) gamma' + R^N(Im nabla psi, b) gamma'

The first is the index form ``1/2 R^m_lij gamma'^l <psi^i, d_s . psi^j>``
with ``R(d_i, d_j) d_l = R^m_lij d_m``; both signs are pinned by agreement
with finite differences of ``E_eps`` (see ``oracle.fd_energy_gradient``).
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from . import circle_spectral as cs
from .circle_spectral import SpinStructure
from .errors import DomainError, IntegrityError
from .spinors import CurveField, SpinorField, covariant_derivative_array

CURVE_TOL = 1e-10


@dataclass
class Kinematics:
    """Derivatives of a (curve, spinor) state evaluated once and shared."""

    du: np.ndarray
    d2u: np.ndarray
    tension: np.ndarray
    nabla_psi: np.ndarray
    laplacian_psi: np.ndarray

    @property
    def dirac_psi(self) -> np.ndarray:
        return 1j * self.nabla_psi


def kinematics(manifold, u, psi, spin) -> Kinematics:
    per = SpinStructure.PERIODIC
    sym = cs.derivative_symbol(u.shape[0], per)
    du = cs.apply_symbol(u, sym, per, real=True)
    d2u = cs.apply_symbol(du, sym, per, real=True)
    tension = manifold.tangent_project(u, d2u)
    nabla = covariant_derivative_array(manifold, u, psi, spin)
    lap = covariant_derivative_array(manifold, u, nabla, spin)
    return Kinematics(du, d2u, tension, nabla, lap)


def curvature_R_array(manifold, u, du, psi):
    return manifold.curvature(u, psi.imag, psi.real, du)


def curvature_Rc_array(manifold, u, du, psi, nabla_psi):
    return manifold.curvature(u, nabla_psi.real, psi.real, du) + manifold.curvature(u, nabla_psi.imag, psi.imag, du)


def _check_compatible(gamma: CurveField, psi: SpinorField):
    if psi.base is not gamma and not (
        psi.base.manifold == gamma.manifold and np.array_equal(psi.base.points, gamma.points)
    ):
        raise IntegrityError("spinor is not defined along this curve")


def _check_on_manifold(gamma: CurveField):
    off = float(np.max(gamma.manifold.distance(gamma.points)))
    if off > CURVE_TOL * max(1.0, float(np.max(np.abs(gamma.points)))):
        raise IntegrityError(f"curve is off the manifold by {off:.3e}")


def tension_field(gamma: CurveField) -> np.ndarray:
    """Tangential part of the spectral second derivative of ``u``."""
    _check_on_manifold(gamma)
    d2u = cs.differentiate(cs.differentiate(gamma.points, SpinStructure.PERIODIC), SpinStructure.PERIODIC)
    return gamma.manifold.tangent_project(gamma.points, d2u)


def curvature_term_R(gamma: CurveField, psi: SpinorField) -> np.ndarray:
    _check_compatible(gamma, psi)
    return curvature_R_array(gamma.manifold, gamma.points, gamma.velocity, psi.values)


def curvature_term_Rc(gamma: CurveField, psi: SpinorField) -> np.ndarray:
    _check_compatible(gamma, psi)
    m = gamma.manifold
    nabla = covariant_derivative_array(m, gamma.points, psi.values, psi.spin)
    return curvature_Rc_array(m, gamma.points, gamma.velocity, psi.values, nabla)


@dataclass(frozen=True)
class EnergyReport:
    dirichlet: float
    dirac: float
    regularizer: float
    E: float
    E_eps: float
    eps: float
    psi_l2_sq: float

    @property
    def lower_bound(self) -> float:
        """``-(1/8 eps) int |psi|^2``."""
        return -self.psi_l2_sq / (8.0 * self.eps)

    def lower_bound_gap(self) -> float:
        return self.E_eps - self.lower_bound

    def as_dict(self) -> dict:
        return asdict(self)


def energy_terms(manifold, u, psi, spin, eps, kin: Kinematics | None = None):
    """Return ``(dirichlet, dirac, regularizer, psi_l2_sq)`` for raw arrays."""
    n = u.shape[0]
    w = cs.TWO_PI / n
    if kin is None:
        per = SpinStructure.PERIODIC
        du = cs.apply_symbol(u, cs.derivative_symbol(n, per), per, real=True)
        nabla = covariant_derivative_array(manifold, u, psi, spin)
    else:
        du, nabla = kin.du, kin.nabla_psi
    dirichlet = 0.5 * w * float(np.sum(du * du))
    dirac = 0.5 * w * float(np.real(np.vdot(psi, 1j * nabla)))
    regularizer = 0.5 * w * float(np.real(np.vdot(nabla, nabla)))
    psi_sq = w * float(np.real(np.vdot(psi, psi)))
    return dirichlet, dirac, regularizer, psi_sq


def energies(gamma: CurveField, psi: SpinorField, eps: float) -> EnergyReport:
    if eps <= 0:
        raise DomainError("eps must be positive")
    _check_compatible(gamma, psi)
    dirichlet, dirac, reg, psi_sq = energy_terms(gamma.manifold, gamma.points, psi.values, psi.spin, eps)
    E = dirichlet + dirac
    return EnergyReport(dirichlet, dirac, reg, E, E + eps * reg, float(eps), psi_sq)


@dataclass(frozen=True)
class ResidualReport:
    curve: np.ndarray
    spinor: np.ndarray
    curve_sup: float
    spinor_sup: float
    curve_l2: float
    spinor_l2: float
    regularized: bool

    @property
    def sup(self) -> float:
        return max(self.curve_sup, self.spinor_sup)

    @property
    def l2(self) -> float:
        return float(np.hypot(self.curve_l2, self.spinor_l2))


def field_norms(values, weight: float):
    pointwise = np.linalg.norm(values, axis=-1)
    return float(np.max(pointwise, initial=0.0)), float(np.sqrt(weight * np.sum(pointwise**2)))


def residual_arrays(manifold, u, psi, spin, eps, regularized=True, kin=None):
    if kin is None:
        kin = kinematics(manifold, u, psi, spin)
    R = curvature_R_array(manifold, u, kin.du, psi)
    if regularized:
        Rc = curvature_Rc_array(manifold, u, kin.du, psi, kin.nabla_psi)
        return kin.tension - R - eps * Rc, eps * kin.laplacian_psi - kin.dirac_psi
    return kin.tension - R, kin.dirac_psi


def el_residual(gamma: CurveField, psi: SpinorField, eps: float, regularized: bool = True) -> ResidualReport:
    """Residuals ``(tau - R - eps R_c, eps Lap psi - D psi)`` or ``(tau - R, D psi)``."""
    if eps <= 0:
        raise DomainError("eps must be positive")
    _check_compatible(gamma, psi)
    _check_on_manifold(gamma)
    rc, rs = residual_arrays(gamma.manifold, gamma.points, psi.values, psi.spin, eps, regularized)
    w = gamma.grid.weight
    csup, cl2 = field_norms(rc, w)
    ssup, sl2 = field_norms(rs, w)
    return ResidualReport(rc, rs, csup, ssup, cl2, sl2, regularized)


def l2_gradient(gamma: CurveField, psi: SpinorField, eps: float):
    """L2 gradient of ``E_eps``: ``(-tau + R + eps R_c, D psi - eps Lap psi)``.

    The spinor component is the gradient with respect to covariant
    variations; the curve component pairs with tangent variations of ``u``.
    """
    res = el_residual(gamma, psi, eps, regularized=True)
    return -res.curve, -res.spinor


def gradient_norm(curve_dir, spinor_dir, weight: float) -> float:
    return float(np.sqrt(weight * (np.sum(curve_dir**2) + np.sum(np.abs(spinor_dir) ** 2))))
