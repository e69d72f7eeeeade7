"""Slow reference implementations used to cross-check the spectral code.

Nothing here calls the FFT path.  Derivatives come from dense DFT
differentiation matrices assembled by direct summation, energies are
re-assembled from those matrices, and coordinate formulas are evaluated
in an explicit chart with Christoffel symbols.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ChartDomainError, ConfigurationError, ResourceError
from .manifolds import FlatSpace

MAX_DENSE_SIDE = 4096


# -- dense differentiation -----------------------------------------------------


def _frequency_set(n: int, antiperiodic: bool) -> np.ndarray:
    if antiperiodic:
        return np.arange(-(n - 1), n, 2) / 2.0
    # Nyquist frequency dropped to match the collocation derivative
    return np.arange(-(n // 2) + 1, n // 2, dtype=float)


@lru_cache(maxsize=32)
def dft_derivative_matrix(n: int, antiperiodic: bool = False) -> np.ndarray:
    """Dense ``d/ds`` on nodal values, ``D[j, k] = (1/n) sum_lam i lam exp(i lam (s_j - s_k))``."""
    s = 2 * np.pi * np.arange(n) / n
    lam = _frequency_set(n, antiperiodic)
    diff = s[:, None] - s[None, :]
    D = np.zeros((n, n), dtype=complex)
    for f in lam:
        D += 1j * f * np.exp(1j * f * diff)
    D /= n
    if not antiperiodic:
        D = D.real.astype(complex)
    D.setflags(write=False)
    return D


def _is_antiperiodic(spin) -> bool:
    return getattr(spin, "value", str(spin)) in ("sigma2", "antiperiodic")


def _ddx(values, antiperiodic=False):
    D = dft_derivative_matrix(values.shape[0], antiperiodic)
    out = D @ values
    return out.real if not np.iscomplexobj(values) else out


# -- discrete energy and finite-difference gradient ----------------------------


def dense_energy(manifold, u, psi, spin, eps) -> float:
    """``E_eps`` re-assembled with dense differentiation matrices."""
    n = u.shape[0]
    w = 2 * np.pi / n
    du = _ddx(u)
    nabla = manifold.tangent_project(u, _ddx(psi.astype(complex), _is_antiperiodic(spin)))
    dirichlet = 0.5 * w * np.sum(du**2)
    dirac = 0.5 * w * np.sum(np.real(np.conj(psi) * 1j * nabla))
    reg = 0.5 * w * np.sum(np.abs(nabla) ** 2)
    return float(dirichlet + dirac + eps * reg)


def fd_energy_gradient(gamma, psi, eps: float, h: float = 1e-5):
    """Central differences of ``E_eps`` under per-node tangential perturbations.

    Curve probes move one node along a tangent direction, re-project it onto
    the target, and carry the spinor value along by re-projection.  Spinor
    probes move one value along ``e`` and ``i e`` for tangent ``e``.
    Returns ``(curve field, spinor field)`` as L2 gradients.
    """
    if not 1e-7 <= h <= 1e-3:
        raise ConfigurationError("probe size h must lie in [1e-7, 1e-3]")
    m = gamma.manifold
    spin = psi.spin
    u = np.array(gamma.points, dtype=float)
    vals = np.array(psi.values, dtype=complex)
    n, q = u.shape
    w = 2 * np.pi / n
    basis = m.tangent_basis(u)
    d = basis.shape[-1]
    g_curve = np.zeros((n, q))
    g_spin = np.zeros((n, q), dtype=complex)

    def energy(uu, pp):
        return dense_energy(m, uu, pp, spin, eps)

    for j in range(n):
        for a in range(d):
            e = basis[j, :, a]
            diffs = []
            for sign in (1.0, -1.0):
                uu = u.copy()
                pp = vals.copy()
                uu[j] = m.project(u[j] + sign * h * e)
                pp[j] = m.tangent_project(uu[j], vals[j])
                diffs.append(energy(uu, pp))
            g_curve[j] += (diffs[0] - diffs[1]) / (2 * h * w) * e
            for unit in (1.0, 1j):
                diffs = []
                for sign in (1.0, -1.0):
                    pp = vals.copy()
                    pp[j] = vals[j] + sign * h * unit * e
                    diffs.append(energy(u, pp))
                g_spin[j] += unit * (diffs[0] - diffs[1]) / (2 * h * w) * e
    return g_curve, g_spin


# -- charts ---------------------------------------------------------------------


class ChartFrame:
    """Coordinate chart ``y -> x`` with Christoffel symbols and curvature.

    Arrays follow the index order of the coordinate formulas:
    ``christoffel(y)[i, j, k] = Gamma^i_jk``, ``christoffel_derivative(y)[i, j, k, p]
    = d_p Gamma^i_jk`` and ``riemann(y)[m, l, i, j] = R^m_lij`` with
    ``R(d_i, d_j) d_l = R^m_lij d_m``.
    """

    dim: int

    def to_chart(self, x):
        raise NotImplementedError

    def from_chart(self, y):
        raise NotImplementedError

    def jacobian(self, y):
        """Columns are ``d x / d y^a``; shape ``(..., q, dim)``."""
        raise NotImplementedError

    def christoffel(self, y):
        raise NotImplementedError

    def christoffel_derivative(self, y):
        raise NotImplementedError

    def check_domain(self, y):
        pass

    def riemann(self, y):
        G = self.christoffel(y)
        dG = self.christoffel_derivative(y)
        # R^m_lij = d_i G^m_jl - d_j G^m_il + G^k_jl G^m_ik - G^k_il G^m_jk
        R = np.einsum("...mjli->...mlij", dG) - np.einsum("...milj->...mlij", dG)
        R = R + np.einsum("...kjl,...mik->...mlij", G, G) - np.einsum("...kil,...mjk->...mlij", G, G)
        return R

    def vector_to_chart(self, y, V):
        J = self.jacobian(y)
        G = np.einsum("...ka,...kb->...ab", J, J)
        return np.linalg.solve(G, np.einsum("...ka,...k->...a", J, V)[..., None])[..., 0]

    def vector_from_chart(self, y, v):
        return np.einsum("...ka,...a->...k", self.jacobian(y), v)

    def condition_number(self, y) -> np.ndarray:
        return np.linalg.cond(self.jacobian(y))


class SphereChart(ChartFrame):
    """Spherical coordinates ``(theta, phi)`` on the round sphere, polar caps excluded."""

    dim = 2

    def __init__(self, radius: float = 1.0, theta_min: float = 0.05):
        self.radius = float(radius)
        self.theta_min = float(theta_min)

    def to_chart(self, x):
        x = np.asarray(x, dtype=float)
        rho = np.linalg.norm(x, axis=-1)
        theta = np.arccos(np.clip(x[..., 2] / rho, -1.0, 1.0))
        phi = np.arctan2(x[..., 1], x[..., 0])
        y = np.stack([theta, phi], axis=-1)
        self.check_domain(y)
        return y

    def from_chart(self, y):
        th, ph = y[..., 0], y[..., 1]
        r = self.radius
        return r * np.stack([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)], axis=-1)

    def check_domain(self, y):
        th = np.asarray(y)[..., 0]
        if np.any(th < self.theta_min) or np.any(th > np.pi - self.theta_min):
            raise ChartDomainError(f"polar angle leaves [{self.theta_min}, pi - {self.theta_min}]")

    def jacobian(self, y):
        th, ph = y[..., 0], y[..., 1]
        r = self.radius
        dth = r * np.stack([np.cos(th) * np.cos(ph), np.cos(th) * np.sin(ph), -np.sin(th)], axis=-1)
        dph = r * np.stack([-np.sin(th) * np.sin(ph), np.sin(th) * np.cos(ph), np.zeros_like(th)], axis=-1)
        return np.stack([dth, dph], axis=-1)

    def christoffel(self, y):
        th = np.asarray(y)[..., 0]
        G = np.zeros(th.shape + (2, 2, 2))
        G[..., 0, 1, 1] = -np.sin(th) * np.cos(th)
        G[..., 1, 0, 1] = G[..., 1, 1, 0] = np.cos(th) / np.sin(th)
        return G

    def christoffel_derivative(self, y):
        th = np.asarray(y)[..., 0]
        dG = np.zeros(th.shape + (2, 2, 2, 2))
        dG[..., 0, 1, 1, 0] = -np.cos(2 * th)
        dG[..., 1, 0, 1, 0] = dG[..., 1, 1, 0, 0] = -1.0 / np.sin(th) ** 2
        return dG


class FlatChart(ChartFrame):
    """Identity coordinates on Euclidean space; all Christoffel symbols vanish."""

    def __init__(self, dim: int):
        self.dim = int(dim)

    def to_chart(self, x):
        return np.array(x, dtype=float)

    def from_chart(self, y):
        return np.array(y, dtype=float)

    def jacobian(self, y):
        y = np.asarray(y)
        return np.broadcast_to(np.eye(self.dim), y.shape[:-1] + (self.dim, self.dim))

    def christoffel(self, y):
        y = np.asarray(y)
        return np.zeros(y.shape[:-1] + (self.dim,) * 3)

    def christoffel_derivative(self, y):
        y = np.asarray(y)
        return np.zeros(y.shape[:-1] + (self.dim,) * 4)


def _chart_of(manifold) -> ChartFrame:
    chart = manifold.chart
    if chart is None:
        raise ConfigurationError(f"{manifold.name} has no chart oracle")
    return chart


def _chart_curve(chart, u):
    """Chart coordinates, velocity and acceleration components along the curve."""
    y = chart.to_chart(u)
    du = _ddx(u)
    v = chart.vector_to_chart(y, du)
    # chart velocity components are periodic even when the coordinates wind
    a = _ddx(v)
    return y, v, a


def chart_curvature_term(gamma, psi) -> np.ndarray:
    """``1/2 R^m_lij gamma'^l <psi^i, i psi^j>`` pushed forward to ambient coordinates."""
    chart = _chart_of(gamma.manifold)
    u = np.asarray(gamma.points)
    y, v, _ = _chart_curve(chart, u)
    comp = chart.vector_to_chart(y, psi.values.real) + 1j * chart.vector_to_chart(y, psi.values.imag)
    R = chart.riemann(y)
    pairing = np.real(np.conj(comp)[..., :, None] * 1j * comp[..., None, :])  # <psi^i, i psi^j>
    out = 0.5 * np.einsum("nmlij,nl,nij->nm", R, v, pairing)
    return chart.vector_from_chart(y, out)


def chart_tension(gamma) -> np.ndarray:
    """Geodesic curvature ``gamma''^k + Gamma^k_ij gamma'^i gamma'^j`` in ambient coordinates."""
    chart = _chart_of(gamma.manifold)
    y, v, a = _chart_curve(chart, np.asarray(gamma.points))
    tau = a + np.einsum("nkij,ni,nj->nk", chart.christoffel(y), v, v)
    return chart.vector_from_chart(y, tau)


def chart_laplacian(psi) -> np.ndarray:
    """Connection Laplacian of the spinor from its chart components (five-term expansion)."""
    gamma = psi.base
    chart = _chart_of(gamma.manifold)
    anti = _is_antiperiodic(psi.spin)
    y, v, a = _chart_curve(chart, np.asarray(gamma.points))
    comp = chart.vector_to_chart(y, psi.values.real) + 1j * chart.vector_to_chart(y, psi.values.imag)
    G = chart.christoffel(y)
    dG = chart.christoffel_derivative(y)
    d1 = _ddx(comp, anti)
    d2 = _ddx(d1, anti)
    lap = d2.copy()
    lap += 2 * np.einsum("ni,nkij,nj->nk", d1, G, v)
    lap += np.einsum("ni,nkijp,np,nj->nk", comp, dG, v, v)
    lap += np.einsum("ni,nkij,nj->nk", comp, G, a)
    lap += np.einsum("ni,nkij,nrkt,nj,nt->nr", comp, G, G, v, v)
    return chart.vector_from_chart(y, lap.real) + 1j * chart.vector_from_chart(y, lap.imag)


# -- dense operator spectra -----------------------------------------------------

OPERATORS = ("dirac", "laplacian", "regularized")


@dataclass(frozen=True)
class SpectrumReport:
    operator: str
    matrix: np.ndarray
    eigenvalues: np.ndarray
    symmetry_defect: float
    basis: np.ndarray

    def kernel_dimension(self, tol: float = 1e-8) -> int:
        return int(np.sum(np.abs(self.eigenvalues) <= tol))

    def kernel_basis(self, tol: float = 1e-8) -> np.ndarray:
        """Kernel vectors in ambient real coordinates, shape ``(2 n q, k)``."""
        sym = 0.5 * (self.matrix + self.matrix.T)
        vals, vecs = np.linalg.eigh(sym)
        return self.basis @ vecs[:, np.abs(vals) <= tol]


def _tangent_subspace(manifold, u, antiperiodic: bool, band_limited: bool):
    """Orthonormal basis (columns) of tangent spinor fields in real coordinates ``[Re; Im]``."""
    n, q = u.shape
    cols = []
    for j in range(n):
        P = manifold.tangent_project(np.broadcast_to(u[j], (q, q)), np.eye(q))
        U, S, _ = np.linalg.svd(P.T)
        frame = U[:, S > 0.5]
        for part in (0, 1):
            for c in frame.T:
                vec = np.zeros((2, n, q))
                vec[part, j] = c
                cols.append(vec.ravel())
    B = np.array(cols).T
    if band_limited and not antiperiodic:
        # drop the alternating (Nyquist) component of every ambient coordinate
        alt = (-1.0) ** np.arange(n)
        cons = []
        for part in (0, 1):
            for k in range(q):
                vec = np.zeros((2, n, q))
                vec[part, :, k] = alt
                cons.append(vec.ravel())
        C = np.array(cons) @ B
        _, S, Vt = np.linalg.svd(C)
        rank = int(np.sum(S > 1e-10 * S.max()))
        B = B @ Vt[rank:].T
    return B


def dense_operator_matrix(
    operator: str,
    gamma,
    eps: float = 1.0,
    spin="sigma1",
    band_limited: bool = False,
) -> SpectrumReport:
    """Dense matrix of ``D``, ``Lap`` or ``eps Lap - D`` on tangent spinor fields.

    The operator acts on complex fields; it is represented over real
    coordinates ``(Re, Im)`` so every complex eigenvalue appears twice.
    ``band_limited`` removes the alternating grid mode for periodic fields;
    that subspace is invariant only on flat targets, so curved ones are refused.
    """
    if operator not in OPERATORS:
        raise ConfigurationError(f"unknown operator {operator!r}; choose from {', '.join(OPERATORS)}")
    m = gamma.manifold
    if band_limited and not isinstance(m, FlatSpace):
        raise ConfigurationError("band_limited spectra are only defined on flat_space")
    u = np.asarray(gamma.points)
    n, q = u.shape
    side = n * 2 * q
    if side > MAX_DENSE_SIDE:
        raise ResourceError(f"dense operator side {side} exceeds {MAX_DENSE_SIDE}")
    anti = _is_antiperiodic(spin)
    Dm = dft_derivative_matrix(n, anti)

    def nabla(f):
        return m.tangent_project(u, Dm @ f)

    def apply(f):
        if operator == "dirac":
            return 1j * nabla(f)
        lap = nabla(nabla(f))
        if operator == "laplacian":
            return lap
        return eps * lap - 1j * nabla(f)

    B = _tangent_subspace(m, u, anti, band_limited)
    images = []
    for col in B.T:
        re, im = col.reshape(2, n, q)
        out = apply(re + 1j * im)
        images.append(np.concatenate([out.real.ravel(), out.imag.ravel()]))
    M = B.T @ np.array(images).T
    defect = float(np.max(np.abs(M - M.T))) if M.size else 0.0
    eig = np.sort(np.linalg.eigvalsh(0.5 * (M + M.T)))
    return SpectrumReport(operator, M, eig, defect, B)
