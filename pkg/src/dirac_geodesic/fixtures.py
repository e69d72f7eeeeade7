"""Initial data: named curves, stationary pairs and seeded random perturbations."""

from __future__ import annotations

import numpy as np

from . import circle_spectral as cs
from .circle_spectral import CircleGrid, SpinStructure
from .errors import ConfigurationError
from .flow import FlowState
from .manifolds import CliffordTorus, FlatSpace, ManifoldSpec, Sphere
from .spinors import CurveField, SpinorField, construct_stationary

FIXTURES = ("great_circle", "latitude", "stationary_pair", "torus_winding", "modes", "random_perturbation")


def band_limited_field(n: int, q: int, spin, rng: np.random.Generator, kmax: float | None = None, complex_=False):
    """Random smooth field with modes ``|lambda| <= kmax`` (default ``n/4``), amplitudes ``~ 1/(1 + lambda^2)``."""
    spin = SpinStructure.parse(spin)
    kmax = n / 4 if kmax is None else kmax
    lam = cs.frequencies(n, spin)
    coeffs = rng.normal(size=(n, q)).astype(complex)
    if complex_:
        coeffs += 1j * rng.normal(size=(n, q))
    coeffs[np.abs(lam) > kmax] = 0.0
    coeffs /= (1.0 + lam**2)[:, None]
    values = cs.from_modes(coeffs, spin)
    if not complex_:
        # real part of a sum of complex modes is still band-limited
        return values.real
    return values


def great_circle(manifold: ManifoldSpec, grid: CircleGrid) -> CurveField:
    s = grid.nodes
    if isinstance(manifold, Sphere):
        pts = np.zeros((grid.n, manifold.ambient_dim))
        pts[:, 0] = manifold.radius * np.cos(s)
        pts[:, 1] = manifold.radius * np.sin(s)
        return CurveField(grid, pts, manifold)
    if isinstance(manifold, CliffordTorus):
        return torus_winding(manifold, grid, 1, 0)
    raise ConfigurationError(f"great_circle is not defined on {manifold.name}")


def latitude(manifold: ManifoldSpec, grid: CircleGrid, z0: float) -> CurveField:
    if not isinstance(manifold, Sphere) or manifold.ambient_dim != 3:
        raise ConfigurationError("latitude circles need round_sphere")
    r = manifold.radius
    if abs(z0) >= r:
        raise ConfigurationError(f"latitude height {z0} must satisfy |z0| < {r}")
    rho = np.sqrt(r * r - z0 * z0)
    s = grid.nodes
    pts = np.stack([rho * np.cos(s), rho * np.sin(s), np.full_like(s, z0)], axis=1)
    return CurveField.project_from(grid, pts, manifold)


def torus_winding(manifold: ManifoldSpec, grid: CircleGrid, p: int, q: int) -> CurveField:
    if not isinstance(manifold, CliffordTorus):
        raise ConfigurationError("torus_winding needs clifford_torus")
    if int(p) != p or int(q) != q:
        raise ConfigurationError("torus windings must be integers")
    r = manifold.radius
    s = grid.nodes
    pts = r * np.stack([np.cos(p * s), np.sin(p * s), np.cos(q * s), np.sin(q * s)], axis=1)
    return CurveField(grid, pts, manifold)


def from_mode_lists(manifold: ManifoldSpec, grid: CircleGrid, spin, curve_modes, spinor_modes) -> FlowState:
    """Curve and spinor from explicit mode lists.

    ``curve_modes`` entries are ``{k, amplitude: [q], phase}`` adding
    ``amplitude * cos(k s + phase)``; ``spinor_modes`` entries are
    ``{k, amplitude: [q], imag: [q]}`` adding ``(amplitude + i imag) exp(i k s)``
    with half-integer ``k`` for antiperiodic spinors.
    """
    spin = SpinStructure.parse(spin)
    s = grid.nodes
    q = manifold.ambient_dim
    pts = np.zeros((grid.n, q))
    for mode in curve_modes or []:
        amp = _vector(mode.get("amplitude"), q, "curve amplitude")
        pts += np.cos(float(mode.get("k", 0)) * s + float(mode.get("phase", 0.0)))[:, None] * amp
    curve = CurveField.project_from(grid, pts, manifold) if not isinstance(manifold, FlatSpace) else CurveField(
        grid, pts, manifold
    )
    vals = np.zeros((grid.n, q), dtype=complex)
    lam_set = cs.frequencies(grid.n, spin)
    for mode in spinor_modes or []:
        k = float(mode.get("k", 0))
        if not np.any(np.isclose(lam_set, k)):
            raise ConfigurationError(f"frequency {k} is not available for {spin.value} on {grid.n} nodes")
        amp = _vector(mode.get("amplitude", [0.0] * q), q, "spinor amplitude")
        amp = amp + 1j * _vector(mode.get("imag", [0.0] * q), q, "spinor imag")
        vals += np.exp(1j * k * s)[:, None] * amp
    return FlowState(0.0, curve, SpinorField.tangential(curve, spin, vals))


def _vector(value, q, what):
    arr = np.asarray(value, dtype=float).ravel()
    if arr.shape != (q,):
        raise ConfigurationError(f"{what} must have {q} entries")
    return arr


def random_perturbation(
    base: CurveField,
    spin,
    amplitude: float,
    spinor_amplitude: float,
    seed: int,
    kmax: float | None = None,
) -> FlowState:
    """Seeded band-limited perturbation of ``base`` with a small random tangent spinor."""
    rng = np.random.default_rng(seed)
    n, q = base.points.shape
    pts = base.points + amplitude * band_limited_field(n, q, SpinStructure.PERIODIC, rng, kmax)
    curve = CurveField.project_from(base.grid, pts, base.manifold)
    vals = spinor_amplitude * band_limited_field(n, q, spin, rng, kmax, complex_=True)
    return FlowState(0.0, curve, SpinorField.tangential(curve, spin, vals))


def stationary_pair(
    manifold: ManifoldSpec, grid: CircleGrid, chi: complex = 1.0, curve: CurveField | None = None, spin="sigma1"
) -> FlowState:
    curve = great_circle(manifold, grid) if curve is None else curve
    return FlowState(0.0, curve, construct_stationary(curve, chi, spin))


def build_initial(manifold: ManifoldSpec, grid: CircleGrid, spin, spec: dict, seed: int | None = None) -> FlowState:
    """Initial state from a configuration mapping with a ``kind`` key."""
    spec = dict(spec or {})
    kind = spec.pop("kind", "great_circle")
    spin = SpinStructure.parse(spin)

    def base_curve(b):
        b = dict(b or {"kind": "great_circle"})
        bk = b.pop("kind", "great_circle")
        if bk == "great_circle":
            return great_circle(manifold, grid)
        if bk == "latitude":
            return latitude(manifold, grid, float(b.get("z0", 0.0)))
        if bk == "torus_winding":
            return torus_winding(manifold, grid, b.get("p", 1), b.get("q", 0))
        raise ConfigurationError(f"unknown base curve {bk!r}")

    if kind in ("great_circle", "latitude", "torus_winding"):
        curve = base_curve({"kind": kind, **spec})
        amp = float(spec.get("spinor_amplitude", 0.0))
        if amp:
            rng = np.random.default_rng(seed if seed is not None else spec.get("seed", 0))
            vals = amp * band_limited_field(grid.n, manifold.ambient_dim, spin, rng, complex_=True)
        else:
            vals = np.zeros((grid.n, manifold.ambient_dim), dtype=complex)
        return FlowState(0.0, curve, SpinorField.tangential(curve, spin, vals))
    if kind == "stationary_pair":
        chi = complex(spec.get("chi", 1.0))
        return stationary_pair(manifold, grid, chi, base_curve(spec.get("base")), spin)
    if kind == "modes":
        return from_mode_lists(manifold, grid, spin, spec.get("curve"), spec.get("spinor"))
    if kind == "random_perturbation":
        if seed is None:
            seed = spec.get("seed")
        if seed is None:
            raise ConfigurationError("random_perturbation needs a seed")
        return random_perturbation(
            base_curve(spec.get("base")),
            spin,
            float(spec.get("amplitude", 0.1)),
            float(spec.get("spinor_amplitude", 0.1)),
            int(seed),
            spec.get("kmax"),
        )
    raise ConfigurationError(f"unknown initial data kind {kind!r}; choose from {', '.join(FIXTURES)}")
