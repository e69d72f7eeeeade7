"""Compact targets isometrically embedded in Euclidean space.

Every catalog entry carries closed-form geometry of the embedding: the
closest-point map, the tangent projector, the second fundamental form II,
the shape operator P (``<P(nu, X), Y> = <nu, II(X, Y)>``) and the Riemann
tensor, with the convention

    R(X, Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z,
    <R(X, Y)Z, W> = <II(X, W), II(Y, Z)> - <II(X, Z), II(Y, W)>.

All geometric maps are vectorised: points and vectors have shape ``(..., q)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConfigurationError, ProjectionSingularityError

SINGULAR_RADIUS = 1e-12


def _dot(a, b):
    return np.sum(a * b, axis=-1, keepdims=True)


@dataclass(frozen=True)
class ManifoldSpec:
    name: str
    ambient_dim: int
    intrinsic_dim: int
    params: dict = field(default_factory=dict)

    def project(self, points) -> np.ndarray:
        raise NotImplementedError

    def tangent_project(self, points, vectors) -> np.ndarray:
        """Apply the tangent projector at ``points`` (on N) to real or complex ``vectors``."""
        raise NotImplementedError

    def second_fundamental_form(self, points, X, Y) -> np.ndarray:
        raise NotImplementedError

    def shape_operator(self, points, nu, X) -> np.ndarray:
        raise NotImplementedError

    def curvature(self, points, X, Y, Z) -> np.ndarray:
        raise NotImplementedError

    def projector(self, points) -> np.ndarray:
        """Dense projector matrices, shape ``(..., q, q)``."""
        points = np.asarray(points, dtype=float)
        eye = np.eye(self.ambient_dim)
        basis = np.broadcast_to(eye, points.shape[:-1] + eye.shape)
        # columns P e_k
        cols = self.tangent_project(points[..., None, :], basis)
        return np.swapaxes(cols, -1, -2)

    def tangent_basis(self, points) -> np.ndarray:
        """Orthonormal tangent frames, shape ``(..., q, intrinsic_dim)``."""
        w, v = np.linalg.eigh(self.projector(points))
        return v[..., -self.intrinsic_dim:]

    def distance(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        return np.linalg.norm(points - self.project(points), axis=-1)

    def normal_part(self, points, vectors):
        return vectors - self.tangent_project(points, vectors)

    @property
    def chart(self):
        return None

    def closed_geodesic(self, p, v) -> Callable[[np.ndarray], np.ndarray]:
        raise ConfigurationError(f"no closed geodesics through this data on {self.name}")


@dataclass(frozen=True)
class Sphere(ManifoldSpec):
    """Round sphere of radius r in R^q (q = 2 gives a circle)."""

    radius: float = 1.0

    def project(self, points):
        points = np.asarray(points, dtype=float)
        norm = np.linalg.norm(points, axis=-1, keepdims=True)
        if np.any(norm < SINGULAR_RADIUS):
            raise ProjectionSingularityError(f"{self.name}: cannot project the origin")
        return self.radius * points / norm

    def _unit_normal(self, points):
        return np.asarray(points, dtype=float) / self.radius

    def tangent_project(self, points, vectors):
        nrm = self._unit_normal(points)
        return vectors - nrm * _dot(nrm, vectors)

    def second_fundamental_form(self, points, X, Y):
        return -_dot(X, Y) * np.asarray(points, dtype=float) / self.radius**2

    def shape_operator(self, points, nu, X):
        return -_dot(nu, points) / self.radius**2 * X

    def curvature(self, points, X, Y, Z):
        if self.intrinsic_dim == 1:
            return np.zeros(np.broadcast_shapes(np.shape(X), np.shape(Y), np.shape(Z)))
        return (_dot(Y, Z) * X - _dot(X, Z) * Y) / self.radius**2

    @property
    def chart(self):
        if self.ambient_dim != 3:
            return None
        from .oracle import SphereChart

        return SphereChart(self.radius)

    def closed_geodesic(self, p, v):
        p = np.asarray(p, dtype=float)
        v = np.asarray(v, dtype=float)
        if abs(np.linalg.norm(p) - self.radius) > 1e-10:
            raise ConfigurationError("base point is not on the sphere")
        if abs(np.dot(p, v)) > 1e-10 * max(1.0, np.linalg.norm(v)):
            raise ConfigurationError("initial velocity is not tangent")
        speed = np.linalg.norm(v)
        if speed == 0.0:
            return lambda s: np.broadcast_to(p, (len(s), self.ambient_dim)).copy()
        freq = speed / self.radius
        if abs(freq - round(freq)) > 1e-9:
            raise ConfigurationError(f"great circle with angular speed {freq} does not close over [0, 2pi]")
        e = self.radius * v / speed
        return lambda s: np.cos(freq * s)[:, None] * p + np.sin(freq * s)[:, None] * e


@dataclass(frozen=True)
class CliffordTorus(ManifoldSpec):
    """Product of two circles of radius 1/sqrt(2) in R^2 x R^2."""

    radius: float = 1.0 / np.sqrt(2.0)

    def _blocks(self, x):
        return x[..., :2], x[..., 2:]

    def project(self, points):
        points = np.asarray(points, dtype=float)
        out = []
        for blk in self._blocks(points):
            norm = np.linalg.norm(blk, axis=-1, keepdims=True)
            if np.any(norm < SINGULAR_RADIUS):
                raise ProjectionSingularityError("clifford_torus: a circle factor has zero radius")
            out.append(self.radius * blk / norm)
        return np.concatenate(out, axis=-1)

    def tangent_project(self, points, vectors):
        pa, pb = self._blocks(np.asarray(points, dtype=float) / self.radius)
        va, vb = self._blocks(vectors)
        return np.concatenate([va - pa * _dot(pa, va), vb - pb * _dot(pb, vb)], axis=-1)

    def second_fundamental_form(self, points, X, Y):
        pa, pb = self._blocks(np.asarray(points, dtype=float))
        xa, xb = self._blocks(X)
        ya, yb = self._blocks(Y)
        r2 = self.radius**2
        return np.concatenate([-_dot(xa, ya) * pa / r2, -_dot(xb, yb) * pb / r2], axis=-1)

    def shape_operator(self, points, nu, X):
        pa, pb = self._blocks(np.asarray(points, dtype=float))
        na, nb = self._blocks(nu)
        xa, xb = self._blocks(X)
        r2 = self.radius**2
        return np.concatenate([-_dot(na, pa) * xa / r2, -_dot(nb, pb) * xb / r2], axis=-1)

    def curvature(self, points, X, Y, Z):
        return np.zeros(np.broadcast_shapes(np.shape(X), np.shape(Y), np.shape(Z)))

    def closed_geodesic(self, p, v):
        p = np.asarray(p, dtype=float)
        v = np.asarray(v, dtype=float)
        if np.max(self.distance(p)) > 1e-10:
            raise ConfigurationError("base point is not on the torus")
        if np.linalg.norm(v - self.tangent_project(p, v)) > 1e-10 * max(1.0, np.linalg.norm(v)):
            raise ConfigurationError("initial velocity is not tangent")
        parts = []
        for pa, va in zip(self._blocks(p), self._blocks(v)):
            speed = np.linalg.norm(va)
            freq = speed / self.radius
            if abs(freq - round(freq)) > 1e-9:
                raise ConfigurationError(f"torus factor winding {freq} is not an integer")
            e = self.radius * va / speed if speed > 0 else np.zeros(2)
            parts.append((pa, e, freq))

        def curve(s):
            return np.concatenate(
                [np.cos(f * s)[:, None] * pa + np.sin(f * s)[:, None] * e for pa, e, f in parts], axis=-1
            )

        return curve


@dataclass(frozen=True)
class FlatSpace(ManifoldSpec):
    """R^q itself: identity projection, vanishing II and curvature."""

    def project(self, points):
        return np.array(points, dtype=float)

    def tangent_project(self, points, vectors):
        return np.array(vectors)

    def second_fundamental_form(self, points, X, Y):
        return np.zeros(np.broadcast_shapes(np.shape(X), np.shape(Y)))

    def shape_operator(self, points, nu, X):
        return np.zeros(np.broadcast_shapes(np.shape(nu), np.shape(X)))

    def curvature(self, points, X, Y, Z):
        return np.zeros(np.broadcast_shapes(np.shape(X), np.shape(Y), np.shape(Z)))

    @property
    def chart(self):
        from .oracle import FlatChart

        return FlatChart(self.ambient_dim)

    def closed_geodesic(self, p, v):
        p = np.asarray(p, dtype=float)
        if np.linalg.norm(v) > 0:
            raise ConfigurationError("straight lines in flat space do not close over the circle")
        return lambda s: np.broadcast_to(p, (len(s), self.ambient_dim)).copy()


CATALOG = ("unit_circle", "round_sphere", "clifford_torus", "flat_space")


def catalog(name: str, **params) -> ManifoldSpec:
    """Build a catalog manifold by name.

    ``round_sphere`` accepts ``radius``; ``flat_space`` accepts ``dim``.
    """
    if name == "unit_circle":
        return Sphere("unit_circle", 2, 1, {}, radius=1.0)
    if name == "round_sphere":
        r = float(params.get("radius", 1.0))
        if r <= 0:
            raise ConfigurationError("sphere radius must be positive")
        return Sphere("round_sphere", 3, 2, {"radius": r}, radius=r)
    if name == "clifford_torus":
        return CliffordTorus("clifford_torus", 4, 2, {})
    if name == "flat_space":
        q = int(params.get("dim", params.get("q", 3)))
        if q < 1:
            raise ConfigurationError("flat_space dimension must be positive")
        return FlatSpace("flat_space", q, q, {"dim": q})
    raise ConfigurationError(f"unknown manifold {name!r}; choose from {', '.join(CATALOG)}")


def project_point(spec: ManifoldSpec, p) -> np.ndarray:
    return spec.project(p)


def geodesic_fixture(spec: ManifoldSpec, p, v):
    """Return a factory ``grid -> CurveField`` sampling the closed geodesic through ``(p, v)``.

    The geodesic is ``s -> exp_p(s v)`` on ``[0, 2pi)``; it must close up, so
    ``|v|`` has to be compatible with the closed geodesics of the target.
    """
    curve = spec.closed_geodesic(p, v)

    def make(grid):
        from .spinors import CurveField

        return CurveField(grid, curve(grid.nodes), spec)

    return make
