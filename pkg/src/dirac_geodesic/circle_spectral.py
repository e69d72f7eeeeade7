"""Fourier collocation on the circle for periodic and antiperiodic fields.

Fields are stored as nodal values at ``s_j = 2*pi*j/n``.  Periodic fields
(spin structure sigma_1) expand in integer frequencies, antiperiodic fields
(sigma_2) in half-integer frequencies.  Antiperiodic fields are gauge
transformed by ``exp(-i s/2)`` so a single periodic FFT serves both.

All transforms act along axis 0, so a ``(n, q)`` array is treated as ``q``
independent fields.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable

import numpy as np

from .errors import ConfigurationError, DomainError, InputShapeError

TWO_PI = 2.0 * np.pi


class SpinStructure(enum.Enum):
    PERIODIC = "sigma1"
    ANTIPERIODIC = "sigma2"

    @classmethod
    def parse(cls, value) -> "SpinStructure":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("σ", "sigma").replace("_", "")
        aliases = {
            "sigma1": cls.PERIODIC,
            "periodic": cls.PERIODIC,
            "1": cls.PERIODIC,
            "sigma2": cls.ANTIPERIODIC,
            "antiperiodic": cls.ANTIPERIODIC,
            "2": cls.ANTIPERIODIC,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ConfigurationError(f"unknown spin structure {value!r}") from None

    @property
    def shift(self) -> float:
        """Offset added to integer frequencies (0 or 1/2)."""
        return 0.0 if self is SpinStructure.PERIODIC else 0.5


@dataclass(frozen=True)
class CircleGrid:
    n: int

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 4 or self.n % 2:
            raise InputShapeError(f"grid size must be an even integer >= 4, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))

    @property
    def nodes(self) -> np.ndarray:
        return TWO_PI * np.arange(self.n) / self.n

    @property
    def weight(self) -> float:
        """Trapezoidal quadrature weight ``2*pi/n``."""
        return TWO_PI / self.n

    def integrate(self, values) -> float | np.ndarray:
        return self.weight * np.sum(values, axis=0)


def _check_length(values, grid: CircleGrid | None) -> int:
    values = np.asarray(values)
    if values.ndim == 0:
        raise InputShapeError("expected nodal values, got a scalar")
    n = values.shape[0]
    if grid is not None and n != grid.n:
        raise InputShapeError(f"expected {grid.n} nodal values, got {n}")
    if n < 4 or n % 2:
        raise InputShapeError(f"nodal length must be even and >= 4, got {n}")
    return n


@lru_cache(maxsize=64)
def frequencies(n: int, spin: SpinStructure) -> np.ndarray:
    """Frequencies in FFT order; for sigma_2 the set is symmetric, +-1/2 ... +-(n-1)/2."""
    k = np.fft.fftfreq(n, d=1.0 / n)
    lam = k + spin.shift
    lam.setflags(write=False)
    return lam


@lru_cache(maxsize=64)
def _gauge(n: int, spin: SpinStructure):
    if spin is SpinStructure.PERIODIC:
        return None
    s = TWO_PI * np.arange(n) / n
    g = np.exp(-0.5j * s)
    g.setflags(write=False)
    return g


@lru_cache(maxsize=64)
def derivative_symbol(n: int, spin: SpinStructure) -> np.ndarray:
    """Multiplier ``i*lambda`` of d/ds in mode space (periodic Nyquist mode zeroed)."""
    sym = 1j * frequencies(n, spin)
    if spin is SpinStructure.PERIODIC:
        sym = sym.copy()
        sym[n // 2] = 0.0
    sym.setflags(write=False)
    return sym


def _expand(arr: np.ndarray, ndim: int) -> np.ndarray:
    return arr.reshape(arr.shape + (1,) * (ndim - 1))


def to_modes(values, spin: SpinStructure) -> np.ndarray:
    """Raw mode coefficients (FFT order) along axis 0, normalised so ``f = sum c e^{i lambda s}``."""
    values = np.asarray(values)
    n = values.shape[0]
    g = _gauge(n, spin)
    if g is not None:
        values = values * _expand(g, values.ndim)
    return np.fft.fft(values, axis=0) / n


def from_modes(coeffs, spin: SpinStructure) -> np.ndarray:
    coeffs = np.asarray(coeffs)
    n = coeffs.shape[0]
    values = np.fft.ifft(coeffs, axis=0) * n
    g = _gauge(n, spin)
    if g is not None:
        values = values * _expand(np.conj(g), values.ndim)
    return values


def apply_symbol(values, symbol, spin: SpinStructure, real: bool | None = None) -> np.ndarray:
    """Apply a diagonal mode-space multiplier; real input stays real when ``real`` is unset."""
    values = np.asarray(values)
    if real is None:
        real = not np.iscomplexobj(values)
    out = from_modes(_expand(np.asarray(symbol), values.ndim) * to_modes(values, spin), spin)
    return out.real if real else out


@dataclass(frozen=True)
class ModeVector:
    """Coefficients ``b_k`` of ``sum_k b_k exp(i lambda_k s)`` in FFT order."""

    spin: SpinStructure
    coefficients: np.ndarray

    @property
    def n(self) -> int:
        return self.coefficients.shape[0]

    @property
    def frequencies(self) -> np.ndarray:
        return frequencies(self.n, self.spin)

    def coefficient(self, lam: float):
        """Coefficient of the mode with frequency ``lam``."""
        idx = np.flatnonzero(np.isclose(self.frequencies, lam))
        if idx.size == 0:
            raise DomainError(f"frequency {lam} not represented on {self.n} nodes")
        return self.coefficients[idx[0]]

    def evaluate(self, s) -> np.ndarray:
        """Evaluate the trigonometric sum at arbitrary points (direct summation)."""
        s = np.atleast_1d(np.asarray(s, dtype=float))
        phase = np.exp(1j * np.outer(s, self.frequencies))
        return np.tensordot(phase, self.coefficients, axes=(1, 0))

    @classmethod
    def from_dict(cls, n: int, spin: SpinStructure, modes: dict, trailing_shape=()) -> "ModeVector":
        spin = SpinStructure.parse(spin)
        lam = frequencies(n, spin)
        coeffs = np.zeros((n,) + tuple(trailing_shape), dtype=complex)
        for freq, amp in modes.items():
            idx = np.flatnonzero(np.isclose(lam, float(freq)))
            if idx.size == 0:
                raise DomainError(f"frequency {freq} not representable for {spin.value} on {n} nodes")
            coeffs[idx[0]] = amp
        return cls(spin, coeffs)


def forward_transform(values, spin, grid: CircleGrid | None = None) -> ModeVector:
    spin = SpinStructure.parse(spin)
    _check_length(values, grid)
    return ModeVector(spin, to_modes(np.asarray(values, dtype=complex), spin))


def inverse_transform(modes: ModeVector) -> np.ndarray:
    return from_modes(modes.coefficients, modes.spin)


def differentiate(values, spin, grid: CircleGrid | None = None) -> np.ndarray:
    spin = SpinStructure.parse(spin)
    n = _check_length(values, grid)
    return apply_symbol(values, derivative_symbol(n, spin), spin)


def untwisted_dirac(values, spin, grid: CircleGrid | None = None) -> np.ndarray:
    """``i d/ds``; the mode ``exp(i lambda s)`` is an eigenfunction with eigenvalue ``-lambda``."""
    return 1j * differentiate(np.asarray(values, dtype=complex), spin, grid)


def dirac_eigenvalues(spin, k_range: Iterable[int]) -> list[float]:
    """Eigenvalue labels ``lambda_k = k`` (sigma_1) or ``k + 1/2`` (sigma_2)."""
    spin = SpinStructure.parse(spin)
    ks = list(k_range)
    if not ks:
        raise DomainError("k_range must be non-empty")
    return [float(k) + spin.shift for k in ks]


def heat_exact(initial: ModeVector, t: float) -> ModeVector:
    """Solution of ``f_t = f_ss``: each coefficient scaled by ``exp(-k^2 t)``."""
    if t < 0:
        raise DomainError("t must be non-negative")
    if initial.spin is not SpinStructure.PERIODIC:
        raise DomainError("heat_exact expects periodic modes")
    lam = _expand(initial.frequencies, initial.coefficients.ndim)
    return ModeVector(initial.spin, initial.coefficients * np.exp(-lam**2 * t))


def flat_spinor_rate(lam, eps: float):
    return lam - eps * lam**2


def flat_spinor_exact(initial: ModeVector, eps: float, t: float, spin=None) -> ModeVector:
    """Solution of ``psi_t = eps psi_ss - i psi_s``: coefficients scaled by ``exp((lam - eps lam^2) t)``."""
    if eps <= 0:
        raise DomainError("eps must be positive")
    if t < 0:
        raise DomainError("t must be non-negative")
    if spin is not None and SpinStructure.parse(spin) is not initial.spin:
        raise ConfigurationError("spin structure of modes does not match requested spin structure")
    lam = _expand(initial.frequencies, initial.coefficients.ndim)
    return ModeVector(initial.spin, initial.coefficients * np.exp(flat_spinor_rate(lam, eps) * t))


Kernel = Callable[[float], ModeVector]


def heat_kernel(n: int) -> Kernel:
    """Fundamental solution of the heat equation as a function of time (all ``a_k = 1``)."""
    lam = frequencies(n, SpinStructure.PERIODIC)
    return lambda t: ModeVector(SpinStructure.PERIODIC, np.exp(-lam**2 * t).astype(complex))


def flat_spinor_kernel(n: int, spin, eps: float) -> Kernel:
    """Fundamental solution ``chi(s, t)`` of the flat spinor flow (all ``b_k = 1``)."""
    spin = SpinStructure.parse(spin)
    if eps <= 0:
        raise DomainError("eps must be positive")
    lam = frequencies(n, spin)
    return lambda t: ModeVector(spin, np.exp(flat_spinor_rate(lam, eps) * t).astype(complex))


def convolve_initial(psi0, fundamental: Kernel, t: float, spin) -> np.ndarray:
    """``(1/2pi) int psi0(y) chi(s - y, t) dy`` evaluated by the convolution theorem."""
    spin = SpinStructure.parse(spin)
    _check_length(psi0, None)
    kernel = fundamental(t)
    if kernel.spin is not spin:
        raise ConfigurationError("kernel and initial data carry different spin structures")
    psi0 = np.asarray(psi0, dtype=complex)
    if kernel.n != psi0.shape[0]:
        raise InputShapeError("kernel and initial data sizes differ")
    coeffs = to_modes(psi0, spin) * _expand(kernel.coefficients, psi0.ndim)
    return from_modes(coeffs, spin)


def l2_pairing(a, b, grid: CircleGrid | None = None) -> float:
    """``Re int conj(a) b ds`` by the trapezoidal rule, summed over trailing axes."""
    a = np.asarray(a)
    n = a.shape[0]
    w = TWO_PI / n if grid is None else grid.weight
    return float(w * np.real(np.vdot(a, np.asarray(b))))
