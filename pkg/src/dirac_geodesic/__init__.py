"""Simulator for the regularized Dirac-geodesic gradient flow on the circle."""

from .circle_spectral import CircleGrid, ModeVector, SpinStructure
from .energy import EnergyReport, el_residual, energies, l2_gradient
from .manifolds import ManifoldSpec, catalog
from .spinors import CurveField, SpinorField

__all__ = [
    "CircleGrid",
    "CurveField",
    "EnergyReport",
    "ManifoldSpec",
    "ModeVector",
    "SpinStructure",
    "SpinorField",
    "catalog",
    "el_residual",
    "energies",
    "l2_gradient",
]

__version__ = "0.1.0"
