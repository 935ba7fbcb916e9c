"""Entropy-stable DG solvers for shallow water and Euler channel networks."""

from esdg.refelem import ElementKind, build_basis, build_operators, build_quadrature
from esdg.physics import Euler, ShallowWater, log_mean

__all__ = [
    "ElementKind",
    "build_basis",
    "build_operators",
    "build_quadrature",
    "Euler",
    "ShallowWater",
    "log_mean",
]
