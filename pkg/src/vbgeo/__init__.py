"""Spherically symmetric metrics on the total space of a vector bundle.

Modules: weights, base_geometry, total_space, curvature, geodesics, holonomy,
hermitian, plus the scenario loader and the ``vbgeo`` command line.
"""
from .errors import ChartExitError, ConvergenceError, DomainError, ParameterError, VbgeoError
from .scenario import Scenario, load_scenario, preset
from .total_space import SplitVector, TotalPoint, TotalSpace
from .weights import WeightProfile, coefficients

__version__ = "0.1.0"

__all__ = [
    "ChartExitError",
    "ConvergenceError",
    "DomainError",
    "ParameterError",
    "VbgeoError",
    "Scenario",
    "load_scenario",
    "preset",
    "SplitVector",
    "TotalPoint",
    "TotalSpace",
    "WeightProfile",
    "coefficients",
]
