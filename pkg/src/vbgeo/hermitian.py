"""Generalized Sasaki almost-Hermitian structure on a tangent-bundle total space.

J = e^{-psi} B - e^{psi} B^t with psi = phi2 - phi1, where B sends the
horizontal lift of a vector to its vertical lift and B^t is its adjoint for
the unweighted product metric. The fundamental form is omega(X, Y) = g(JX, Y).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import DomainError, ParameterError
from .total_space import TotalPoint, TotalSpace

Array = np.ndarray

__all__ = [
    "SasakiStructure",
    "sasaki_structure",
    "sasaki_J",
    "omega",
    "omega_coordinates",
    "d_omega_norm",
]


@dataclass(frozen=True)
class SasakiStructure:
    psi: float
    psibar: float
    B: Array  # unweighted orthonormal split frame
    J: Array  # same frame


def _require_tangent(space: TotalSpace) -> None:
    if not space.bundle.is_tangent_bundle:
        raise ParameterError("Sasaki structure needs the tangent bundle (k = m)")


def sasaki_structure(space: TotalSpace, p: TotalPoint) -> SasakiStructure:
    _require_tangent(space)
    space.check(p)
    p1, p2 = space.weights.values(p.r)
    psi = p2 - p1
    m = space.m
    b = np.zeros((2 * m, 2 * m))
    b[m:, :m] = np.eye(m)
    # frame is orthonormal for the unweighted metric, so B^t is the transpose
    j = math.exp(-psi) * b - math.exp(psi) * b.T
    return SasakiStructure(psi=psi, psibar=p1 + p2, B=b, J=j)


def sasaki_J(space: TotalSpace, p: TotalPoint) -> Array:
    """J in the unweighted orthonormal split frame: [[0, -e^psi I], [e^-psi I, 0]]."""
    return sasaki_structure(space, p).J


def _orthonormal_metric(space: TotalSpace, p: TotalPoint) -> Array:
    e1, e2 = space.weight_factors(p)
    m = space.m
    return np.diag(np.concatenate([np.full(m, e1), np.full(m, e2)]))


def omega(space: TotalSpace, p: TotalPoint) -> Array:
    """omega[a, b] = g(J e_a, e_b) in the unweighted orthonormal split frame."""
    return sasaki_J(space, p).T @ _orthonormal_metric(space, p)


def _coordinate_to_orthonormal(space: TotalSpace, p: TotalPoint) -> Array:
    m = space.m
    t = np.eye(2 * m)
    t[:m, :m] = np.linalg.inv(space.chart.frame(p.x))
    return t @ space.frame_change(p)


def omega_coordinates(space: TotalSpace, p: TotalPoint) -> Array:
    """Components omega(d_a, d_b) in the coordinate frame (x, y)."""
    mat = _coordinate_to_orthonormal(space, p)
    return mat.T @ omega(space, p) @ mat


def d_omega_norm(space: TotalSpace, p: TotalPoint, h: float = 1e-4) -> float:
    """Max |d omega| over coordinate index triples, by central differences."""
    _require_tangent(space)
    space.check(p)
    n = space.n
    if n < 3:
        return 0.0
    coords = p.coords
    eye = np.eye(n)
    for sgn in (1.0, -1.0):
        for e in eye:
            if not space.contains(TotalPoint(*np.split(coords + sgn * h * e, [space.m]))):
                raise DomainError("exterior-derivative stencil leaves the domain")

    def om(c):
        return omega_coordinates(space, TotalPoint(c[: space.m], c[space.m:]))

    d = np.array([(om(coords + h * e) - om(coords - h * e)) / (2 * h) for e in eye])
    worst = 0.0
    for a, b, c in combinations(range(n), 3):
        val = d[a, b, c] + d[b, c, a] + d[c, a, b]
        worst = max(worst, abs(float(val)))
    return worst
