"""The weighted metric on the total space of a vector bundle and its Levi-Civita connection.

Tangent vectors of E are handled in the split frame (H_i, V_alpha) where
H_i = d_i - y^a Gamma^{E,b}_{ia} d_{y^b} is the horizontal lift and
V_alpha = d_{y^alpha}. Inner products inside the tensors C, A and calR use the
unweighted pullback metrics; the weights only enter through explicit factors.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .base_geometry import BaseChart, BundleConnection
from .errors import DomainError, ParameterError
from .weights import ConnectionCoefficients, WeightProfile, coefficients

Array = np.ndarray

__all__ = [
    "TotalPoint",
    "SplitVector",
    "MetricAtPoint",
    "FieldJet",
    "TotalSpace",
]


@dataclass(frozen=True)
class TotalPoint:
    x: Array
    y: Array

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float).reshape(-1))
        object.__setattr__(self, "y", np.asarray(self.y, dtype=float).reshape(-1))

    @property
    def r(self) -> float:
        return float(self.y @ self.y)

    @property
    def coords(self) -> Array:
        return np.concatenate([self.x, self.y])

    def shifted(self, delta: Array) -> "TotalPoint":
        m = len(self.x)
        return TotalPoint(self.x + delta[:m], self.y + delta[m:])


@dataclass(frozen=True)
class SplitVector:
    """Horizontal part in the frame pi*d_i and vertical part in the frame pi*e_alpha."""

    h: Array
    v: Array

    def __post_init__(self):
        object.__setattr__(self, "h", np.asarray(self.h, dtype=float).reshape(-1))
        object.__setattr__(self, "v", np.asarray(self.v, dtype=float).reshape(-1))

    @classmethod
    def from_array(cls, arr: Array, m: int) -> "SplitVector":
        arr = np.asarray(arr, dtype=float)
        return cls(arr[:m], arr[m:])

    def as_array(self) -> Array:
        return np.concatenate([self.h, self.v])

    @property
    def horizontal(self) -> "SplitVector":
        return SplitVector(self.h, np.zeros_like(self.v))

    @property
    def vertical(self) -> "SplitVector":
        return SplitVector(np.zeros_like(self.h), self.v)

    def __add__(self, other: "SplitVector") -> "SplitVector":
        return SplitVector(self.h + other.h, self.v + other.v)

    def __sub__(self, other: "SplitVector") -> "SplitVector":
        return SplitVector(self.h - other.h, self.v - other.v)

    def __mul__(self, s: float) -> "SplitVector":
        return SplitVector(s * self.h, s * self.v)

    __rmul__ = __mul__

    def __neg__(self) -> "SplitVector":
        return SplitVector(-self.h, -self.v)


@dataclass(frozen=True)
class MetricAtPoint:
    matrix: Array
    split_matrix: Array
    frame_change: Array  # P with split components = P @ coordinate components

    def is_positive_definite(self) -> bool:
        return bool(np.min(np.linalg.eigvalsh(self.matrix)) > 0.0)


@dataclass(frozen=True)
class FieldJet:
    """First-order jet of a vector field at a point.

    ``jacobian[A, c]`` is the derivative of the A-th split component along the
    c-th coordinate (x first, then y).
    """

    value: SplitVector
    jacobian: Array


Scalar = Union[float, Callable[[TotalPoint], float]]


@dataclass(frozen=True)
class TotalSpace:
    chart: BaseChart
    bundle: BundleConnection
    weights: WeightProfile

    def __post_init__(self):
        if self.bundle.chart.m != self.chart.m:
            raise ParameterError("bundle and chart dimensions differ")

    @property
    def m(self) -> int:
        return self.chart.m

    @property
    def k(self) -> int:
        return self.bundle.k

    @property
    def n(self) -> int:
        return self.m + self.k

    # -- points and frames -------------------------------------------------

    def point(self, x, y=None) -> TotalPoint:
        x = np.asarray(x, dtype=float).reshape(-1)
        y = np.zeros(self.k) if y is None else np.asarray(y, dtype=float).reshape(-1)
        if x.shape != (self.m,) or y.shape != (self.k,):
            raise ParameterError(f"point needs x of length {self.m} and y of length {self.k}")
        p = TotalPoint(x, y)
        self.check(p)
        return p

    def check(self, p: TotalPoint) -> None:
        self.chart.check_point(p.x)
        if not np.all(np.isfinite(p.y)):
            raise DomainError("fibre coordinates not finite")
        self.weights.check_domain(p.r)

    def contains(self, p: TotalPoint) -> bool:
        try:
            self.check(p)
        except DomainError:
            return False
        return True

    def random_point(self, rng: np.random.Generator, r_range=(0.0, 1.0)) -> TotalPoint:
        """Point with x in the chart interior and r uniform in r_range (clipped to the domain)."""
        lo = max(r_range[0], self.weights.r_min)
        hi = min(r_range[1], 0.9 * self.weights.r_max if math.isfinite(self.weights.r_max) else r_range[1])
        x = self.chart.sample(rng)[0]
        direction = rng.normal(size=self.k)
        direction /= np.linalg.norm(direction)
        r = rng.uniform(lo, hi)
        if r <= self.weights.r_min:
            r = 0.5 * (lo + hi)
        return self.point(x, math.sqrt(r) * direction)

    def random_vector(self, rng: np.random.Generator) -> SplitVector:
        return SplitVector(rng.normal(size=self.m), rng.normal(size=self.k))

    def coefficients(self, p: TotalPoint) -> ConnectionCoefficients:
        return coefficients(self.weights, p.r)

    def weight_factors(self, p: TotalPoint) -> tuple[float, float]:
        """(exp(2 phi1), exp(2 phi2)) at p."""
        p1, p2 = self.weights.values(p.r)
        return math.exp(2.0 * p1), math.exp(2.0 * p2)

    def lift_matrix(self, p: TotalPoint) -> Array:
        """N[b, i] = y^a Gamma^{E,b}_{ia}, so that d_i = H_i + N[b, i] V_b."""
        return np.einsum("iba,a->bi", self.bundle.gamma(p.x), p.y)

    def frame_change(self, p: TotalPoint) -> Array:
        n_mat = self.lift_matrix(p)
        out = np.eye(self.n)
        out[self.m:, : self.m] = n_mat
        return out

    def split(self, p: TotalPoint, coord_vec) -> SplitVector:
        coord_vec = np.asarray(coord_vec, dtype=float)
        u, w = coord_vec[: self.m], coord_vec[self.m:]
        return SplitVector(u, w + self.lift_matrix(p) @ u)

    def unsplit(self, p: TotalPoint, vec: SplitVector) -> Array:
        return np.concatenate([vec.h, vec.v - self.lift_matrix(p) @ vec.h])

    # -- metrics -----------------------------------------------------------

    def inner_M(self, p: TotalPoint, X: SplitVector, Y: SplitVector) -> float:
        return float(X.h @ self.chart.metric(p.x) @ Y.h)

    @staticmethod
    def inner_E(X: SplitVector, Y: SplitVector) -> float:
        return float(X.v @ Y.v)

    def xi(self, p: TotalPoint) -> SplitVector:
        return SplitVector(np.zeros(self.m), p.y.copy())

    def xi_flat(self, p: TotalPoint, X: SplitVector) -> float:
        return float(p.y @ X.v)

    def g(self, p: TotalPoint, X: SplitVector, Y: SplitVector) -> float:
        e1, e2 = self.weight_factors(p)
        return e1 * self.inner_M(p, X, Y) + e2 * self.inner_E(X, Y)

    def split_metric(self, p: TotalPoint) -> Array:
        e1, e2 = self.weight_factors(p)
        out = np.zeros((self.n, self.n))
        out[: self.m, : self.m] = e1 * self.chart.metric(p.x)
        out[self.m:, self.m:] = e2 * np.eye(self.k)
        return out

    def _coordinate_blocks(self, p: TotalPoint, hscale: float, fibre: Array) -> Array:
        """Coordinate matrix of hscale * g_M + (fibre block) on the vertical part."""
        n_mat = self.lift_matrix(p)
        m = self.m
        out = np.empty((self.n, self.n))
        out[:m, :m] = hscale * self.chart.metric(p.x) + n_mat.T @ fibre @ n_mat
        out[:m, m:] = n_mat.T @ fibre
        out[m:, :m] = fibre @ n_mat
        out[m:, m:] = fibre
        return out

    def assemble_metric(self, p: TotalPoint) -> MetricAtPoint:
        self.check(p)
        e1, e2 = self.weight_factors(p)
        matrix = self._coordinate_blocks(p, e1, e2 * np.eye(self.k))
        return MetricAtPoint(matrix=matrix, split_matrix=self.split_metric(p), frame_change=self.frame_change(p))

    def metric_matrix(self, coords: Array) -> Array:
        """Coordinate metric as a plain function of (x, y); used by finite-difference oracles."""
        coords = np.asarray(coords, dtype=float)
        p = TotalPoint(coords[: self.m], coords[self.m:])
        return self.assemble_metric(p).matrix

    # -- tensors -----------------------------------------------------------

    def tensor_C(self, p: TotalPoint, X: SplitVector, Y: SplitVector) -> SplitVector:
        co = self.coefficients(p)
        fx, fy = self.xi_flat(p, X), self.xi_flat(p, Y)
        h = co.a * (fx * Y.h + fy * X.h)
        v = (
            (co.c1 * self.inner_M(p, X, Y) + co.c2 * self.inner_E(X, Y)) * p.y
            + co.b * (fx * Y.v + fy * X.v)
        )
        return SplitVector(h, v)

    def tensor_A(self, p: TotalPoint, X: SplitVector, Y: SplitVector) -> SplitVector:
        e1, e2 = self.weight_factors(p)
        re = self.bundle.curvature(p.x)
        ginv = np.linalg.inv(self.chart.metric(p.x))
        low = np.einsum("baij,i,a,b->j", re, X.h, p.y, Y.v) + np.einsum("baij,i,a,b->j", re, Y.h, p.y, X.v)
        return SplitVector(0.5 * (e2 / e1) * ginv @ low, np.zeros(self.k))

    def calR(self, p: TotalPoint, X: SplitVector, Y: SplitVector) -> SplitVector:
        re = self.bundle.curvature(p.x)
        return SplitVector(np.zeros(self.m), np.einsum("baij,a,i,j->b", re, p.y, X.h, Y.h))

    # -- fields and derivatives -------------------------------------------

    def directional(self, p: TotalPoint, X: SplitVector, jet: FieldJet) -> Array:
        """Derivative of the split components of a field along X."""
        return jet.jacobian @ self.unsplit(p, X)

    def dstarstar(self, p: TotalPoint, X: SplitVector, Y: FieldJet) -> SplitVector:
        """Pullback connection of nabla^M and D^E acting on the split components."""
        dy = self.directional(p, X, Y)
        gam_m = self.chart.christoffel(p.x)
        gam_e = self.bundle.gamma(p.x)
        h = dy[: self.m] + np.einsum("qil,i,l->q", gam_m, X.h, Y.value.h)
        v = dy[self.m:] + np.einsum("iab,i,b->a", gam_e, X.h, Y.value.v)
        return SplitVector(h, v)

    def levi_civita_tensor(self, p: TotalPoint, X: SplitVector, Y: FieldJet) -> SplitVector:
        """D**_X Y + C_X Y + A_X Y - calR(X, Y)/2."""
        y0 = Y.value
        return (
            self.dstarstar(p, X, Y)
            + self.tensor_C(p, X, y0)
            + self.tensor_A(p, X, y0)
            - 0.5 * self.calR(p, X, y0)
        )

    def levi_civita(self, p: TotalPoint, X: SplitVector, Y: FieldJet) -> SplitVector:
        """Covariant derivative from the four component equations along H_i and V_beta."""
        m, k = self.m, self.k
        co = self.coefficients(p)
        e1, e2 = self.weight_factors(p)
        y = p.y
        g = self.chart.metric(p.x)
        ginv = np.linalg.inv(g)
        gam_m = self.chart.christoffel(p.x)
        gam_e = self.bundle.gamma(p.x)
        re = self.bundle.curvature(p.x)
        n_mat = self.lift_matrix(p)
        jac = Y.jacobian
        yh, yv = Y.value.h, Y.value.v
        yb = float(y @ yv)

        # derivatives of the split components along H_i (columns) and V_beta
        d_h = jac[:, :m] - jac[:, m:] @ n_mat
        d_v = jac[:, m:]

        # (nabla_{H_i} Y)^q and (nabla_{H_i} Y)^alpha, one column per i
        hh = (
            d_h[:m]
            + np.einsum("qil,l->qi", gam_m, yh)
            + co.a * yb * np.eye(m)
            + 0.5 * (e2 / e1) * np.einsum("a,b,baij,jq->qi", y, yv, re, ginv)
        )
        hv = (
            d_h[m:]
            + np.einsum("iab,b->ai", gam_e, yv)
            + co.c1 * np.outer(y, g @ yh)
            - 0.5 * np.einsum("j,b,abij->ai", yh, y, re)
        )
        # (nabla_{V_beta} Y)^q and (nabla_{V_beta} Y)^alpha, one column per beta
        vh = (
            d_v[:m]
            + co.a * np.outer(yh, y)
            + 0.5 * (e2 / e1) * np.einsum("a,j,bajl,lq->qb", y, yh, re, ginv)
        )
        vv = (
            d_v[m:]
            + co.c2 * np.outer(y, yv)
            + co.b * np.outer(yv, y)
            + co.b * yb * np.eye(k)
        )
        return SplitVector(hh @ X.h + vh @ X.v, hv @ X.h + vv @ X.v)

    def xi_jet(self, p: TotalPoint) -> FieldJet:
        jac = np.zeros((self.n, self.n))
        jac[self.m:, self.m:] = np.eye(self.k)
        return FieldJet(self.xi(p), jac)

    def constant_jet(self, vec: SplitVector) -> FieldJet:
        """Field whose split components are constant."""
        return FieldJet(vec, np.zeros((self.n, self.n)))

    def coordinate_field_jet(self, p: TotalPoint, c: int) -> FieldJet:
        """Jet of the coordinate field d_c (x-coordinates first, then y)."""
        e = np.zeros(self.n)
        e[c] = 1.0
        jac = np.zeros((self.n, self.n))
        if c < self.m:
            # v-components of d_c are N[:, c] = Gamma_c y
            dgam = self.bundle.gamma_derivative(p.x)
            jac[self.m:, : self.m] = np.einsum("dba,a->bd", dgam[:, c], p.y)
            jac[self.m:, self.m:] = self.bundle.gamma(p.x)[c]
        return FieldJet(self.split(p, e), jac)

    def jet_from_function(
        self, fn: Callable[[TotalPoint], SplitVector], p: TotalPoint, h: float = 1e-6
    ) -> FieldJet:
        """Jet of a field given by its split components, by central differences."""
        cols = []
        for c in range(self.n):
            d = np.zeros(self.n)
            d[c] = h
            cols.append((fn(p.shifted(d)).as_array() - fn(p.shifted(-d)).as_array()) / (2.0 * h))
        return FieldJet(fn(p), np.array(cols).T)

    # -- Lie derivative of the metric -------------------------------------

    def killing_residual(self, p: TotalPoint, X: FieldJet, Y: SplitVector, Z: SplitVector) -> float:
        """(L_X g)(Y, Z) assembled from D**, the weight derivatives and calR."""
        e1, e2 = self.weight_factors(p)
        co = self.coefficients(p)
        x0 = X.value
        dy, dz = self.dstarstar(p, Y, X), self.dstarstar(p, Z, X)
        fx = self.xi_flat(p, x0)
        return (
            e1 * (self.inner_M(p, dy, Z) + self.inner_M(p, Y, dz))
            + e2 * (self.inner_E(dy, Z) + self.inner_E(Y, dz))
            + 2.0 * co.a * e1 * fx * self.inner_M(p, Y, Z)
            + 2.0 * co.b * e2 * fx * self.inner_E(Y, Z)
            + e2 * (self.inner_E(self.calR(p, x0, Z), Y) + self.inner_E(self.calR(p, x0, Y), Z))
        )

    # -- metric variants ---------------------------------------------------

    def xi_flat_covector(self, p: TotalPoint) -> Array:
        """Coordinate components of the unweighted xi-flat 1-form."""
        return np.concatenate([self.lift_matrix(p).T @ p.y, p.y])

    def musso_tricerri(self, p: TotalPoint, f3: Scalar) -> MetricAtPoint:
        base = self.assemble_metric(p)
        val = float(f3(p)) if callable(f3) else float(f3)
        _, e2 = self.weight_factors(p)
        if not e2 + val * p.r > 0.0:
            raise DomainError("Musso-Tricerri metric not positive: exp(2 phi2) + f3 r <= 0")
        c = self.xi_flat_covector(p)
        matrix = base.matrix + val * np.outer(c, c)
        split = base.split_matrix.copy()
        split[self.m:, self.m:] += val * np.outer(p.y, p.y)
        return MetricAtPoint(matrix=matrix, split_matrix=split, frame_change=base.frame_change)

    @staticmethod
    def check_radial_profile(f: Callable[[float], float]) -> None:
        """f must be odd with f(0) = 0 and f'(0) = 1 (checked numerically)."""
        h = 1e-6
        if abs(f(0.0)) > 1e-12 or abs((f(h) - f(-h)) / (2 * h) - 1.0) > 1e-6:
            raise ParameterError("radial profile needs f(0) = 0 and f'(0) = 1")
        for t in (0.1, 0.5, 1.0):
            if abs(f(t) + f(-t)) > 1e-12 * max(1.0, abs(f(t))):
                raise ParameterError("radial profile must be odd")

    def bergery_fibre_block(self, p: TotalPoint, f: Callable[[float], float]) -> Array:
        """exp(2 phi2) [(f^2/r)(I - y y^T/r) + y y^T/r] in the e_alpha frame."""
        _, e2 = self.weight_factors(p)
        r = p.r
        if r < 1e-12:
            return e2 * np.eye(self.k)
        t = math.sqrt(r)
        ft = f(t)
        if not ft > 0:
            raise ParameterError("radial profile must be positive for t > 0")
        proj = np.outer(p.y, p.y) / r
        return e2 * ((ft * ft / r) * (np.eye(self.k) - proj) + proj)

    def bergery_metric(self, p: TotalPoint, f: Callable[[float], float]) -> MetricAtPoint:
        self.check(p)
        self.check_radial_profile(f)
        e1, _ = self.weight_factors(p)
        fibre = self.bergery_fibre_block(p, f)
        split = self.split_metric(p)
        split[self.m:, self.m:] = fibre
        return MetricAtPoint(
            matrix=self._coordinate_blocks(p, e1, fibre),
            split_matrix=split,
            frame_change=self.frame_change(p),
        )

    def conformal_check(self, p: TotalPoint, f: Callable[[float], float]) -> float:
        """Max-abs gap between the Bergery metric and f^2/r times a Musso-Tricerri metric."""
        r = p.r
        if not r > 0.0:
            raise DomainError("conformal comparison needs r > 0")
        e1, e2 = self.weight_factors(p)
        t = math.sqrt(r)
        f2 = f(t) ** 2
        f3 = e2 * (1.0 / f2 - 1.0 / r)
        c = self.xi_flat_covector(p)
        inner = self._coordinate_blocks(p, (r / f2) * e1, e2 * np.eye(self.k)) + f3 * np.outer(c, c)
        rhs = (f2 / r) * inner
        return float(np.max(np.abs(self.bergery_metric(p, f).matrix - rhs)))
