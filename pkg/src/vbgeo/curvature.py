"""Closed-form curvature of the weighted metric and a finite-difference oracle.

Four-slot tensors follow R(X, Y, Z, W) = g(R(X, Y) Z, W) with
R(X, Y) = [nabla_X, nabla_Y] - nabla_[X,Y], so a round sphere has
R(X, Y, Y, X) > 0. Split-frame arrays are indexed over (H_1..H_m, V_1..V_k).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .base_geometry import christoffel_from_metric_derivative, riemann_from_christoffel
from .errors import DomainError, ParameterError
from .total_space import SplitVector, TotalPoint, TotalSpace
from .weights import WeightProfile, coefficients

Array = np.ndarray

__all__ = [
    "CurvatureReport",
    "EinsteinCheck",
    "FiberCurvatures",
    "zero_section_tensor",
    "zero_section_curvature",
    "flat_bundle_curvature",
    "flat_bundle_tensor",
    "fiber_curvatures",
    "ricci_scalar_zero_section",
    "ricci_from_tensor",
    "einstein_check",
    "fd_riemann_coordinates",
    "fd_riemann_oracle",
    "fd_riemann_zero_section",
]


@dataclass(frozen=True)
class CurvatureReport:
    riemann: Array  # split frame, R(X, Y, Z, W)
    ricci: Array  # split frame
    scalar: float
    einstein_lambda: Optional[float] = None

    def component(self, a: int, b: int, c: int, d: int) -> float:
        return float(self.riemann[a, b, c, d])


@dataclass(frozen=True)
class EinsteinCheck:
    lambda_M: float
    lambda_E: Optional[float]
    residuals: tuple[float, float]


@dataclass(frozen=True)
class FiberCurvatures:
    sectional: Array  # [alpha, beta] for the plane (d_alpha, d_beta); diagonal unused (0)
    ricci: Array  # ric(d_beta, d_beta) in coordinates
    scalar: float


# ---------------------------------------------------------------------------
# zero section


def zero_section_tensor(space: TotalSpace, x) -> Array:
    """Full split-frame curvature tensor at the zero-section point over x."""
    x = space.chart.check_point(x)
    m, k = space.m, space.k
    co = coefficients(space.weights, 0.0)
    p1, p2 = space.weights.values(0.0)
    e1, e2 = math.exp(2 * p1), math.exp(2 * p2)
    g = space.chart.metric(x)
    rm = space.chart.riemann(x)  # [i, j, w, l] = g(R(d_i, d_j) d_l, d_w)
    re = space.bundle.curvature(x)  # [b, a, i, j] = <R^E(d_i, d_j) e_a, e_b>
    eye = np.eye(k)
    h, v = slice(0, m), slice(m, m + k)

    hvhv = co.a * e1 * np.einsum("ij,ab->iajb", g, eye) + 0.5 * e2 * np.einsum("baij->iajb", re)
    out = np.zeros((m + k,) * 4)
    out[h, h, h, h] = e1 * np.einsum("ijwl->ijlw", rm)
    out[h, h, v, v] = e2 * np.einsum("baij->ijab", re)
    out[v, v, h, h] = e2 * np.einsum("baij->abij", re)
    out[h, v, h, v] = hvhv
    out[h, v, v, h] = -np.einsum("iajb->iabj", hvhv)
    out[v, h, h, v] = -np.einsum("iajb->aijb", hvhv)
    out[v, h, v, h] = np.einsum("iajb->aibj", hvhv)
    out[v, v, v, v] = -2.0 * co.b * e2 * (
        np.einsum("ad,bc->abcd", eye, eye) - np.einsum("ac,bd->abcd", eye, eye)
    )
    return out


def zero_section_curvature(space: TotalSpace, x, X: SplitVector, Y: SplitVector, Z: SplitVector, W: SplitVector) -> float:
    """R(X, Y, Z, W) at the zero-section point over x; mixed inputs are split by linearity."""
    rm = zero_section_tensor(space, x)
    return float(np.einsum("abcd,a,b,c,d->", rm, X.as_array(), Y.as_array(), Z.as_array(), W.as_array()))


def ricci_from_tensor(rm: Array, split_metric: Array) -> Array:
    """ric(Y, Z) = tr(X -> R(X, Y) Z)."""
    return np.einsum("ad,abcd->bc", np.linalg.inv(split_metric), rm)


def ricci_scalar_zero_section(space: TotalSpace, x) -> CurvatureReport:
    """Ricci and scalar curvature on the zero section from their closed forms.

    The horizontal block carries the factor k from tracing over the k
    vertical directions: ric^h = ric^M - k a exp(2 phi1 - 2 phi2) g_M.
    """
    x = space.chart.check_point(x)
    m, k = space.m, space.k
    co = coefficients(space.weights, 0.0)
    p1, p2 = space.weights.values(0.0)
    g = space.chart.metric(x)
    ric = np.zeros((m + k, m + k))
    ric[:m, :m] = space.chart.ricci(x) - k * co.a * math.exp(2 * (p1 - p2)) * g
    ric[m:, m:] = (2 * co.b * (1 - k) - co.a * m) * np.eye(k)
    scal = (
        space.chart.scalar(x) * math.exp(-2 * p1)
        - 2 * co.a * k * m * math.exp(-2 * p2)
        + 2 * co.b * k * (1 - k) * math.exp(-2 * p2)
    )
    gs = space.split_metric(TotalPoint(x, np.zeros(k)))
    lam = None
    n = m + k
    candidate = scal / n
    if np.max(np.abs(ric - candidate * gs)) <= 1e-8 * max(1.0, float(np.max(np.abs(ric)))):
        lam = float(candidate)
    return CurvatureReport(riemann=zero_section_tensor(space, x), ricci=ric, scalar=float(scal), einstein_lambda=lam)


def einstein_check(space: TotalSpace, x, tol: float = 1e-8) -> EinsteinCheck:
    """Test the two Einstein identities for the zero section over an Einstein base."""
    x = space.chart.check_point(x)
    m, k = space.m, space.k
    g = space.chart.metric(x)
    ric_m = space.chart.ricci(x)
    lam_m = space.chart.scalar(x) / m
    if np.max(np.abs(ric_m - lam_m * g)) > tol * max(1.0, float(np.max(np.abs(ric_m)))):
        raise ParameterError("base metric is not Einstein at the given point")
    co = coefficients(space.weights, 0.0)
    p1, p2 = space.weights.values(0.0)
    res1 = lam_m * math.exp(2 * p2 - 2 * p1) + co.a * (m - k) + 2 * co.b * (k - 1)
    lam_e = (2 * co.b * (1 - k) - co.a * m) * math.exp(-2 * p2)
    res2 = lam_e - (lam_m * math.exp(-2 * p1) - co.a * k * math.exp(-2 * p2))
    ok = abs(res1) < tol and abs(res2) < tol
    return EinsteinCheck(lambda_M=float(lam_m), lambda_E=float(lam_e) if ok else None, residuals=(float(res1), float(res2)))


# ---------------------------------------------------------------------------
# flat bundles


def _wedge(u: Array, v: Array, z: Array, metric: Array) -> Array:
    """(u ^ v) z = <u, z> v - <v, z> u."""
    return (u @ metric @ z) * v - (v @ metric @ z) * u


def flat_bundle_curvature(space: TotalSpace, p: TotalPoint, X: SplitVector, Y: SplitVector, Z: SplitVector) -> SplitVector:
    """R(X, Y) Z anywhere on E for a flat bundle."""
    if not space.bundle.is_flat:
        raise ParameterError("flat-bundle curvature formulas need a flat bundle")
    space.check(p)
    w = space.weights
    d = w.derivatives(p.r)
    p1, p2 = d[0]
    d1, d2 = d[1]
    dd1, dd2 = d[2]
    r = p.r
    y = p.y
    k = space.k
    g = space.chart.metric(p.x)
    ek = np.eye(k)
    ratio = math.exp(2 * p1 - 2 * p2)
    rm_up = space.chart.riemann_up(p.x)

    def hhh(xh, yh, zh):
        return np.einsum("plij,i,j,l->p", rm_up, xh, yh, zh) + 4 * r * d1 * d1 * ratio * _wedge(xh, yh, zh, g)

    def hvh(xh, yv, zh):
        coeff = 4 * (dd1 + d1 * d1 - 2 * d1 * d2) * (y @ yv)
        return ratio * (xh @ g @ zh) * (coeff * y + 2 * (2 * r * d1 * d2 + d1) * yv)

    def hvv(xh, yv, zv):
        return (
            4 * (2 * d1 * d2 - d1 * d1 - dd1) * (y @ yv) * (y @ zv)
            - 2 * (2 * r * d1 * d2 + d1) * (yv @ zv)
        ) * xh

    def vvv(xv, yv, zv):
        wedge_xy_xi = _wedge(xv, yv, y, ek)
        pair = (xv @ y) * (yv @ zv) - (xv @ zv) * (yv @ y)
        return 4 * (dd2 - d2 * d2) * ((y @ zv) * wedge_xy_xi - pair * y) + 4 * (d2 + r * d2 * d2) * _wedge(xv, yv, zv, ek)

    # R(X^v, Y^h) = -R(Y^h, X^v); the hhv and vvh patterns vanish
    h_out = hhh(X.h, Y.h, Z.h) + hvv(X.h, Y.v, Z.v) - hvv(Y.h, X.v, Z.v)
    v_out = hvh(X.h, Y.v, Z.h) - hvh(Y.h, X.v, Z.h) + vvv(X.v, Y.v, Z.v)
    return SplitVector(h_out, v_out)


def flat_bundle_tensor(space: TotalSpace, p: TotalPoint) -> Array:
    """Split-frame R(e_a, e_b, e_c, e_d) from the flat-bundle formulas."""
    n, m = space.n, space.m
    basis = [SplitVector.from_array(e, m) for e in np.eye(n)]
    gs = space.split_metric(p)
    out = np.empty((n, n, n, n))
    for a in range(n):
        for b in range(n):
            for c in range(n):
                out[a, b, c] = gs @ flat_bundle_curvature(space, p, basis[a], basis[b], basis[c]).as_array()
    return out


# ---------------------------------------------------------------------------
# fibre R^k with exp(2 phi2) |dy|^2


def fiber_curvatures(w: WeightProfile, k: int, y) -> FiberCurvatures:
    y = np.asarray(y, dtype=float)
    if y.shape != (k,):
        raise ParameterError("fibre point must have length k")
    if k < 2:
        raise ParameterError("sectional curvature needs k >= 2")
    r = float(y @ y)
    d = w.derivatives(r)
    p2, d2, dd2 = d[0, 1], d[1, 1], d[2, 1]
    sq = y * y
    sec = 4 * math.exp(-2 * p2) * ((d2 * d2 - dd2) * (sq[:, None] + sq[None, :]) - d2 - r * d2 * d2)
    np.fill_diagonal(sec, 0.0)
    ric = 4 * (d2 * d2 - dd2) * (r + (k - 2) * sq) - 4 * (k - 1) * (d2 * d2 * r + d2)
    scal = -4 * math.exp(-2 * p2) * (k - 1) * (r * d2 * d2 * (k - 2) + d2 * k + 2 * r * dd2)
    return FiberCurvatures(sectional=sec, ricci=ric, scalar=float(scal))


# ---------------------------------------------------------------------------
# finite-difference oracle


def fd_riemann_coordinates(metric_fn, coords, h1: float = 1e-4, h2: float = 1e-3) -> Array:
    """Coordinate R(d_a, d_b, d_c, d_d) of an arbitrary metric function by nested central differences."""
    coords = np.asarray(coords, dtype=float)
    n = len(coords)
    eye = np.eye(n)

    def christoffel(c):
        dg = np.array([(metric_fn(c + h1 * e) - metric_fn(c - h1 * e)) / (2 * h1) for e in eye])
        return christoffel_from_metric_derivative(metric_fn(c), dg)

    dgam = np.array([(christoffel(coords + h2 * e) - christoffel(coords - h2 * e)) / (2 * h2) for e in eye])
    r_up = riemann_from_christoffel(christoffel(coords), dgam)  # [p, c, a, b]
    return np.einsum("dp,pcab->abcd", metric_fn(coords), r_up)


def _oracle_margin(space: TotalSpace, p: TotalPoint, reach: float) -> None:
    chart = space.chart
    if np.any(p.x - reach <= chart.lower) or np.any(p.x + reach >= chart.upper):
        raise DomainError("oracle point too close to the chart boundary")
    rn = math.sqrt(p.r)
    outer = (rn + reach * math.sqrt(space.k)) ** 2
    inner = max(rn - reach * math.sqrt(space.k), 0.0) ** 2
    if outer >= space.weights.r_max or (space.weights.r_min > 0 and inner <= space.weights.r_min):
        raise DomainError("oracle point too close to the weight domain boundary")


def fd_riemann_oracle(space: TotalSpace, p: TotalPoint, split: bool = True, h1: float = 1e-4, h2: float = 1e-3) -> Array:
    """Curvature of the assembled coordinate metric by finite differences.

    Returns the split-frame tensor when ``split`` is set, else coordinate components.
    """
    space.check(p)
    _oracle_margin(space, p, 2 * (h1 + h2))
    rm = fd_riemann_coordinates(space.metric_matrix, p.coords, h1, h2)
    if not split:
        return rm
    q = np.linalg.inv(space.frame_change(p))
    return np.einsum("abcd,ai,bj,ck,dl->ijkl", rm, q, q, q, q)


def fd_riemann_zero_section(space: TotalSpace, x, deltas=(1e-2, 5e-3), direction=None) -> Array:
    """Oracle at the zero section extrapolated from off-section points.

    Values at +-delta u are averaged, which removes the terms odd in y, and the
    averages at the two radii are extrapolated linearly in delta^2 to 0.
    """
    u = np.ones(space.k) if direction is None else np.asarray(direction, dtype=float)
    u = u / np.linalg.norm(u)
    d1, d2 = deltas

    def sym(d):
        return 0.5 * (fd_riemann_oracle(space, space.point(x, d * u)) + fd_riemann_oracle(space, space.point(x, -d * u)))

    r1, r2 = sym(d1), sym(d2)
    return (d1 * d1 * r2 - d2 * d2 * r1) / (d1 * d1 - d2 * d2)
