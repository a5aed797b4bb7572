"""Geodesics of the weighted metric, integrated with fixed-step RK4.

The state is (gamma, y, dgamma, z) where z = dy + dgamma^i y^a Gamma^{E}_{ia}
is the vertical part of the velocity in the split frame.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import IO

import numpy as np

from .errors import ChartExitError, DomainError, ParameterError
from .total_space import TotalPoint, TotalSpace
from .weights import WeightProfile, coefficients

Array = np.ndarray

__all__ = [
    "GeodesicState",
    "Trajectory",
    "geodesic_rhs",
    "speed",
    "integrate",
    "fiber_geodesic_rhs",
    "integrate_fiber",
    "fiber_speed",
    "write_csv",
]


@dataclass(frozen=True)
class GeodesicState:
    gamma: Array
    y: Array
    dgamma: Array
    z: Array

    def __post_init__(self):
        for name in ("gamma", "y", "dgamma", "z"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float).reshape(-1))
        if self.gamma.shape != self.dgamma.shape or self.y.shape != self.z.shape:
            raise ParameterError("geodesic state blocks have inconsistent lengths")

    def as_array(self) -> Array:
        return np.concatenate([self.gamma, self.y, self.dgamma, self.z])

    @classmethod
    def from_array(cls, arr: Array, m: int, k: int) -> "GeodesicState":
        return cls(arr[:m], arr[m:m + k], arr[m + k:2 * m + k], arr[2 * m + k:])

    @property
    def point(self) -> TotalPoint:
        return TotalPoint(self.gamma, self.y)

    def ydot(self, space: TotalSpace) -> Array:
        return self.z - space.lift_matrix(self.point) @ self.dgamma


def geodesic_rhs(space: TotalSpace, state: GeodesicState) -> GeodesicState:
    """Time derivative (dgamma, dy, ddgamma, dz) of the state."""
    p = state.point
    space.check(p)
    co = coefficients(space.weights, p.r)
    p1, p2 = space.weights.values(p.r)
    x, y, v, z = state.gamma, state.y, state.dgamma, state.z
    g = space.chart.metric(x)
    gam_m = space.chart.christoffel(x)
    gam_e = space.bundle.gamma(x)
    re = space.bundle.curvature(x)
    zy = float(z @ y)

    acc = (
        -np.einsum("pij,i,j->p", gam_m, v, v)
        - 2.0 * co.a * zy * v
        - math.exp(2 * p2 - 2 * p1) * np.linalg.solve(g, np.einsum("bmiq,i,b,m->q", re, v, z, y))
    )
    dz = (
        -co.c1 * float(v @ g @ v) * y
        - np.einsum("iab,i,b->a", gam_e, v, z)
        + co.b * float(z @ z) * y
        - 2.0 * co.b * zy * z
    )
    return GeodesicState(v, state.ydot(space), acc, dz)


def speed(space: TotalSpace, state: GeodesicState) -> float:
    p1, p2 = space.weights.values(state.point.r)
    v = state.dgamma
    sq = math.exp(2 * p1) * float(v @ space.chart.metric(state.gamma) @ v) + math.exp(2 * p2) * float(state.z @ state.z)
    return math.sqrt(sq)


@dataclass(frozen=True)
class Trajectory:
    times: Array
    states: Array  # rows are GeodesicState.as_array()
    speeds: Array
    status: str  # "ok", "chart_exit", "domain_exit" or "nan"
    m: int
    k: int

    @property
    def final(self) -> GeodesicState:
        return GeodesicState.from_array(self.states[-1], self.m, self.k)

    def state(self, i: int) -> GeodesicState:
        return GeodesicState.from_array(self.states[i], self.m, self.k)

    @property
    def speed_drift(self) -> float:
        """Largest relative deviation of the speed from its initial value."""
        s0 = self.speeds[0]
        return float(np.max(np.abs(self.speeds - s0)) / s0) if s0 > 0 else float(np.max(np.abs(self.speeds)))


def _rk4(fn, s: Array, h: float) -> Array:
    k1 = fn(s)
    k2 = fn(s + 0.5 * h * k1)
    k3 = fn(s + 0.5 * h * k2)
    k4 = fn(s + h * k3)
    return s + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def _time_grid(t_end: float, step: float) -> Array:
    if not (step > 0 and math.isfinite(step)) or not (t_end >= 0 and math.isfinite(t_end)):
        raise ParameterError("integration needs step > 0 and a finite t_end >= 0")
    n = int(math.floor(t_end / step + 1e-9))
    grid = step * np.arange(n + 1)
    if t_end - grid[-1] > 1e-12 * max(1.0, t_end):
        grid = np.append(grid, t_end)
    return grid


def integrate(space: TotalSpace, initial: GeodesicState, t_end: float, step: float) -> Trajectory:
    """Classical RK4 at fixed step; stops with a status flag when the state leaves the domain."""
    m, k = space.m, space.k
    space.check(initial.point)
    grid = _time_grid(t_end, step)

    def fn(arr):
        return geodesic_rhs(space, GeodesicState.from_array(arr, m, k)).as_array()

    s = initial.as_array()
    states, speeds = [s], [speed(space, initial)]
    status = "ok"
    for t0, t1 in zip(grid[:-1], grid[1:]):
        try:
            new = _rk4(fn, s, t1 - t0)
            if not np.all(np.isfinite(new)):
                status = "nan"
                break
            st = GeodesicState.from_array(new, m, k)
            space.check(st.point)
        except ChartExitError:
            status = "chart_exit"
            break
        except DomainError:
            status = "domain_exit"
            break
        s = new
        states.append(s)
        speeds.append(speed(space, st))
    n = len(states)
    return Trajectory(times=grid[:n].copy(), states=np.array(states), speeds=np.array(speeds), status=status, m=m, k=k)


def fiber_geodesic_rhs(y, ydot, w: WeightProfile) -> Array:
    """Acceleration of a geodesic of exp(2 phi2) |dy|^2 on R^k."""
    y = np.asarray(y, dtype=float)
    ydot = np.asarray(ydot, dtype=float)
    r = float(y @ y)
    if not w.contains(r):
        raise DomainError("fibre point outside the weight domain")
    b = 2.0 * float(w.dphi2(r))
    return b * float(ydot @ ydot) * y - 2.0 * b * float(ydot @ y) * ydot


def integrate_fiber(w: WeightProfile, y0, v0, t_end: float, step: float) -> tuple[Array, Array, Array]:
    """RK4 for the fibre system; returns (times, positions, velocities)."""
    y0 = np.asarray(y0, dtype=float)
    k = len(y0)
    grid = _time_grid(t_end, step)

    def fn(arr):
        return np.concatenate([arr[k:], fiber_geodesic_rhs(arr[:k], arr[k:], w)])

    s = np.concatenate([y0, np.asarray(v0, dtype=float)])
    out = [s]
    for t0, t1 in zip(grid[:-1], grid[1:]):
        try:
            s = _rk4(fn, s, t1 - t0)
        except DomainError:
            break
        out.append(s)
    arr = np.array(out)
    return grid[: len(arr)], arr[:, :k], arr[:, k:]


def fiber_speed(w: WeightProfile, y, v) -> float:
    y = np.asarray(y, dtype=float)
    v = np.asarray(v, dtype=float)
    return math.exp(float(w.phi2(float(y @ y)))) * float(np.linalg.norm(v))


def write_csv(traj: Trajectory, fh: IO[str]) -> None:
    """Columns t, gamma_i, y_a, dgamma_i, z_a, speed with 17 significant digits."""
    m, k = traj.m, traj.k
    header = (
        ["t"]
        + [f"gamma_{i + 1}" for i in range(m)]
        + [f"y_{a + 1}" for a in range(k)]
        + [f"dgamma_{i + 1}" for i in range(m)]
        + [f"z_{a + 1}" for a in range(k)]
        + ["speed"]
    )
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(header)
    for t, row, sp in zip(traj.times, traj.states, traj.speeds):
        writer.writerow([f"{v:.17g}" for v in (t, *row, sp)])
