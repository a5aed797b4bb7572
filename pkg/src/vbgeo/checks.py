"""Named invariant checks grouped by module, run by ``vbgeo check``.

Every case draws from its own generator seeded by (seed, case name), so the
report is identical whatever order the thread pool finishes in.
"""
from __future__ import annotations

import hashlib
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations
from typing import Callable

import numpy as np

from . import base_geometry as bg
from . import curvature as cv
from . import geodesics as gd
from . import hermitian as hm
from . import holonomy as hl
from . import weights as wt
from .scenario import preset
from .total_space import SplitVector, TotalSpace

__all__ = ["SUITES", "CheckResult", "run_suite"]


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    value: float
    threshold: float
    relation: str

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "value": self.value,
            "threshold": self.threshold,
            "relation": self.relation,
        }


# each case returns (value, threshold, relation, passed)


def _below(value: float, tol: float):
    return float(value), float(tol), "<", bool(value < tol)


def _above(value: float, tol: float):
    return float(value), float(tol), ">", bool(value > tol)


def _equal(value: float, target: float):
    return float(value), float(target), "==", bool(value == target)


def _within(value: float, lo: float, hi: float):
    return float(value), float(lo), f"in [{lo:g}, {hi:g}]", bool(lo <= value <= hi)


# ---------------------------------------------------------------------------
# weights


def _builtin_profiles():
    return [
        wt.constant(0.2, -0.1),
        wt.bryant_salamon(1.0, 1.0, 1.0),
        wt.bryant_salamon(1.0, 2.0, -1.0),
        wt.kahler_disk(1.0, 1.0),
        wt.kahler_disk(1.0, -0.5),
    ]


def _profile_interior(w: wt.WeightProfile, rng, n: int) -> np.ndarray:
    hi = 0.9 * w.r_max if math.isfinite(w.r_max) else 5.0
    return rng.uniform(max(w.r_min, 0.0) + 1e-3, hi, size=n)


def weights_derivatives(rng):
    h = 1e-5
    worst = 0.0
    for w in _builtin_profiles():
        for r in _profile_interior(w, rng, 100):
            for f, df, d2f in ((w.phi1, w.dphi1, w.d2phi1), (w.phi2, w.dphi2, w.d2phi2)):
                fd1 = (f(r + h) - f(r - h)) / (2 * h)
                fd2 = (df(r + h) - df(r - h)) / (2 * h)
                worst = max(worst, abs(fd1 - df(r)) / max(abs(df(r)), 1.0), abs(fd2 - d2f(r)) / max(abs(d2f(r)), 1.0))
    return _below(worst, 1e-6)


def weights_c1_identity(rng):
    worst = 0.0
    for w in _builtin_profiles():
        for r in _profile_interior(w, rng, 20):
            co = wt.coefficients(w, r)
            p1, p2 = w.values(r)
            worst = max(worst, abs(co.c1 * math.exp(2 * p2) + co.a * math.exp(2 * p1)))
    return _below(worst, 1e-12)


def weights_bs_a_minus_b(rng):
    c0, c1 = rng.uniform(0.5, 2.0, size=2)
    co = wt.coefficients(wt.bryant_salamon(c0, c1, 1.0), 0.0)
    return _below(abs(co.a + co.b), 1e-14)


# ---------------------------------------------------------------------------
# base geometry


def _riemann_symmetry_gap(rm: np.ndarray) -> float:
    bianchi = rm + np.einsum("jkil->ijkl", rm) + np.einsum("kijl->ijkl", rm)
    return max(
        float(np.max(np.abs(rm + np.swapaxes(rm, 0, 1)))),
        float(np.max(np.abs(rm + np.swapaxes(rm, 2, 3)))),
        float(np.max(np.abs(rm - np.transpose(rm, (2, 3, 0, 1))))),
        float(np.max(np.abs(bianchi))),
    )


def base_riemann_symmetries(rng):
    worst = 0.0
    for kind in ("sphere", "hyperbolic"):
        chart = bg.model_chart(kind, 4, 1.0)
        for x in chart.sample(rng, 10):
            worst = max(worst, _riemann_symmetry_gap(chart.riemann(x)))
    return _below(worst, 1e-8)


def base_fd_riemann(rng):
    worst = 0.0
    for kind in ("sphere", "hyperbolic"):
        chart = bg.model_chart(kind, 4, 1.0)
        fd = bg.custom_chart(chart.metric, 4, chart.lower, chart.upper)
        for x in chart.sample(rng, 10):
            exact = chart.riemann(x)
            # hyperbolic chart components reach 1e4, so compare relative to the tensor size
            worst = max(worst, float(np.max(np.abs(fd.riemann(x) - exact))) / max(float(np.max(np.abs(exact))), 1.0))
    return _below(worst, 1e-4)


def base_rho_structure(rng):
    """R^E e^i = rho^k e^j - rho^j e^k, with rho rebuilt from the curvature operator."""
    worst = 0.0
    for kind in ("sphere", "hyperbolic"):
        chart = bg.model_chart(kind, 4, 1.0)
        x = chart.sample(rng)[0]
        op = bg.curvature_operator(chart, x)
        for sign in ("plus", "minus"):
            rorth = bg.lambda2_bundle(chart, sign).orthonormal_curvature(x)
            rho = bg.rho_from_operator(op, sign)
            for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
                worst = max(
                    worst,
                    float(np.max(np.abs(rorth[j, i] - rho[k]))),
                    float(np.max(np.abs(rorth[k, i] + rho[j]))),
                    float(np.max(np.abs(rorth[i, i]))),
                )
    return _below(worst, 1e-10)


def base_einstein_s_constant(rng):
    chart = bg.model_chart("sphere", 4, 1.0)
    vals = [bg.curvature_operator(chart, x).s for x in chart.sample(rng, 10)]
    return _below(max(vals) - min(vals), 1e-8)


# ---------------------------------------------------------------------------
# total space


def _random_space(rng) -> TotalSpace:
    chart = bg.model_chart("sphere", 4, 1.0)
    c = rng.uniform(-0.3, 0.3, size=4)
    w = wt.from_expressions(f"{c[0]:.6f}*r + {c[1]:.6f}*r**2", f"{c[2]:.6f}*r + {c[3]:.6f}*r**2")
    return TotalSpace(chart, bg.lambda2_bundle(chart, "minus"), w)


def _linear_field(space: TotalSpace, rng):
    n = space.n
    c0, mat = rng.normal(size=n), rng.normal(size=(n, n))
    return lambda q: SplitVector.from_array(c0 + mat @ q.coords, space.m)


def total_metric_compatibility(rng):
    space = _random_space(rng)
    worst = 0.0
    for _ in range(50):
        p = space.random_point(rng, (0.05, 1.0))
        X = space.random_vector(rng)
        fy, fz = _linear_field(space, rng), _linear_field(space, rng)
        jy, jz = space.jet_from_function(fy, p), space.jet_from_function(fz, p)
        u = space.unsplit(p, X)
        h = 1e-6
        dg = (space.g(p.shifted(h * u), fy(p.shifted(h * u)), fz(p.shifted(h * u)))
              - space.g(p.shifted(-h * u), fy(p.shifted(-h * u)), fz(p.shifted(-h * u)))) / (2 * h)
        res = dg - space.g(p, space.levi_civita(p, X, jy), jz.value) - space.g(p, jy.value, space.levi_civita(p, X, jz))
        worst = max(worst, abs(res))
    return _below(worst, 1e-5)


def total_torsion_free(rng):
    space = _random_space(rng)
    p = space.random_point(rng, (0.1, 1.0))
    worst = 0.0
    eye = np.eye(space.n)
    for c, d in combinations(range(space.n), 2):
        t = space.levi_civita(p, space.split(p, eye[c]), space.coordinate_field_jet(p, d)) - space.levi_civita(
            p, space.split(p, eye[d]), space.coordinate_field_jet(p, c)
        )
        worst = max(worst, float(np.max(np.abs(t.as_array()))))
    return _below(worst, 1e-6)


def total_dstarstar_torsion(rng):
    """Torsion of D** on coordinate fields equals calR."""
    space = _random_space(rng)
    p = space.random_point(rng, (0.1, 1.0))
    worst = 0.0
    eye = np.eye(space.n)
    for c, d in combinations(range(space.n), 2):
        X, Y = space.split(p, eye[c]), space.split(p, eye[d])
        t = space.dstarstar(p, X, space.coordinate_field_jet(p, d)) - space.dstarstar(p, Y, space.coordinate_field_jet(p, c))
        worst = max(worst, float(np.max(np.abs((t - space.calR(p, X, Y)).as_array()))))
    return _below(worst, 1e-6)


def total_dr_identity(rng):
    space = _random_space(rng)
    worst = 0.0
    for _ in range(20):
        p = space.random_point(rng, (0.05, 1.0))
        X = space.random_vector(rng)
        u = space.unsplit(p, X)
        h = 1e-6
        dr = (p.shifted(h * u).r - p.shifted(-h * u).r) / (2 * h)
        worst = max(worst, abs(dr - 2 * space.xi_flat(p, X)))
    return _below(worst, 1e-8)


def total_A_skew(rng):
    space = _random_space(rng)
    worst = 0.0
    for _ in range(20):
        p = space.random_point(rng, (0.05, 1.0))
        X, Y, Z = (space.random_vector(rng) for _ in range(3))
        lhs = space.g(p, space.tensor_A(p, X, Y) - 0.5 * space.calR(p, X, Y), Z)
        rhs = -space.g(p, Y, space.tensor_A(p, X, Z) - 0.5 * space.calR(p, X, Z))
        worst = max(worst, abs(lhs - rhs))
    return _below(worst, 1e-10)


def total_nabla_xi(rng):
    space = _random_space(rng)
    worst = 0.0
    for _ in range(50):
        p = space.random_point(rng, (0.0, 1.0))
        X = space.random_vector(rng)
        co = space.coefficients(p)
        got = space.levi_civita(p, X, space.xi_jet(p))
        want = co.a * p.r * X.horizontal + (1 + co.b * p.r) * X.vertical
        worst = max(worst, float(np.max(np.abs((got - want).as_array()))))
    return _below(worst, 1e-10)


def total_parallel_reproduction(rng):
    chart = bg.model_chart("sphere", 3, 1.0)
    space = TotalSpace(chart, bg.trivial_bundle(chart, 2), wt.constant(0.3, -0.2))
    p = space.random_point(rng, (0.1, 1.0))
    X, Y = space.random_vector(rng), space.random_vector(rng)
    got = space.levi_civita(p, X, space.constant_jet(Y))
    want_h = np.einsum("qil,i,l->q", chart.christoffel(p.x), X.h, Y.h)
    return _below(float(np.max(np.abs(np.concatenate([got.h - want_h, got.v])))), 1e-12)


def total_structured_field(rng):
    """k = 1, phi1 constant, Y = c exp(-phi2) pi*e is parallel."""
    chart = bg.model_chart("sphere", 2, 1.0)
    space = TotalSpace(chart, bg.trivial_bundle(chart, 1), wt.from_expressions("0.3", "r/2 + r**2/3"))
    c = 1.7
    field = lambda q: SplitVector(np.zeros(2), [c * math.exp(-space.weights.phi2(q.r))])  # noqa: E731
    worst = 0.0
    for _ in range(10):
        p = space.random_point(rng, (0.05, 1.0))
        jet = space.jet_from_function(field, p)
        X = space.random_vector(rng)
        worst = max(worst, float(np.max(np.abs(space.levi_civita(p, X, jet).as_array()))))
    return _below(worst, 1e-8)


def total_conformal(rng):
    space = preset("bs_s4").space
    worst = 0.0
    for _ in range(20):
        p = space.random_point(rng, (0.1, 2.0))
        worst = max(worst, space.conformal_check(p, math.sinh))
    return _below(worst, 1e-10)


# ---------------------------------------------------------------------------
# geodesics


def _generic_state(space: TotalSpace, rng, r_range=(0.05, 0.3)) -> gd.GeodesicState:
    x = space.chart.sample(rng, margin=0.35)[0]
    y = space.random_point(rng, r_range).y
    width = space.chart.upper - space.chart.lower
    return gd.GeodesicState(x, y, 0.1 * width * rng.normal(size=space.m), 0.2 * rng.normal(size=space.k))


def geodesics_speed_conservation(rng):
    worst = 0.0
    for name in ("bs_s4", "bs_h4_plus", "flat_m2k2", "sasaki_flat", "fiber_k3"):
        space = preset(name).space
        traj = gd.integrate(space, _generic_state(space, rng), 1.0, 1e-3)
        if traj.status != "ok":
            return _below(math.inf, 1e-7)
        # drift relative to the initial speed over the whole run
        worst = max(worst, traj.speed_drift)
    return _below(worst, 1e-7)


def geodesics_fibres_totally_geodesic(rng):
    space = preset("bs_s4").space
    p = space.random_point(rng, (0.05, 0.3))
    traj = gd.integrate(space, gd.GeodesicState(p.x, p.y, np.zeros(4), rng.normal(size=3)), 0.5, 1e-3)
    return _below(float(np.max(np.abs(traj.states[:, 7:11]))), 1e-10)


def geodesics_zero_section(rng):
    space = preset("bs_s4").space
    x = space.chart.sample(rng)[0]
    traj = gd.integrate(space, gd.GeodesicState(x, np.zeros(3), 0.5 * rng.normal(size=4), np.zeros(3)), 0.5, 1e-3)
    return _equal(float(np.max(np.abs(traj.states[:, 4:7]))) + float(np.max(np.abs(traj.states[:, 11:]))), 0.0)


def geodesics_step_halving(rng):
    """Terminal error ratio for steps 0.1 and 0.05 against a 1e-3 reference."""
    space = preset("bs_s4").space
    x0 = space.chart.sample(rng, margin=0.3)[0]
    v0 = rng.normal(size=4)
    v0 /= math.sqrt(v0 @ space.chart.metric(x0) @ v0)
    init = gd.GeodesicState(x0, np.zeros(3), v0, np.zeros(3))
    ref = gd.integrate(space, init, 1.0, 1e-3).final.gamma
    e1 = np.max(np.abs(gd.integrate(space, init, 1.0, 0.1).final.gamma - ref))
    e2 = np.max(np.abs(gd.integrate(space, init, 1.0, 0.05).final.gamma - ref))
    return _within(float(e1 / e2), 12.0, 20.0)


# ---------------------------------------------------------------------------
# curvature


def curvature_zero_section_symmetries(rng):
    space = _random_space(rng)
    rm = cv.zero_section_tensor(space, space.chart.sample(rng)[0])
    return _below(_riemann_symmetry_gap(rm), 1e-12)


def curvature_ricci_trace(rng):
    space = _random_space(rng)
    x = space.chart.sample(rng)[0]
    rep = cv.ricci_scalar_zero_section(space, x)
    ric = cv.ricci_from_tensor(rep.riemann, space.split_metric(space.point(x)))
    return _below(float(np.max(np.abs(ric - rep.ricci))), 1e-12)


def curvature_flat_vs_oracle(rng):
    worst = 0.0
    for _ in range(20):
        m, k = int(rng.integers(1, 3)), int(rng.integers(1, 3))
        kind = ("flat", "sphere")[int(rng.integers(0, 2))]
        chart = bg.model_chart(kind, m, 1.0)
        c = rng.uniform(-0.4, 0.4, size=4)
        w = wt.from_expressions(f"{c[0]:.6f}*r + {c[1]:.6f}*r**2", f"{c[2]:.6f}*r + {c[3]:.6f}*r**2")
        space = TotalSpace(chart, bg.trivial_bundle(chart, k), w)
        p = space.random_point(rng, (0.05, 1.0))
        exact = cv.flat_bundle_tensor(space, p)
        gap = exact - cv.fd_riemann_oracle(space, p)
        worst = max(worst, float(np.max(np.abs(gap))) / max(float(np.max(np.abs(exact))), 1.0))
    return _below(worst, 1e-4)


def curvature_zero_section_vs_oracle(rng):
    space = _random_space(rng)
    x = space.chart.sample(rng, margin=0.2)[0]
    gap = cv.zero_section_tensor(space, x) - cv.fd_riemann_zero_section(space, x)
    return _below(float(np.max(np.abs(gap))), 1e-3)


def curvature_fiber_symmetric(rng):
    w = wt.from_expressions("0", "r/2 + r**2/5")
    worst = 0.0
    for k in (2, 3, 5):
        y = 0.5 * rng.normal(size=k)
        fc = cv.fiber_curvatures(w, k, y)
        flipped = cv.fiber_curvatures(w, k, y * np.where(rng.random(k) < 0.5, -1.0, 1.0))
        worst = max(worst, float(np.max(np.abs(fc.sectional - fc.sectional.T))), float(np.max(np.abs(fc.sectional - flipped.sectional))))
    return _below(worst, 1e-14)


# ---------------------------------------------------------------------------
# holonomy


def holonomy_generators_skew(rng):
    space = preset("bs_s4").space
    gens = hl.curvature_generators(space, space.chart.sample(rng)[0])
    return _below(max(float(np.max(np.abs(g.matrix + g.matrix.T))) for g in gens), 1e-12)


def holonomy_idempotent(rng):
    space = preset("bs_s4").space
    res = hl.lie_closure(hl.curvature_generators(space))
    again = hl.lie_closure(res.basis)
    return _equal(abs(again.dimension - res.dimension), 0.0)


def holonomy_conjugation(rng):
    space = preset("bs_s4").space
    gens = [g.matrix for g in hl.curvature_generators(space)]
    q, _ = np.linalg.qr(rng.normal(size=(7, 7)))
    a = hl.lie_closure(gens).dimension
    b = hl.lie_closure([q @ g @ q.T for g in gens]).dimension
    return _equal(abs(a - b), 0.0)


def holonomy_g2_random(rng):
    worst = 0
    for base in ("sphere4", "hyperbolic4"):
        for c0, c1 in rng.uniform(0.5, 2.0, size=(5, 2)):
            worst = max(worst, abs(hl.g2_scenario(base, c0, c1).holonomy.dimension - 14))
    return _equal(worst, 0.0)


def holonomy_rm_ek(rng):
    """Base block of the e_k-type generator equals -s exp(2 phi1) e^k on S^4."""
    space = preset("bs_s4").space
    x = space.chart.sample(rng)[0]
    s = bg.curvature_operator(space.chart, x).s
    rm = hl.unweighted_frame_tensor(space, x)
    e1 = math.exp(2 * space.weights.phi1(0.0))
    worst = 0.0
    for form in bg.lambda2_basis("minus"):
        block = 0.5 * np.einsum("ab,abcd->cd", form, rm[:4, :4, :4, :4])
        worst = max(worst, float(np.max(np.abs(block + s * e1 * form))))
    return _below(worst, 1e-8)


# ---------------------------------------------------------------------------
# hermitian


def _sasaki_space(weights) -> TotalSpace:
    chart = bg.model_chart("sphere", 2, 1.0)
    return TotalSpace(chart, bg.tangent_bundle(chart), weights)


def hermitian_J(rng):
    space = _sasaki_space(wt.from_expressions("r/3", "r**2/2"))
    worst = 0.0
    for _ in range(20):
        p = space.random_point(rng, (0.05, 1.0))
        j = hm.sasaki_J(space, p)
        g = np.diag(np.concatenate([np.full(2, space.weight_factors(p)[0]), np.full(2, space.weight_factors(p)[1])]))
        u, v = rng.normal(size=4), rng.normal(size=4)
        worst = max(worst, float(np.max(np.abs(j @ j + np.eye(4)))), abs((j @ u) @ g @ (j @ v) - u @ g @ v))
    return _below(worst, 1e-12)


def hermitian_domega_dichotomy(rng):
    flat = bg.model_chart("flat", 2)
    const = TotalSpace(flat, bg.tangent_bundle(flat), wt.constant(0.3, -0.1))
    varying = TotalSpace(flat, bg.tangent_bundle(flat), wt.from_expressions("r/2", "r/2"))
    x = flat.sample(rng, margin=0.3)[0]
    y = rng.normal(size=2)
    y /= np.linalg.norm(y)
    lo = hm.d_omega_norm(const, const.point(x, y))
    hi = hm.d_omega_norm(varying, varying.point(x, y))
    return float(lo), 1e-6, "< (with the varying case > 1e-2)", bool(lo < 1e-6 and hi > 1e-2)


def hermitian_nondegenerate(rng):
    space = _sasaki_space(wt.from_expressions("r/3", "-r/4"))
    worst = math.inf
    for _ in range(10):
        p = space.random_point(rng, (0.0, 1.0))
        worst = min(worst, abs(float(np.linalg.det(hm.omega_coordinates(space, p)))))
    return _above(worst, 1e-8)


SUITES: dict[str, dict[str, Callable]] = {
    "weights": {
        "weights.derivatives_match_fd": weights_derivatives,
        "weights.c1_identity": weights_c1_identity,
        "weights.bryant_salamon_a_eq_minus_b": weights_bs_a_minus_b,
    },
    "base_geometry": {
        "base_geometry.riemann_symmetries": base_riemann_symmetries,
        "base_geometry.analytic_vs_fd_riemann": base_fd_riemann,
        "base_geometry.lambda2_rho_structure": base_rho_structure,
        "base_geometry.einstein_s_constant": base_einstein_s_constant,
    },
    "total_space": {
        "total_space.metric_compatibility": total_metric_compatibility,
        "total_space.torsion_free": total_torsion_free,
        "total_space.dstarstar_torsion_is_calR": total_dstarstar_torsion,
        "total_space.dr_equals_2_xi_flat": total_dr_identity,
        "total_space.A_minus_half_calR_skew": total_A_skew,
        "total_space.nabla_xi": total_nabla_xi,
        "total_space.parallel_reproduction": total_parallel_reproduction,
        "total_space.structured_field_k1": total_structured_field,
        "total_space.conformal_equivalence": total_conformal,
    },
    "geodesics": {
        "geodesics.speed_conservation": geodesics_speed_conservation,
        "geodesics.fibres_totally_geodesic": geodesics_fibres_totally_geodesic,
        "geodesics.zero_section_totally_geodesic": geodesics_zero_section,
        "geodesics.step_halving_ratio": geodesics_step_halving,
    },
    "curvature": {
        "curvature.zero_section_symmetries": curvature_zero_section_symmetries,
        "curvature.ricci_is_trace": curvature_ricci_trace,
        "curvature.flat_bundle_vs_oracle": curvature_flat_vs_oracle,
        "curvature.zero_section_vs_oracle": curvature_zero_section_vs_oracle,
        "curvature.fiber_sectional_symmetric": curvature_fiber_symmetric,
    },
    "holonomy": {
        "holonomy.generators_skew": holonomy_generators_skew,
        "holonomy.closure_idempotent": holonomy_idempotent,
        "holonomy.conjugation_invariant": holonomy_conjugation,
        "holonomy.g2_random_constants": holonomy_g2_random,
        "holonomy.base_block_minus_s_ek": holonomy_rm_ek,
    },
    "hermitian": {
        "hermitian.J_square_and_compatible": hermitian_J,
        "hermitian.domega_dichotomy": hermitian_domega_dichotomy,
        "hermitian.omega_nondegenerate": hermitian_nondegenerate,
    },
}


def _case_rng(seed: int, name: str) -> np.random.Generator:
    digest = int.from_bytes(hashlib.sha256(name.encode()).digest()[:8], "little")
    return np.random.default_rng([seed, digest])


def _run_case(name: str, fn: Callable, seed: int) -> CheckResult:
    value, threshold, relation, passed = fn(_case_rng(seed, name))
    return CheckResult(name=name, passed=passed, value=value, threshold=threshold, relation=relation)


def run_suite(suite: str = "all", seed: int = 0, workers: int = 4) -> list:
    """Run one suite (or all) in a thread pool; results are sorted by case name."""
    if suite == "all":
        cases = {k: v for group in SUITES.values() for k, v in group.items()}
    elif suite in SUITES:
        cases = SUITES[suite]
    else:
        raise KeyError(suite)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = {name: pool.submit(_run_case, name, fn, seed) for name, fn in cases.items()}
        results = [futures[name].result() for name in sorted(futures)]
    return results
