"""The ten acceptance criteria at their stated tolerances, one test each.

Every test records a single pass/fail line that is echoed at the end of the run.
"""
import json
import math
import time

import numpy as np
from conftest import ACCEPTANCE_LINES

from vbgeo import base_geometry as bg
from vbgeo import cli
from vbgeo import curvature as cv
from vbgeo import geodesics as gd
from vbgeo import hermitian as hm
from vbgeo import holonomy as hl
from vbgeo import weights as wt
from vbgeo.scenario import preset, preset_names
from vbgeo.total_space import TotalSpace


def record(number, ok, detail):
    line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def embed(x):
    n2 = float(x @ x)
    return np.concatenate([2 * x, [1 - n2]]) / (1 + n2)


def great_circle(x0, v0, t):
    h = 1e-6
    jac = np.array([(embed(x0 + h * e) - embed(x0 - h * e)) / (2 * h) for e in np.eye(4)]).T
    P = math.cos(t) * embed(x0) + math.sin(t) * (jac @ v0)
    return P[:4] / (1 + P[4])


def test_criterion_01_g2_dimension(capsys):
    parts, ok = [], True
    for name in ("bs_s4", "bs_h4_plus"):
        t0 = time.perf_counter()
        code = cli.main(["holonomy", "--scenario", name])
        elapsed = time.perf_counter() - t0
        data = json.loads(capsys.readouterr().out)
        ratio = data["singular_value_margins"]["ratio"]
        ratio = math.inf if ratio == "inf" else ratio
        ok &= code == 0 and data["dimension"] == 14 and ratio >= 1e4 and elapsed < 5.0
        parts.append(f"{name} dim={data['dimension']} margin={ratio:.2e} {elapsed:.2f}s")
    record(1, ok, "; ".join(parts))


def test_criterion_02_decomposition():
    parts, ok = [], True
    for base, c0, c1 in (("sphere4", 1.0, 1.0), ("hyperbolic4", 1.0, 2.0)):
        res = hl.g2_scenario(base, c0, c1)
        ok &= res.subspace_dims == (3, 3, 8) and res.family_ranks == (2, 2, 2, 2)
        parts.append(f"{base} subspaces={res.subspace_dims} family ranks={res.family_ranks}")
    record(2, ok, "; ".join(parts))


def test_criterion_03_ricci_flat():
    parts, ok = [], True
    for name in ("bs_s4", "bs_h4_plus"):
        space = preset(name).space
        x = np.array([0.1, -0.05, 0.08, 0.02])
        exact = float(np.max(np.abs(cv.ricci_scalar_zero_section(space, x).ricci)))
        fd_rm = cv.fd_riemann_zero_section(space, x)
        fd = float(np.max(np.abs(cv.ricci_from_tensor(fd_rm, space.split_metric(space.point(x))))))
        ok &= exact < 1e-10 and fd < 1e-3
        parts.append(f"{name} analytic={exact:.1e} oracle={fd:.1e}")
    record(3, ok, "; ".join(parts))


def test_criterion_04_flat_holonomy():
    case_i = hl.flat_holonomy_scenario(2, 2, wt.from_expressions("r", "0")).holonomy.dimension
    const = hl.flat_holonomy_scenario(2, 2, wt.constant(0.2, -0.3)).holonomy.dimension
    record(4, case_i == 6 and const == 0, f"phi1'(0)!=0 dim={case_i}; constant dim={const}")


def test_criterion_05_closed_form_vs_oracle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(505)
    worst_flat = 0.0
    for _ in range(20):
        m, k = int(rng.integers(1, 3)), int(rng.integers(1, 3))
        chart = bg.model_chart(("flat", "sphere")[int(rng.integers(0, 2))], m, 1.0)
        c = rng.uniform(-0.4, 0.4, size=4)
        w = wt.from_expressions(f"{c[0]:.6f}*r + {c[1]:.6f}*r**2", f"{c[2]:.6f}*r + {c[3]:.6f}*r**2")
        space = TotalSpace(chart, bg.trivial_bundle(chart, k), w)
        p = space.random_point(rng, (0.05, 1.0))
        worst_flat = max(worst_flat, float(np.max(np.abs(cv.flat_bundle_tensor(space, p) - cv.fd_riemann_oracle(space, p)))))
    chart = bg.model_chart("sphere", 4, 1.0)
    generic = TotalSpace(chart, bg.lambda2_bundle(chart, "minus"), wt.from_expressions("0.2*r - 0.1*r**2", "-0.15*r + 0.05*r**2"))
    worst_zero = 0.0
    for space in (generic, preset("bs_s4").space):
        x = space.chart.sample(rng, margin=0.2)[0]
        worst_zero = max(worst_zero, float(np.max(np.abs(cv.zero_section_tensor(space, x) - cv.fd_riemann_zero_section(space, x)))))
    elapsed = time.perf_counter() - t0
    ok = worst_flat < 1e-4 and worst_zero < 1e-3 and elapsed < 30.0
    record(5, ok, f"flat max gap={worst_flat:.1e} zero-section max gap={worst_zero:.1e} {elapsed:.1f}s")


def test_criterion_06_fiber_curvature():
    rng = np.random.default_rng(606)
    worst = 0.0
    for phi2 in ("r", "r**2/4"):
        w = wt.from_expressions("0", phi2)
        for k in (2, 3, 5):
            # pure fibre: trivial bundle over a line with phi1 = 0 is a Riemannian product
            chart = bg.model_chart("flat", 1)
            space = TotalSpace(chart, bg.trivial_bundle(chart, k), w)
            y = rng.normal(size=k)
            y *= 0.7 / np.linalg.norm(y)
            p = space.point([0.0], y)
            rm = cv.fd_riemann_oracle(space, p)
            gs = space.split_metric(p)
            scal = float(np.trace(np.linalg.inv(gs) @ cv.ricci_from_tensor(rm, gs)))
            worst = max(worst, abs(scal - cv.fiber_curvatures(w, k, y).scalar))
    flat_worst = 0.0
    for c in (1.0, -0.5, 0.75):
        w = wt.from_expressions("0", f"{c}*log(r)", r_min=1e-9)
        for _ in range(10):
            y = rng.uniform(0.2, 1.0, size=2) * rng.choice([-1, 1], size=2)
            flat_worst = max(flat_worst, float(np.max(np.abs(cv.fiber_curvatures(w, 2, y).sectional))))
    record(6, worst < 1e-3 and flat_worst < 1e-8, f"scalar max gap={worst:.1e}; k=2 flat family max sectional={flat_worst:.1e}")


def test_criterion_07_geodesics():
    bs = preset("bs_s4").space
    x0 = np.array([0.2, -0.1, 0.15, 0.05])
    v = np.array([0.3, 0.5, -0.2, 0.4])
    v0 = v / math.sqrt(v @ bs.chart.metric(x0) @ v)
    traj = gd.integrate(bs, gd.GeodesicState(x0, np.zeros(3), v0, np.zeros(3)), 1.0, 1e-3)
    circle = float(np.max(np.abs(traj.final.gamma - great_circle(x0, v0, 1.0))))

    drift = 0.0
    rng = np.random.default_rng(707)
    for name in preset_names():
        space = preset(name).space
        width = space.chart.upper - space.chart.lower
        x = space.chart.sample(rng, margin=0.35)[0]
        y = space.random_point(rng, (0.05, 0.3)).y
        init = gd.GeodesicState(x, y, 0.1 * width * rng.normal(size=space.m), 0.2 * rng.normal(size=space.k))
        run = gd.integrate(space, init, 1.0, 1e-3)
        assert run.status == "ok"
        drift = max(drift, run.speed_drift)

    x1 = np.array([0.1, 0.2, -0.1, 0.0])
    v = np.array([1.0, -0.5, 0.3, 0.2])
    v1 = v / math.sqrt(v @ bs.chart.metric(x1) @ v)
    init = gd.GeodesicState(x1, np.zeros(3), v1, np.zeros(3))
    exact = great_circle(x1, v1, 1.0)
    e1 = np.max(np.abs(gd.integrate(bs, init, 1.0, 0.1).final.gamma - exact))
    e2 = np.max(np.abs(gd.integrate(bs, init, 1.0, 0.05).final.gamma - exact))
    ratio = float(e1 / e2)
    ok = circle < 1e-6 and drift < 1e-7 and 12.0 <= ratio <= 20.0
    record(7, ok, f"great circle gap={circle:.1e}; preset speed drift={drift:.1e}; halving ratio={ratio:.2f}")


def test_criterion_08_conformal():
    rng = np.random.default_rng(808)
    worst = 0.0
    for name in ("bs_s4", "flat_m2k2"):
        space = preset(name).space
        for _ in range(20):
            p = space.random_point(rng, (0.1, 2.0))
            worst = max(worst, space.conformal_check(p, math.sinh))
    record(8, worst < 1e-10, f"max gap={worst:.1e} over 40 points")


def test_criterion_09_symplectic():
    sc = preset("sasaki_flat").space
    const = TotalSpace(sc.chart, sc.bundle, wt.constant(0.3, -0.1))
    varying = TotalSpace(sc.chart, sc.bundle, wt.from_expressions("r/2", "r/2"))
    x, y = np.array([0.1, -0.2]), np.array([0.6, 0.8])
    lo = max(hm.d_omega_norm(space, space.point(x, y)) for space in (sc, const))
    hi = hm.d_omega_norm(varying, varying.point(x, y))
    record(9, lo < 1e-6 and hi > 1e-2, f"constant psibar |d omega|={lo:.1e}; psibar=r |d omega|={hi:.2e}")


def test_criterion_10_nabla_xi():
    rng = np.random.default_rng(1010)
    chart = bg.model_chart("sphere", 4, 1.0)
    generic = TotalSpace(chart, bg.lambda2_bundle(chart, "minus"), wt.from_expressions("0.2*r - 0.1*r**2", "-0.15*r + 0.05*r**2"))
    worst = 0.0
    for space in (generic, preset("bs_h4_plus").space):
        for _ in range(50):
            p = space.random_point(rng, (0.0, 1.0))
            X = space.random_vector(rng)
            co = space.coefficients(p)
            got = space.levi_civita(p, X, space.xi_jet(p))
            want = co.a * p.r * X.horizontal + (1 + co.b * p.r) * X.vertical
            worst = max(worst, float(np.max(np.abs((got - want).as_array()))))
    record(10, worst < 1e-10, f"max deviation={worst:.1e} over 100 draws")
