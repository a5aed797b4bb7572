import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vbgeo import base_geometry as bg
from vbgeo import curvature as cv
from vbgeo import weights as wt
from vbgeo.errors import DomainError, ParameterError
from vbgeo.total_space import SplitVector, TotalPoint, TotalSpace


def flat_space(m, k, weights):
    chart = bg.model_chart("flat", m)
    return TotalSpace(chart, bg.trivial_bundle(chart, k), weights)


def symmetry_gap(rm):
    return max(
        np.max(np.abs(rm + rm.transpose(1, 0, 2, 3))),
        np.max(np.abs(rm + rm.transpose(0, 1, 3, 2))),
        np.max(np.abs(rm - rm.transpose(2, 3, 0, 1))),
    )


def fiber_metric(w):
    """Coordinate metric exp(2 phi2(|y|^2)) delta on R^k, built without the package."""

    def metric(y):
        return math.exp(2 * w.phi2(float(y @ y))) * np.eye(len(y))

    return metric


def scalar_from_coordinate_tensor(rm, g):
    gi = np.linalg.inv(g)
    return float(np.einsum("ad,bc,abcd->", gi, gi, rm))


# ---------------------------------------------------------------------------
# zero section


def test_flat_constant_zero_section_vanishes():
    # [TRIVIAL]
    space = flat_space(3, 2, wt.constant(0.2, -0.4))
    assert np.all(cv.zero_section_tensor(space, np.zeros(3)) == 0.0)


def test_bryant_salamon_mixed_component(bs_s4):
    # [PAPER] a e^{2 phi1} <X, Z> <Y, W> with a = 1, e^{2 phi1(0)} = 1; the bundle term vanishes by skewness
    X = SplitVector([0.5, 0, 0, 0], [0, 0, 0])  # unit in the conformal metric 4 delta at the origin
    Y = SplitVector([0, 0, 0, 0], [1.0, 0, 0])
    assert cv.zero_section_curvature(bs_s4, np.zeros(4), X, Y, X, Y) == pytest.approx(1.0, abs=1e-12)


def test_zero_section_vertical_block(generic_space):
    # [PAPER] -2 b e^{2 phi2} (<X, W><Y, Z> - <X, Z><Y, W>) on vertical inputs
    co = wt.coefficients(generic_space.weights, 0.0)
    e2 = math.exp(2 * generic_space.weights.phi2(0.0))
    V = [SplitVector(np.zeros(4), e) for e in np.eye(3)]
    val = cv.zero_section_curvature(generic_space, np.zeros(4), V[0], V[1], V[1], V[0])
    assert val == pytest.approx(-2 * co.b * e2, rel=1e-13)


def test_zero_section_symmetries(generic_space, bs_h4, rng):
    # algebraic identities of the implemented cases hold exactly
    for space in (generic_space, bs_h4):
        rm = cv.zero_section_tensor(space, space.chart.sample(rng)[0])
        assert symmetry_gap(rm) < 1e-12


def test_zero_section_against_oracle(generic_space, rng):
    # [DERIVED] 30 random index tuples against the delta-extrapolated oracle
    x = generic_space.chart.sample(rng, margin=0.2)[0]
    exact = cv.zero_section_tensor(generic_space, x)
    oracle = cv.fd_riemann_zero_section(generic_space, x)
    idx = rng.integers(0, 7, size=(30, 4))
    gaps = [abs(exact[tuple(i)] - oracle[tuple(i)]) for i in idx]
    assert max(gaps) < 1e-3
    assert np.max(np.abs(exact - oracle)) < 1e-3


def test_mixed_inputs_split_by_linearity(generic_space, rng):
    x = generic_space.chart.sample(rng)[0]
    rm = cv.zero_section_tensor(generic_space, x)
    vecs = [SplitVector(rng.normal(size=4), rng.normal(size=3)) for _ in range(4)]
    direct = cv.zero_section_curvature(generic_space, x, *vecs)
    total = 0.0
    for parts in np.ndindex(2, 2, 2, 2):
        pieces = [SplitVector(v.h, np.zeros(3)) if p == 0 else SplitVector(np.zeros(4), v.v) for v, p in zip(vecs, parts)]
        total += cv.zero_section_curvature(generic_space, x, *pieces)
    assert direct == pytest.approx(total, rel=1e-12, abs=1e-12)
    assert rm.shape == (7, 7, 7, 7)


# ---------------------------------------------------------------------------
# Ricci and scalar


def test_ricci_is_trace(generic_space, rng):
    x = generic_space.chart.sample(rng)[0]
    rep = cv.ricci_scalar_zero_section(generic_space, x)
    gs = generic_space.split_metric(generic_space.point(x))
    assert np.max(np.abs(cv.ricci_from_tensor(rep.riemann, gs) - rep.ricci)) < 1e-12
    assert rep.scalar == pytest.approx(float(np.trace(np.linalg.inv(gs) @ rep.ricci)), rel=1e-12)
    assert np.allclose(rep.ricci, rep.ricci.T, atol=0)


@pytest.mark.parametrize("fixture", ["bs_s4", "bs_h4"])
def test_bryant_salamon_ricci_flat(fixture, request, rng):
    # [PAPER] 2b(1 - k) - am = -4(b + a) = 0 and the horizontal block cancels
    space = request.getfixturevalue(fixture)
    x = space.chart.sample(rng, margin=0.2)[0]
    rep = cv.ricci_scalar_zero_section(space, x)
    assert np.max(np.abs(rep.ricci)) < 1e-10
    assert rep.einstein_lambda == pytest.approx(0.0, abs=1e-10)
    co = wt.coefficients(space.weights, 0.0)
    assert 2 * co.b * (1 - 3) - co.a * 4 == pytest.approx(0.0, abs=1e-14)
    # [DERIVED] the same Ricci tensor from the finite-difference oracle
    fd = cv.ricci_from_tensor(cv.fd_riemann_zero_section(space, x), space.split_metric(space.point(x)))
    assert np.max(np.abs(fd)) < 1e-3


def test_constant_weights_ricci():
    # [TRIVIAL] a = b = 0
    chart = bg.model_chart("sphere", 3, 1.0)
    space = TotalSpace(chart, bg.trivial_bundle(chart, 2), wt.constant(0.3, -0.2))
    x = np.array([0.1, -0.2, 0.05])
    rep = cv.ricci_scalar_zero_section(space, x)
    assert np.allclose(rep.ricci[:3, :3], chart.ricci(x), atol=1e-14)
    assert np.all(rep.ricci[3:, 3:] == 0.0)
    assert np.all(rep.ricci[:3, 3:] == 0.0)
    assert rep.scalar == pytest.approx(chart.scalar(x) * math.exp(-0.6), rel=1e-14)
    assert rep.einstein_lambda is None


def test_einstein_check_bryant_salamon(bs_s4):
    # [PAPER]
    ec = cv.einstein_check(bs_s4, np.zeros(4))
    assert ec.lambda_E == pytest.approx(0.0, abs=1e-12)
    assert max(abs(r) for r in ec.residuals) < 1e-12


def test_einstein_check_constant_weights():
    # [TRIVIAL] first residual is lambda^M e^{2 phi2 - 2 phi1}
    chart = bg.model_chart("sphere", 4, 1.0)
    space = TotalSpace(chart, bg.trivial_bundle(chart, 2), wt.constant(0.1, 0.4))
    ec = cv.einstein_check(space, np.zeros(4))
    lam_m = chart.scalar(np.zeros(4)) / 4
    assert ec.residuals[0] == pytest.approx(lam_m * math.exp(0.8 - 0.2), rel=1e-13)
    assert ec.lambda_E is None
    flat = flat_space(2, 2, wt.constant())
    assert cv.einstein_check(flat, np.zeros(2)).lambda_E == 0.0


def test_einstein_check_rejects_non_einstein_base():
    # S^2 x R^2 has ric0 != 0
    expr = "4/(1 + x1**2 + x2**2)**2"
    chart = bg.expression_chart(
        [[expr, "0", "0", "0"], ["0", expr, "0", "0"], ["0", "0", "1", "0"], ["0", "0", "0", "1"]],
        [-1] * 4,
        [1] * 4,
    )
    space = TotalSpace(chart, bg.trivial_bundle(chart, 1), wt.constant())
    with pytest.raises(ParameterError):
        cv.einstein_check(space, [0.3, 0.2, 0.1, 0.0])


# ---------------------------------------------------------------------------
# flat bundles


def test_flat_bundle_constant_weights_vanish(rng):
    # [TRIVIAL]
    space = flat_space(2, 3, wt.constant(0.5, 0.1))
    p = space.random_point(rng, (0.1, 1.0))
    assert np.all(cv.flat_bundle_tensor(space, p) == 0.0)


def test_flat_bundle_zero_patterns(generic_space, rng):
    # [PAPER] R(X^h, Y^h) Z^v = 0 and R(X^v, Y^v) Z^h = 0
    chart = bg.model_chart("sphere", 3, 1.0)
    space = TotalSpace(chart, bg.trivial_bundle(chart, 2), wt.from_expressions("0.3*r", "-0.2*r + 0.1*r**2"))
    p = space.random_point(rng, (0.1, 1.0))
    for _ in range(5):
        h1, h2 = (SplitVector(rng.normal(size=3), np.zeros(2)) for _ in range(2))
        v1, v2 = (SplitVector(np.zeros(3), rng.normal(size=2)) for _ in range(2))
        assert np.all(cv.flat_bundle_curvature(space, p, h1, h2, v1).as_array() == 0.0)
        assert np.all(cv.flat_bundle_curvature(space, p, v1, v2, h1).as_array() == 0.0)


def test_flat_bundle_against_oracle():
    # [DERIVED] phi1 = phi2 = r/2 on flat R^2 x R^2 at y = (0.3, 0.4)
    space = flat_space(2, 2, wt.from_expressions("r/2", "r/2"))
    p = TotalPoint(np.array([0.1, -0.2]), np.array([0.3, 0.4]))
    exact = cv.flat_bundle_tensor(space, p)
    assert np.max(np.abs(exact - cv.fd_riemann_oracle(space, p))) < 1e-4
    assert symmetry_gap(exact) < 1e-12


def test_flat_bundle_matches_zero_section(rng):
    # both closed forms apply at y = 0 over a flat bundle
    chart = bg.model_chart("hyperbolic", 2, 1.0)
    space = TotalSpace(chart, bg.trivial_bundle(chart, 2), wt.from_expressions("0.4*r - 0.1*r**2", "0.3*r"))
    x = chart.sample(rng)[0]
    a = cv.flat_bundle_tensor(space, space.point(x))
    b = cv.zero_section_tensor(space, x)
    assert np.max(np.abs(a - b)) < 1e-10


def test_flat_bundle_rejects_curved_bundle(bs_s4):
    with pytest.raises(ParameterError):
        cv.flat_bundle_tensor(bs_s4, bs_s4.point(np.zeros(4)))


# ---------------------------------------------------------------------------
# fibre R^k


def test_fiber_constant_weight_vanishes():
    # [TRIVIAL]
    fc = cv.fiber_curvatures(wt.constant(), 3, [0.2, 0.1, 0.4])
    assert np.all(fc.sectional == 0.0) and np.all(fc.ricci == 0.0) and fc.scalar == 0.0


def test_fiber_scalar_phi2_r():
    # [DERIVED] substitution gives -32 e^{-2}; checked against the coordinate oracle too
    w = wt.from_expressions("0", "r")
    y = np.array([1.0, 0.0, 0.0])
    fc = cv.fiber_curvatures(w, 3, y)
    assert fc.scalar == pytest.approx(-32 * math.exp(-2), rel=1e-14)
    g = fiber_metric(w)
    assert scalar_from_coordinate_tensor(cv.fd_riemann_coordinates(g, y), g(y)) == pytest.approx(fc.scalar, abs=1e-3)


def test_fiber_sectional_against_oracle():
    # [DERIVED] each coordinate-plane sectional curvature from the coordinate oracle
    w = wt.from_expressions("0", "r**2/4")
    y = np.array([0.5, -0.3, 0.2])
    g = fiber_metric(w)
    rm = cv.fd_riemann_coordinates(g, y)
    gy = g(y)
    fc = cv.fiber_curvatures(w, 3, y)
    for a in range(3):
        for b in range(3):
            if a != b:
                sec = rm[a, b, b, a] / (gy[a, a] * gy[b, b])
                assert sec == pytest.approx(fc.sectional[a, b], abs=1e-4)


def test_fiber_ricci_against_oracle():
    w = wt.from_expressions("0", "r/2 - r**2/8")
    y = np.array([0.4, 0.1, -0.3, 0.2])
    g = fiber_metric(w)
    rm = cv.fd_riemann_coordinates(g, y)
    ric = np.einsum("ad,abcd->bc", np.linalg.inv(g(y)), rm)
    assert np.max(np.abs(np.diag(ric) - cv.fiber_curvatures(w, 4, y).ricci)) < 1e-4


@pytest.mark.parametrize("c, d", [(1.0, 0.0), (-0.5, 0.3), (2.0, -1.0)])
def test_fiber_two_dimensional_flat_family(c, d):
    # [PAPER] k = 2 and phi2'' r + phi2' = 0, i.e. phi2 = c log r + d
    w = wt.from_expressions("0", f"{c}*log(r) + {d}", r_min=1e-9)
    for y in ([0.3, 0.4], [1.0, -0.2], [0.6, 0.5]):
        assert np.max(np.abs(cv.fiber_curvatures(w, 2, y).sectional)) < 1e-8
    # near the origin exp(-2 phi2) is huge, so compare with the size of the cancelling terms
    y = np.array([0.05, 0.02])
    r = float(y @ y)
    d = w.derivatives(r)
    scale = 4 * math.exp(-2 * d[0, 1]) * (abs(d[1, 1]) ** 2 * r + abs(d[2, 1]) * r + abs(d[1, 1]))
    assert np.max(np.abs(cv.fiber_curvatures(w, 2, y).sectional)) < 1e-12 * scale


@given(
    y=st.lists(st.floats(-1, 1), min_size=2, max_size=5),
    flips=st.lists(st.booleans(), min_size=5, max_size=5),
)
def test_fiber_sectional_symmetry(y, flips):
    w = wt.from_expressions("0", "r/2 + r**2/5")
    y = np.array(y)
    k = len(y)
    fc = cv.fiber_curvatures(w, k, y)
    assert np.array_equal(fc.sectional, fc.sectional.T)
    flipped = cv.fiber_curvatures(w, k, np.where(flips[:k], -y, y))
    assert np.array_equal(fc.sectional, flipped.sectional)


def test_fiber_errors():
    with pytest.raises(ParameterError):
        cv.fiber_curvatures(wt.constant(), 1, [0.1])
    with pytest.raises(ParameterError):
        cv.fiber_curvatures(wt.constant(), 3, [0.1, 0.2])


# ---------------------------------------------------------------------------
# oracle


def test_oracle_on_flat_data(rng):
    # [TRIVIAL]
    space = flat_space(2, 2, wt.constant())
    p = space.random_point(rng, (0.1, 1.0))
    assert np.max(np.abs(cv.fd_riemann_oracle(space, p))) < 1e-6


def test_oracle_near_boundary(bs_h4):
    with pytest.raises(DomainError):
        cv.fd_riemann_oracle(bs_h4, bs_h4.point(np.zeros(4), [0.9999, 0.0, 0.0]))
    chart = bg.model_chart("hyperbolic", 2, 1.0)
    space = TotalSpace(chart, bg.trivial_bundle(chart, 1), wt.constant())
    edge = chart.upper - 1e-4
    with pytest.raises(DomainError):
        cv.fd_riemann_oracle(space, space.point([edge[0], 0.0], [0.0]))
