import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vbgeo import weights as wt
from vbgeo.errors import DomainError, ParameterError


def test_constant_profile_has_zero_coefficients():
    # [TRIVIAL]
    w = wt.constant(0.3, -0.7)
    for r in (0.0, 0.5, 10.0):
        co = wt.coefficients(w, r)
        assert (co.a, co.b, co.c1, co.c2) == (0.0, 0.0, 0.0, 0.0)
    assert w.r_max == math.inf


def test_constant_zero_profile_derivatives():
    # [TRIVIAL]
    w = wt.constant(0.0, 0.0)
    assert np.all(w.derivatives(1.3) == 0.0)


def test_bryant_salamon_coefficients_at_zero():
    # [PAPER] a = -b = c2 = c0^2 s / c1, c1 = -s
    co = wt.coefficients(wt.bryant_salamon(1.0, 1.0, 1.0), 0.0)
    assert co.a == pytest.approx(1.0, abs=1e-15)
    assert co.b == pytest.approx(-1.0, abs=1e-15)
    assert co.c1 == pytest.approx(-1.0, abs=1e-15)
    assert co.c2 == pytest.approx(1.0, abs=1e-15)


@given(
    c0=st.floats(0.3, 3.0),
    c1=st.floats(0.3, 3.0),
    s=st.sampled_from([-2.0, -1.0, 0.5, 1.0, 3.0]),
)
def test_bryant_salamon_coefficients_general(c0, c1, s):
    # [PAPER] same display with the constants kept symbolic
    co = wt.coefficients(wt.bryant_salamon(c0, c1, s), 0.0)
    assert co.a == pytest.approx(c0 * c0 * s / c1, rel=1e-13)
    assert co.b == pytest.approx(-co.a, rel=1e-13)
    assert co.c2 == pytest.approx(co.a, rel=1e-13)
    assert co.c1 == pytest.approx(-s, rel=1e-13)


def test_direct_evaluation_phi1_equals_r():
    # [TRIVIAL] a = 2, b = 0, c2 = 0, c1 = -2 e^2 at r = 1
    co = wt.coefficients(wt.from_expressions("r", "0"), 1.0)
    assert co.a == pytest.approx(2.0)
    assert co.b == 0.0
    assert co.c2 == 0.0
    assert co.c1 == pytest.approx(-2.0 * math.e**2, rel=1e-14)


def test_bryant_salamon_values_at_zero():
    # [PAPER] phi1'(0) = c0^2 s / (2 c1) = -phi2'(0)
    w = wt.bryant_salamon(1.0, 1.0, 1.0)
    assert w.phi1(0.0) == 0.0
    assert math.exp(2 * w.phi1(0.0)) == 1.0
    assert w.dphi1(0.0) == pytest.approx(0.5)
    assert w.dphi2(0.0) == pytest.approx(-0.5)


def test_bryant_salamon_disk_bound():
    # [PAPER] r0 = -c1 / (2 s) with c0 = 1
    w = wt.bryant_salamon(1.0, 2.0, -1.0)
    assert w.r_max == pytest.approx(1.0)
    with pytest.raises(DomainError):
        wt.coefficients(w, 1.0)
    wt.coefficients(w, 0.999)


def test_bryant_salamon_closed_form():
    # [PAPER] exp(2 phi1) = sqrt(2 c0^2 s r + c1)
    c0, c1, s = 1.3, 0.7, 1.0
    w = wt.bryant_salamon(c0, c1, s)
    for r in (0.0, 0.4, 2.0):
        u = 2 * c0 * c0 * s * r + c1
        assert math.exp(2 * w.phi1(r)) == pytest.approx(math.sqrt(u), rel=1e-14)
        assert w.phi2(r) == pytest.approx(-0.25 * math.log(u) + math.log(c0), rel=1e-14)


def test_kahler_disk_closed_form():
    # [PAPER] exp(2 phi1) = sqrt(c1 + kappa r), exp(2 phi2) = 1 / sqrt(c1 + kappa r)
    w = wt.kahler_disk(1.5, -0.5)
    assert w.r_max == pytest.approx(3.0)
    for r in (0.0, 1.0, 2.5):
        u = 1.5 - 0.5 * r
        assert math.exp(2 * w.phi1(r)) == pytest.approx(math.sqrt(u), rel=1e-14)
        assert math.exp(2 * w.phi2(r)) == pytest.approx(1 / math.sqrt(u), rel=1e-14)


@pytest.mark.parametrize(
    "profile",
    [
        wt.bryant_salamon(1.0, 1.0, 1.0),
        wt.bryant_salamon(0.7, 2.0, -1.5),
        wt.kahler_disk(1.0, 2.0),
        wt.kahler_disk(2.0, -1.0),
        wt.from_expressions("sin(r) + r**3", "exp(-r) * cos(2*r)"),
    ],
    ids=["bs_pos", "bs_neg", "kahler_pos", "kahler_neg", "custom"],
)
def test_derivatives_against_central_differences(profile):
    # [DERIVED] central differences with h = 1e-5
    rng = np.random.default_rng(3)
    hi = 0.9 * profile.r_max if math.isfinite(profile.r_max) else 4.0
    h = 1e-5
    for r in rng.uniform(1e-3, hi, size=100):
        for f, df, d2f in ((profile.phi1, profile.dphi1, profile.d2phi1), (profile.phi2, profile.dphi2, profile.d2phi2)):
            fd1 = (f(r + h) - f(r - h)) / (2 * h)
            assert abs(fd1 - df(r)) <= 1e-6 * max(1.0, abs(df(r)))
            # second derivative checked against differences of the analytic first derivative
            fd2 = (df(r + h) - df(r - h)) / (2 * h)
            assert abs(fd2 - d2f(r)) <= 1e-6 * max(1.0, abs(d2f(r)))


@given(
    c=st.lists(st.floats(-0.5, 0.5), min_size=4, max_size=4),
    r=st.floats(0.0, 3.0),
)
def test_c1_identity(c, r):
    # [TRIVIAL] c1 exp(2 phi2) = -a exp(2 phi1)
    w = wt.from_expressions(f"{c[0]}*r + {c[1]}*r**2", f"{c[2]}*r + {c[3]}*r**2")
    co = wt.coefficients(w, r)
    p1, p2 = w.values(r)
    lhs = co.c1 * math.exp(2 * p2)
    rhs = -co.a * math.exp(2 * p1)
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-14)
    assert co.c2 == -co.b


def test_from_callbacks_matches_expressions():
    cb = wt.from_callbacks(
        (lambda r: r * r, lambda r: 2 * r, lambda r: 2.0),
        (lambda r: -r, lambda r: -1.0, lambda r: 0.0),
    )
    ex = wt.from_expressions("r**2", "-r")
    for r in (0.0, 0.3, 1.7):
        assert np.allclose(cb.derivatives(r), ex.derivatives(r), atol=1e-15)


def test_singular_profile_lower_bound():
    w = wt.from_expressions("0", "-log(r)", r_min=0.0)
    # r_min = 0 keeps r = 0 in the domain, where log is singular
    with pytest.raises((ValueError, ZeroDivisionError)):
        w.values(0.0)
    w2 = wt.from_expressions("0", "-log(r)", r_min=1e-6)
    with pytest.raises(DomainError):
        w2.values(1e-7)
    assert w2.values(1.0)[1] == pytest.approx(0.0)


def test_domain_errors():
    w = wt.constant()
    with pytest.raises(DomainError):
        wt.coefficients(w, -1e-9)
    with pytest.raises(DomainError):
        wt.coefficients(w, float("nan"))


@pytest.mark.parametrize(
    "kind, params",
    [
        ("bryant_salamon", {"c0": -1.0}),
        ("bryant_salamon", {"c1": 0.0}),
        ("kahler_disk", {"c1": -2.0}),
        ("kahler_disk", {"bogus": 1.0}),
        ("custom", {"phi1": "r +", "phi2": "0"}),
        ("custom", {"phi1": "q*r", "phi2": "0"}),
        ("nonsense", {}),
    ],
)
def test_invalid_parameters(kind, params):
    with pytest.raises(ParameterError):
        wt.builtin_profile(kind, params)
