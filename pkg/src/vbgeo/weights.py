"""Radial weight functions phi1(r), phi2(r) of the squared fibre norm r.

The metric on the total space is ``exp(2 phi1) g_M + exp(2 phi2) g_E``; the
connection coefficients a, b, c1, c2 derived here enter every other module.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np
import sympy

from .errors import DomainError, ParameterError

ScalarFn = Callable[[float], float]

__all__ = [
    "WeightProfile",
    "ConnectionCoefficients",
    "coefficients",
    "builtin_profile",
    "constant",
    "bryant_salamon",
    "kahler_disk",
    "from_expressions",
    "from_callbacks",
]


@dataclass(frozen=True)
class WeightProfile:
    """Pair of weights with analytic first and second derivatives.

    ``r_min`` is an exclusive lower bound used only by profiles that are
    singular at the zero section (e.g. ``-l log r``); regular profiles
    keep ``r_min = 0`` and accept r = 0.
    """

    phi1: ScalarFn
    phi2: ScalarFn
    dphi1: ScalarFn
    dphi2: ScalarFn
    d2phi1: ScalarFn
    d2phi2: ScalarFn
    r_max: float = math.inf
    r_min: float = 0.0
    kind: str = "custom"
    params: Mapping[str, object] = field(default_factory=dict)

    def check_domain(self, r: float) -> None:
        if not np.isfinite(r):
            raise DomainError(f"r={r!r} is not finite")
        if r < 0.0 or r >= self.r_max:
            raise DomainError(f"r={r:.17g} outside [0, {self.r_max:.17g})")
        if self.r_min > 0.0 and r <= self.r_min:
            raise DomainError(f"r={r:.17g} not above singular bound {self.r_min:.17g}")

    def contains(self, r: float) -> bool:
        try:
            self.check_domain(r)
        except DomainError:
            return False
        return True

    def values(self, r: float) -> tuple[float, float]:
        self.check_domain(r)
        return float(self.phi1(r)), float(self.phi2(r))

    def derivatives(self, r: float) -> np.ndarray:
        """Rows (phi, phi', phi'') and columns (weight 1, weight 2)."""
        self.check_domain(r)
        return np.array(
            [
                [self.phi1(r), self.phi2(r)],
                [self.dphi1(r), self.dphi2(r)],
                [self.d2phi1(r), self.d2phi2(r)],
            ],
            dtype=float,
        )

    def is_constant(self) -> bool:
        return self.kind == "constant"


@dataclass(frozen=True)
class ConnectionCoefficients:
    a: float
    b: float
    c1: float
    c2: float

    def as_dict(self) -> dict[str, float]:
        return {"a": self.a, "b": self.b, "c1": self.c1, "c2": self.c2}


def coefficients(w: WeightProfile, r: float) -> ConnectionCoefficients:
    """Coefficients of the metric correction tensor C at squared radius r."""
    w.check_domain(r)
    p1, p2 = float(w.phi1(r)), float(w.phi2(r))
    a = 2.0 * float(w.dphi1(r))
    b = 2.0 * float(w.dphi2(r))
    return ConnectionCoefficients(a=a, b=b, c1=-a * math.exp(2.0 * (p1 - p2)), c2=-b)


def _const_fn(value: float) -> ScalarFn:
    return lambda r: value


def constant(phi1: float = 0.0, phi2: float = 0.0) -> WeightProfile:
    zero = _const_fn(0.0)
    return WeightProfile(
        phi1=_const_fn(float(phi1)),
        phi2=_const_fn(float(phi2)),
        dphi1=zero,
        dphi2=zero,
        d2phi1=zero,
        d2phi2=zero,
        kind="constant",
        params={"phi1": float(phi1), "phi2": float(phi2)},
    )


def bryant_salamon(c0: float = 1.0, c1: float = 1.0, s: float = 1.0) -> WeightProfile:
    """phi1 = log(u)/4, phi2 = -log(u)/4 + log(c0) with u = 2 c0^2 s r + c1."""
    if not (c0 > 0 and c1 > 0):
        raise ParameterError(f"bryant_salamon needs c0, c1 > 0 (got {c0}, {c1})")
    if not np.isfinite(s):
        raise ParameterError("bryant_salamon needs a finite s")
    k = 2.0 * c0 * c0 * s
    log_c0 = math.log(c0)
    # u > 0 bounds r when s < 0
    r_max = -c1 / k if s < 0 else math.inf

    def u(r: float) -> float:
        return k * r + c1

    return WeightProfile(
        phi1=lambda r: 0.25 * math.log(u(r)),
        phi2=lambda r: -0.25 * math.log(u(r)) + log_c0,
        dphi1=lambda r: 0.25 * k / u(r),
        dphi2=lambda r: -0.25 * k / u(r),
        d2phi1=lambda r: -0.25 * k * k / u(r) ** 2,
        d2phi2=lambda r: 0.25 * k * k / u(r) ** 2,
        r_max=r_max,
        kind="bryant_salamon",
        params={"c0": float(c0), "c1": float(c1), "s": float(s)},
    )


def kahler_disk(c1: float = 1.0, kappa: float = 1.0) -> WeightProfile:
    """exp(2 phi1) = sqrt(c1 + kappa r), exp(2 phi2) = 1/sqrt(c1 + kappa r)."""
    if not c1 > 0:
        raise ParameterError(f"kahler_disk needs c1 > 0 (got {c1})")
    r_max = -c1 / kappa if kappa < 0 else math.inf

    def u(r: float) -> float:
        return c1 + kappa * r

    return WeightProfile(
        phi1=lambda r: 0.25 * math.log(u(r)),
        phi2=lambda r: -0.25 * math.log(u(r)),
        dphi1=lambda r: 0.25 * kappa / u(r),
        dphi2=lambda r: -0.25 * kappa / u(r),
        d2phi1=lambda r: -0.25 * kappa * kappa / u(r) ** 2,
        d2phi2=lambda r: 0.25 * kappa * kappa / u(r) ** 2,
        r_max=r_max,
        kind="kahler_disk",
        params={"c1": float(c1), "kappa": float(kappa)},
    )


_R = sympy.Symbol("r", real=True)


def _lambdify_chain(expr: str) -> tuple[ScalarFn, ScalarFn, ScalarFn]:
    try:
        e0 = sympy.sympify(expr, locals={"r": _R})
    except (sympy.SympifyError, SyntaxError, TypeError) as exc:
        raise ParameterError(f"cannot parse weight expression {expr!r}") from exc
    extra = e0.free_symbols - {_R}
    if extra:
        raise ParameterError(f"weight expression {expr!r} has free symbols {sorted(map(str, extra))}")
    e1 = sympy.diff(e0, _R)
    e2 = sympy.diff(e1, _R)
    fns = [sympy.lambdify(_R, e, modules="math") for e in (e0, e1, e2)]
    return tuple(lambda r, f=f: float(f(r)) for f in fns)  # type: ignore[return-value]


def from_expressions(
    phi1: str, phi2: str, r_max: float = math.inf, r_min: float = 0.0
) -> WeightProfile:
    """Custom profile from closed-form expressions in ``r``; derivatives are symbolic."""
    p1, d1, dd1 = _lambdify_chain(str(phi1))
    p2, d2, dd2 = _lambdify_chain(str(phi2))
    if not r_max > r_min:
        raise ParameterError("r_max must exceed r_min")
    return WeightProfile(
        p1, p2, d1, d2, dd1, dd2,
        r_max=float(r_max), r_min=float(r_min), kind="custom",
        params={"phi1": str(phi1), "phi2": str(phi2), "r_max": float(r_max), "r_min": float(r_min)},
    )


def from_callbacks(
    phi1: tuple[ScalarFn, ScalarFn, ScalarFn],
    phi2: tuple[ScalarFn, ScalarFn, ScalarFn],
    r_max: float = math.inf,
    r_min: float = 0.0,
) -> WeightProfile:
    """Custom profile from (value, first, second derivative) triples.

    The derivatives are trusted only as far as the finite-difference
    consistency check in the test-suite goes.
    """
    if len(phi1) != 3 or len(phi2) != 3:
        raise ParameterError("callback profiles need (phi, dphi, d2phi) triples")
    return WeightProfile(
        phi1[0], phi2[0], phi1[1], phi2[1], phi1[2], phi2[2],
        r_max=float(r_max), r_min=float(r_min), kind="custom",
        params={"r_max": float(r_max), "r_min": float(r_min)},
    )


def builtin_profile(kind: str, params: Mapping[str, object] | None = None) -> WeightProfile:
    params = dict(params or {})
    try:
        if kind == "constant":
            return constant(**{k: float(v) for k, v in params.items()})
        if kind == "bryant_salamon":
            return bryant_salamon(**{k: float(v) for k, v in params.items()})
        if kind == "kahler_disk":
            return kahler_disk(**{k: float(v) for k, v in params.items()})
        if kind == "custom":
            return from_expressions(**params)  # type: ignore[arg-type]
    except TypeError as exc:
        raise ParameterError(f"bad parameters for {kind!r}: {exc}") from exc
    raise ParameterError(f"unknown weight profile kind {kind!r}")
