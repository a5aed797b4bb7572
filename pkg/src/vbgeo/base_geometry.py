"""Base-manifold charts and metric bundle connections over them.

Index conventions used throughout the package:

* ``christoffel(x)[p, i, j]`` is Gamma^p_{ij} of the base metric.
* ``riemann_up(x)[p, l, i, j]`` is the p-th component of R(d_i, d_j) d_l with
  R(X, Y) = [nabla_X, nabla_Y] - nabla_[X,Y].
* ``riemann(x)[i, j, k, l] = g(R(d_i, d_j) d_l, d_k)`` so that R_ijij is
  positive on the round sphere.
* ``BundleConnection.gamma(x)[i, b, a]`` is Gamma^{E,b}_{ia}, i.e.
  D_{d_i} e_a = sum_b gamma[i, b, a] e_b in an orthonormal bundle frame.
* ``BundleConnection.curvature(x)[b, a, i, j] = <R^E(d_i, d_j) e_a, e_b>``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
import sympy

from .errors import ChartExitError, ParameterError

Array = np.ndarray

__all__ = [
    "BaseChart",
    "BundleConnection",
    "FourManifoldCurvatureOperator",
    "model_chart",
    "custom_chart",
    "expression_chart",
    "trivial_bundle",
    "tangent_bundle",
    "lambda2_bundle",
    "lambda2_basis",
    "curvature_operator",
    "rho_forms",
    "rho_from_operator",
    "christoffel_from_metric_derivative",
    "riemann_from_christoffel",
    "fd_bundle_curvature",
]


# ---------------------------------------------------------------------------
# tensor helpers


def christoffel_from_metric_derivative(g: Array, dg: Array) -> Array:
    """Gamma^p_{ij} from g_ij and dg[c, i, j] = d_c g_ij."""
    ginv = np.linalg.inv(g)
    first = 0.5 * (np.einsum("iqj->qij", dg) + np.einsum("jqi->qij", dg) - np.einsum("qij->qij", dg))
    return np.einsum("pq,qij->pij", ginv, first)


def riemann_from_christoffel(gam: Array, dgam: Array) -> Array:
    """R^p_{lij} from Gamma^p_{ij} and dgam[c, p, i, j] = d_c Gamma^p_{ij}."""
    return (
        np.einsum("ipjl->plij", dgam)
        - np.einsum("jpil->plij", dgam)
        + np.einsum("piq,qjl->plij", gam, gam)
        - np.einsum("pjq,qil->plij", gam, gam)
    )


def _christoffel_derivative(g: Array, dg: Array, ddg: Array) -> Array:
    """d_c Gamma^p_{ij} from metric derivatives up to second order (ddg[c, d, i, j])."""
    ginv = np.linalg.inv(g)
    first = 0.5 * (np.einsum("iqj->qij", dg) + np.einsum("jqi->qij", dg) - dg)
    dfirst = 0.5 * (
        np.einsum("ciqj->cqij", ddg) + np.einsum("cjqi->cqij", ddg) - ddg
    )
    dginv = -np.einsum("pa,cab,bq->cpq", ginv, dg, ginv)
    return np.einsum("cpq,qij->cpij", dginv, first) + np.einsum("pq,cqij->cpij", ginv, dfirst)


def _central_diff(fn: Callable[[Array], Array], x: Array, steps: Array) -> Array:
    """Stack of central differences d_c fn(x), leading axis c."""
    out = []
    for c in range(len(x)):
        e = np.zeros_like(x)
        e[c] = steps[c]
        out.append((np.asarray(fn(x + e)) - np.asarray(fn(x - e))) / (2.0 * steps[c]))
    return np.array(out)


def _is_riemann_symmetric(rm: Array, tol: float) -> bool:
    scale = max(1.0, float(np.max(np.abs(rm))))
    bianchi = rm + np.einsum("jkil->ijkl", rm) + np.einsum("kijl->ijkl", rm)
    return bool(
        np.max(np.abs(rm + np.swapaxes(rm, 0, 1))) <= tol * scale
        and np.max(np.abs(rm + np.swapaxes(rm, 2, 3))) <= tol * scale
        and np.max(np.abs(rm - np.transpose(rm, (2, 3, 0, 1)))) <= tol * scale
        and np.max(np.abs(bianchi)) <= tol * scale
    )


# ---------------------------------------------------------------------------
# charts


@dataclass(frozen=True)
class BaseChart:
    """Single coordinate chart of a Riemannian manifold on a box domain."""

    m: int
    metric: Callable[[Array], Array]
    metric_derivative: Callable[[Array], Array]
    christoffel: Callable[[Array], Array]
    riemann_up: Callable[[Array], Array]
    lower: Array
    upper: Array
    kind: str = "custom"
    curv: float = 0.0
    analytic: bool = False

    def contains(self, x: Sequence[float], margin: float = 0.0) -> bool:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.m,) or not np.all(np.isfinite(x)):
            return False
        pad = margin * (self.upper - self.lower)
        return bool(np.all(x > self.lower + pad) and np.all(x < self.upper - pad))

    def check_point(self, x: Sequence[float]) -> Array:
        x = np.asarray(x, dtype=float)
        if not self.contains(x):
            raise ChartExitError(f"base point {x.tolist()} outside chart box")
        return x

    def sample(self, rng: np.random.Generator, n: int = 1, margin: float = 0.1) -> Array:
        pad = margin * (self.upper - self.lower)
        return rng.uniform(self.lower + pad, self.upper - pad, size=(n, self.m))

    @property
    def origin(self) -> Array:
        return 0.5 * (self.lower + self.upper)

    def riemann(self, x: Array) -> Array:
        return np.einsum("kp,plij->ijkl", self.metric(x), self.riemann_up(x))

    def ricci(self, x: Array) -> Array:
        """ric(d_j, d_l) = tr(X -> R(X, d_j) d_l)."""
        return np.einsum("plpj->jl", self.riemann_up(x))

    def scalar(self, x: Array) -> float:
        return float(np.einsum("jl,jl->", np.linalg.inv(self.metric(x)), self.ricci(x)))

    def frame(self, x: Array) -> Array:
        """Columns are the Gram-Schmidt orthonormalisation of d_1, ..., d_m."""
        chol = np.linalg.cholesky(self.metric(x))
        return np.linalg.inv(chol).T

    def frame_derivative(self, x: Array) -> Array:
        """dF[i] = d_i of the Gram-Schmidt frame, exact given the metric derivative."""
        g = self.metric(x)
        chol = np.linalg.cholesky(g)
        linv = np.linalg.inv(chol)
        frame = linv.T
        out = np.empty((self.m, self.m, self.m))
        for i, dgi in enumerate(self.metric_derivative(x)):
            s = linv @ dgi @ linv.T
            low = np.tril(s)
            low[np.diag_indices(self.m)] *= 0.5
            out[i] = -frame @ low.T
        return out

    def frame_connection(self, x: Array) -> Array:
        """omega[i] with nabla_{d_i} f_a = sum_b omega[i, b, a] f_b (skew matrices)."""
        frame = self.frame(x)
        finv = np.linalg.inv(frame)
        gam = self.christoffel(x)
        dframe = self.frame_derivative(x)
        return np.array([finv @ (dframe[i] + gam[:, i, :] @ frame) for i in range(self.m)])

    def orthonormal_riemann(self, x: Array) -> Array:
        """Rorth[a, b, c, d] = g(R(f_a, f_b) f_d, f_c) in the Gram-Schmidt frame."""
        frame = self.frame(x)
        return np.einsum("ijkl,ia,jb,kc,ld->abcd", self.riemann(x), frame, frame, frame, frame)


def _constant_curvature_pieces(m: int, sigma: float, kappa: float):
    """Conformal chart g = exp(2u) delta with u = log 2 - log(1 + sigma kappa |x|^2)."""
    k_sec = sigma * kappa

    def u_and_grad(x):
        q = 1.0 + k_sec * float(x @ x)
        return math.log(2.0) - math.log(q), -2.0 * k_sec * x / q

    def metric(x):
        u, _ = u_and_grad(x)
        return math.exp(2.0 * u) * np.eye(m)

    def metric_derivative(x):
        u, du = u_and_grad(x)
        return 2.0 * math.exp(2.0 * u) * du[:, None, None] * np.eye(m)[None, :, :]

    def christoffel(x):
        _, du = u_and_grad(x)
        eye = np.eye(m)
        return (
            np.einsum("ki,j->kij", eye, du)
            + np.einsum("kj,i->kij", eye, du)
            - np.einsum("ij,k->kij", eye, du)
        )

    def riemann_up(x):
        g = metric(x)
        eye = np.eye(m)
        # R(X,Y)Z = K(<Y,Z>X - <X,Z>Y)
        return k_sec * (np.einsum("jl,pi->plij", g, eye) - np.einsum("il,pj->plij", g, eye))

    return metric, metric_derivative, christoffel, riemann_up


def model_chart(kind: str, m: int, curv: float = 1.0) -> BaseChart:
    """Flat space, or the conformal chart of constant curvature +curv / -curv."""
    if int(m) != m or m < 1:
        raise ParameterError(f"invalid dimension m={m!r}")
    m = int(m)
    if kind == "flat":
        metric, dmetric, chris, riem = _constant_curvature_pieces(m, 0.0, 0.0)
        half = 1.0
        curv = 0.0
        metric_flat = lambda x: np.eye(m)  # noqa: E731
        return BaseChart(
            m=m,
            metric=metric_flat,
            metric_derivative=lambda x: np.zeros((m, m, m)),
            christoffel=lambda x: np.zeros((m, m, m)),
            riemann_up=lambda x: np.zeros((m, m, m, m)),
            lower=-half * np.ones(m),
            upper=half * np.ones(m),
            kind="flat",
            curv=0.0,
            analytic=True,
        )
    if kind not in ("sphere", "hyperbolic"):
        raise ParameterError(f"unknown chart kind {kind!r}")
    if not (curv > 0 and np.isfinite(curv)):
        raise ParameterError(f"{kind} chart needs curv > 0 (got {curv!r})")
    sigma = 1.0 if kind == "sphere" else -1.0
    metric, dmetric, chris, riem = _constant_curvature_pieces(m, sigma, float(curv))
    # hyperbolic conformal chart lives in |x|^2 < 1/curv
    half = 1.0 if kind == "sphere" else 0.9 / math.sqrt(m * curv)
    return BaseChart(
        m=m,
        metric=metric,
        metric_derivative=dmetric,
        christoffel=chris,
        riemann_up=riem,
        lower=-half * np.ones(m),
        upper=half * np.ones(m),
        kind=kind,
        curv=float(curv),
        analytic=True,
    )


def custom_chart(
    metric: Callable[[Array], Array],
    m: int,
    lower: Sequence[float],
    upper: Sequence[float],
    rel_step: float = 1e-4,
    riemann_step: float = 1e-3,
    symmetry_tol: float = 1e-4,
) -> BaseChart:
    """Chart from a metric callable; derivatives by central differences.

    The Riemann tensor differentiates finite-difference Christoffels. If the
    result fails its algebraic symmetries at ``symmetry_tol`` one Richardson
    step (h, h/2) is applied.
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    if lower.shape != (m,) or upper.shape != (m,) or np.any(lower >= upper):
        raise ParameterError("custom chart needs a non-empty box of dimension m")

    def steps(x, h):
        return h * np.maximum(1.0, np.abs(x))

    def metric_derivative(x):
        return _central_diff(metric, x, steps(x, rel_step))

    def christoffel(x):
        return christoffel_from_metric_derivative(metric(x), metric_derivative(x))

    def riemann_at(x, h):
        dgam = _central_diff(christoffel, x, steps(x, h))
        return riemann_from_christoffel(christoffel(x), dgam)

    def riemann_up(x):
        x = np.asarray(x, dtype=float)
        coarse = riemann_at(x, riemann_step)
        low = np.einsum("kp,plij->ijkl", metric(x), coarse)
        if _is_riemann_symmetric(low, symmetry_tol):
            return coarse
        fine = riemann_at(x, 0.5 * riemann_step)
        return (4.0 * fine - coarse) / 3.0

    return BaseChart(
        m=m,
        metric=lambda x: np.asarray(metric(np.asarray(x, dtype=float)), dtype=float),
        metric_derivative=metric_derivative,
        christoffel=christoffel,
        riemann_up=riemann_up,
        lower=lower,
        upper=upper,
        kind="custom",
        analytic=False,
    )


def expression_chart(
    components: Sequence[Sequence[str]], lower: Sequence[float], upper: Sequence[float]
) -> BaseChart:
    """Chart from closed-form metric entries in the symbols x1, ..., xm (exact derivatives)."""
    m = len(components)
    if any(len(row) != m for row in components):
        raise ParameterError("metric expression matrix must be square")
    xs = sympy.symbols(" ".join(f"x{i + 1}" for i in range(m)), real=True)
    xs = tuple(xs) if m > 1 else (xs,)
    names = {str(s): s for s in xs}
    try:
        gmat = sympy.Matrix([[sympy.sympify(e, locals=names) for e in row] for row in components])
    except (sympy.SympifyError, SyntaxError, TypeError) as exc:
        raise ParameterError("cannot parse chart metric expressions") from exc
    if gmat != gmat.T:
        raise ParameterError("metric expression matrix must be symmetric")
    extra = set().union(*(e.free_symbols for e in gmat)) - set(xs)
    if extra:
        raise ParameterError(f"unknown symbols in chart metric: {sorted(map(str, extra))}")
    dg = [[[sympy.diff(gmat[i, j], xs[c]) for j in range(m)] for i in range(m)] for c in range(m)]
    ddg = [
        [[[sympy.diff(dg[c][i][j], xs[d]) for j in range(m)] for i in range(m)] for d in range(m)]
        for c in range(m)
    ]
    f_g = sympy.lambdify(xs, gmat.tolist(), modules="numpy")
    f_dg = sympy.lambdify(xs, dg, modules="numpy")
    f_ddg = sympy.lambdify(xs, ddg, modules="numpy")

    def metric(x):
        return np.array(f_g(*x), dtype=float)

    def metric_derivative(x):
        return np.array(f_dg(*x), dtype=float)

    def christoffel(x):
        return christoffel_from_metric_derivative(metric(x), metric_derivative(x))

    def riemann_up(x):
        g, d1 = metric(x), metric_derivative(x)
        d2 = np.array(f_ddg(*x), dtype=float)
        return riemann_from_christoffel(
            christoffel_from_metric_derivative(g, d1), _christoffel_derivative(g, d1, d2)
        )

    return BaseChart(
        m=m,
        metric=metric,
        metric_derivative=metric_derivative,
        christoffel=christoffel,
        riemann_up=riemann_up,
        lower=np.asarray(lower, dtype=float),
        upper=np.asarray(upper, dtype=float),
        kind="custom",
        analytic=True,
    )


# ---------------------------------------------------------------------------
# bundles


@dataclass(frozen=True)
class BundleConnection:
    k: int
    chart: BaseChart
    gamma: Callable[[Array], Array]
    curvature: Callable[[Array], Array]
    is_flat: bool = False
    is_tangent_bundle: bool = False
    kind: str = "custom"
    sign: Optional[str] = None

    def gamma_derivative(self, x: Array, h: float = 1e-5) -> Array:
        """dgam[c, i, b, a] = d_c Gamma^{E,b}_{ia} by central differences."""
        x = np.asarray(x, dtype=float)
        return _central_diff(self.gamma, x, h * np.maximum(1.0, np.abs(x)))

    def orthonormal_curvature(self, x: Array) -> Array:
        """Curvature with the two form slots in the base Gram-Schmidt frame."""
        frame = self.chart.frame(x)
        return np.einsum("baij,ip,jq->bapq", self.curvature(x), frame, frame)


def fd_bundle_curvature(bundle: BundleConnection, x: Array) -> Array:
    """d_i G_j - d_j G_i + [G_i, G_j] from finite-difference connection derivatives."""
    gam = bundle.gamma(x)
    dgam = bundle.gamma_derivative(x)
    field = (
        np.einsum("ijba->baij", dgam)
        - np.einsum("jiba->baij", dgam)
        + np.einsum("ibc,jca->baij", gam, gam)
        - np.einsum("jbc,ica->baij", gam, gam)
    )
    return field


def trivial_bundle(chart: BaseChart, k: int) -> BundleConnection:
    if int(k) != k or k < 1:
        raise ParameterError(f"invalid rank k={k!r}")
    k = int(k)
    m = chart.m
    return BundleConnection(
        k=k,
        chart=chart,
        gamma=lambda x: np.zeros((m, k, k)),
        curvature=lambda x: np.zeros((k, k, m, m)),
        is_flat=True,
        kind="trivial",
    )


def tangent_bundle(chart: BaseChart) -> BundleConnection:
    """TM with the Levi-Civita connection in the Gram-Schmidt frame."""

    def curvature(x):
        frame = chart.frame(x)
        finv = np.linalg.inv(frame)
        return np.einsum("bp,plij,la->baij", finv, chart.riemann_up(x), frame)

    return BundleConnection(
        k=chart.m,
        chart=chart,
        gamma=chart.frame_connection,
        curvature=curvature,
        is_flat=chart.kind == "flat",
        is_tangent_bundle=True,
        kind="tangent",
    )


def _two_form(m: int, a: int, b: int) -> Array:
    out = np.zeros((m, m))
    out[a, b], out[b, a] = 1.0, -1.0
    return out


def lambda2_basis(sign: str) -> Array:
    """e1 = e45 +- e67, e2 = e46 -+ e57, e3 = e47 +- e56 as 4x4 skew matrices.

    Coframe indices 4..7 map to matrix indices 0..3.
    """
    if sign not in ("plus", "minus"):
        raise ParameterError(f"sign must be 'plus' or 'minus' (got {sign!r})")
    eps = 1.0 if sign == "plus" else -1.0
    w = lambda a, b: _two_form(4, a - 4, b - 4)  # noqa: E731
    return np.array([w(4, 5) + eps * w(6, 7), w(4, 6) - eps * w(5, 7), w(4, 7) + eps * w(5, 6)])


def _pair_E(u: Array, v: Array) -> float:
    """Bundle inner product <u, v>_E = 1/2 of the usual 2-form inner product."""
    return 0.25 * float(np.sum(u * v))


def lambda2_bundle(chart: BaseChart, sign: str) -> BundleConnection:
    """Rank-3 bundle of self-dual (plus) or anti-self-dual (minus) 2-forms of a 4-manifold."""
    if chart.m != 4:
        raise ParameterError("lambda2 bundle needs a 4-dimensional base")
    basis = lambda2_basis(sign)

    def induced(mats: Array) -> Array:
        # [w, E_a] expanded in the orthonormal E_b frame
        comm = np.einsum("...pq,aqr->...apr", mats, basis) - np.einsum("apq,...qr->...apr", basis, mats)
        return 0.25 * np.einsum("bpr,...apr->...ba", basis, comm)

    def gamma(x):
        return induced(chart.frame_connection(x))

    def curvature(x):
        frame = chart.frame(x)
        finv = np.linalg.inv(frame)
        omega = np.einsum("ap,plij,lc->ijac", finv, chart.riemann_up(x), frame)
        return np.einsum("ijba->baij", induced(omega))

    return BundleConnection(
        k=3,
        chart=chart,
        gamma=gamma,
        curvature=curvature,
        is_flat=chart.kind == "flat",
        kind="lambda2",
        sign=sign,
    )


# ---------------------------------------------------------------------------
# four-manifold curvature operator


@dataclass(frozen=True)
class FourManifoldCurvatureOperator:
    """Curvature operator on 2-forms in the orthonormal (Lambda+, Lambda-) frame."""

    blocks: Array
    s: float
    W_plus: Array
    W_minus: Array
    ric0: Array

    @property
    def is_einstein(self) -> bool:
        return bool(np.max(np.abs(self.ric0)) <= 1e-8 * max(1.0, abs(self.s)))


def _operator_matrix(rorth: Array) -> Array:
    forms = np.concatenate([lambda2_basis("plus"), lambda2_basis("minus")])
    # |e^i|^2 = 2 in the usual 2-form norm
    return 0.125 * np.einsum("Iab,Jcd,abcd->IJ", forms, forms, rorth)


def curvature_operator(chart: BaseChart, x: Array) -> FourManifoldCurvatureOperator:
    if chart.m != 4:
        raise ParameterError("curvature operator decomposition needs m = 4")
    blocks = _operator_matrix(chart.orthonormal_riemann(np.asarray(x, dtype=float)))
    s = float(np.trace(blocks)) / 6.0
    eye = np.eye(3)
    return FourManifoldCurvatureOperator(
        blocks=blocks,
        s=s,
        W_plus=blocks[:3, :3] - s * eye,
        W_minus=blocks[3:, 3:] - s * eye,
        ric0=blocks[:3, 3:],
    )


def rho_forms(bundle: BundleConnection, x: Array) -> Array:
    """rho^k(f_a, f_b) = <R^E(f_a, f_b) e^i, e^j> for cycles (ijk), as 4x4 matrices."""
    if bundle.kind != "lambda2":
        raise ParameterError("rho forms are defined for lambda2 bundles")
    rorth = bundle.orthonormal_curvature(x)
    out = np.empty((3, 4, 4))
    for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        out[k] = rorth[j, i]
    return out


def rho_from_operator(op: FourManifoldCurvatureOperator, sign: str) -> Array:
    """The rho^i 2-forms of a lambda2 bundle rebuilt from the curvature-operator blocks.

    rho_+^i(e_J) = -R(e_{+,i}, e_J) and rho_-^i(e_J) = +R(e_{-,i}, e_J) over the
    six basis bivectors e_J, each with e^I(e_J) = 2 delta_IJ.
    """
    forms = np.concatenate([lambda2_basis("plus"), lambda2_basis("minus")])
    if sign == "plus":
        rows, sgn = op.blocks[:3], -1.0
    elif sign == "minus":
        rows, sgn = op.blocks[3:], 1.0
    else:
        raise ParameterError(f"sign must be 'plus' or 'minus' (got {sign!r})")
    # R(e_I, e_J) = 2 blocks[I, J] and rho = 1/2 sum_J rho(e_J) e^J
    return sgn * np.einsum("iJ,Jab->iab", rows, forms)
