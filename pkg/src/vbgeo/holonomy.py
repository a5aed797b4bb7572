"""Local holonomy algebra at a zero-section point from curvature generators.

Generators R(X, Y) are skew endomorphisms written in the g-orthonormal split
frame (e^{-phi1} f_i, e^{-phi2} e_alpha) at o = (x, 0), where f_i is the
Gram-Schmidt frame of the base. Their Lie closure is computed numerically
with singular-value rank decisions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np

from .base_geometry import curvature_operator, lambda2_basis, lambda2_bundle, model_chart, trivial_bundle
from .curvature import zero_section_tensor
from .errors import ConvergenceError, ParameterError
from .total_space import SplitVector, TotalSpace
from .weights import WeightProfile, bryant_salamon

Array = np.ndarray

__all__ = [
    "SkewOperator",
    "HolonomyResult",
    "G2Result",
    "FlatHolonomyResult",
    "unweighted_frame_tensor",
    "bilinear_generator",
    "curvature_generators",
    "lie_closure",
    "span_rank",
    "g2_space",
    "g2_scenario",
    "g2_report",
    "flat_holonomy_scenario",
]

REL_CUTOFF = 1e-8
ABS_FLOOR = 1e-12


@dataclass(frozen=True)
class SkewOperator:
    matrix: Array

    @classmethod
    def from_matrix(cls, mat: Array, tol: float = 1e-12) -> "SkewOperator":
        mat = np.asarray(mat, dtype=float)
        scale = max(1.0, float(np.max(np.abs(mat))))
        if np.max(np.abs(mat + mat.T)) > tol * scale:
            raise ParameterError("curvature generator is not skew-symmetric")
        return cls(0.5 * (mat - mat.T))


@dataclass(frozen=True)
class HolonomyResult:
    dimension: int
    basis: list
    closure_rounds: int
    classification: str
    min_retained: float
    max_discarded: float

    @property
    def margin(self) -> float:
        if self.max_discarded == 0.0:
            return math.inf
        return self.min_retained / self.max_discarded


@dataclass(frozen=True)
class G2Result:
    holonomy: HolonomyResult
    subspace_dims: tuple
    family_ranks: tuple
    s: float


@dataclass(frozen=True)
class FlatHolonomyResult:
    holonomy: HolonomyResult
    base_dimension: int
    case: str
    lower_bound: int
    containment_ok: bool


# ---------------------------------------------------------------------------
# generators


def _frames(space: TotalSpace, x: Array) -> tuple[Array, Array]:
    """Unweighted orthonormal split frame U (columns) and the weight scales D."""
    m, k = space.m, space.k
    u = np.zeros((space.n, space.n))
    u[:m, :m] = space.chart.frame(x)
    u[m:, m:] = np.eye(k)
    p1, p2 = space.weights.values(0.0)
    d = np.concatenate([np.full(m, math.exp(p1)), np.full(k, math.exp(p2))])
    return u, d


def unweighted_frame_tensor(space: TotalSpace, x) -> Array:
    """Zero-section R(u_a, u_b, u_c, u_d) in the unweighted orthonormal split frame."""
    x = space.chart.check_point(x)
    u, _ = _frames(space, x)
    return np.einsum("abcd,ai,bj,ck,dl->ijkl", zero_section_tensor(space, x), u, u, u, u)


def _to_operator(bilinear: Array, d: Array) -> SkewOperator:
    # operator entries g(R e_d, e_c) on the weighted orthonormal frame e_c = u_c / d_c
    return SkewOperator.from_matrix(bilinear.T / np.outer(d, d))


def bilinear_generator(space: TotalSpace, x, X: SplitVector, Y: SplitVector) -> Array:
    """Bilinear form (Z, W) -> R(X, Y, Z, W) in the unweighted orthonormal frame.

    X and Y are given by their components in that frame.
    """
    rm = unweighted_frame_tensor(space, x)
    return np.einsum("abcd,a,b->cd", rm, X.as_array(), Y.as_array())


def curvature_generators(space: TotalSpace, x=None) -> list:
    """One generator per coordinate 2-plane of the weighted orthonormal split frame."""
    x = space.chart.origin if x is None else space.chart.check_point(x)
    _, d = _frames(space, x)
    rm = unweighted_frame_tensor(space, x)
    n = space.n
    # ordering: horizontal pairs, mixed pairs, vertical pairs
    m = space.m
    planes = (
        [(i, j) for i, j in combinations(range(m), 2)]
        + [(i, m + a) for i in range(m) for a in range(space.k)]
        + [(m + a, m + b) for a, b in combinations(range(space.k), 2)]
    )
    out = []
    for a, b in planes:
        bil = rm[a, b] / (d[a] * d[b])
        out.append(_to_operator(bil, d))
    assert len(out) == n * (n - 1) // 2
    return out


# ---------------------------------------------------------------------------
# closure


def _svd_span(rows: Array) -> tuple[Array, Array, float]:
    """Orthonormal row basis, retained and discarded relative singular values."""
    if rows.size == 0:
        return rows, np.zeros(0), np.zeros(0)
    _, sv, vt = np.linalg.svd(rows, full_matrices=False)
    top = sv[0] if sv.size else 0.0
    cut = max(REL_CUTOFF * top, ABS_FLOOR)
    keep = sv > cut
    rel = sv / top if top > 0 else sv
    return vt[keep], rel[keep], rel[~keep]


def span_rank(mats: Sequence[Array]) -> int:
    rows = np.array([np.asarray(mt, dtype=float).ravel() for mt in mats])
    basis, _, _ = _svd_span(rows)
    return len(basis)


def _classify(dim: int, n: int) -> str:
    if dim == n * (n - 1) // 2:
        return "so(n)"
    if n == 7 and dim == 14:
        return "g2-dimension"
    if n == 7 and dim == 3:
        return "su(2)-dimension"
    return f"dim={dim}"


def lie_closure(generators: Sequence) -> HolonomyResult:
    """Span of the generators closed under commutators."""
    mats = [g.matrix if isinstance(g, SkewOperator) else np.asarray(g, dtype=float) for g in generators]
    if not mats:
        raise ParameterError("lie_closure needs at least one generator")
    n = mats[0].shape[0]
    rows = np.array([mt.ravel() for mt in mats])
    basis, kept, dropped = _svd_span(rows)
    min_kept = float(kept.min()) if kept.size else math.inf
    max_drop = float(dropped.max()) if dropped.size else 0.0
    limit = n * (n - 1) // 2 + 1
    rounds = 0
    while len(basis):
        rounds += 1
        if rounds > limit:
            raise ConvergenceError("holonomy closure did not terminate")
        cur = basis.reshape(-1, n, n)
        brackets = np.array([(a @ b - b @ a).ravel() for a, b in combinations(cur, 2)]) if len(cur) > 1 else np.zeros((0, n * n))
        if brackets.size == 0:
            break
        resid = brackets - (brackets @ basis.T) @ basis
        stacked = np.vstack([basis, resid])
        new_basis, kept, dropped = _svd_span(stacked)
        min_kept = min(min_kept, float(kept.min()))
        if dropped.size:
            max_drop = max(max_drop, float(dropped.max()))
        if len(new_basis) == len(basis):
            basis = new_basis
            break
        basis = new_basis
    dim = len(basis)
    ops = [SkewOperator(0.5 * (b.reshape(n, n) - b.reshape(n, n).T)) for b in basis]
    return HolonomyResult(
        dimension=dim,
        basis=ops,
        closure_rounds=rounds,
        classification=_classify(dim, n),
        min_retained=min_kept if dim else 0.0,
        max_discarded=max_drop,
    )


# ---------------------------------------------------------------------------
# scenarios


def _lambda2_generators(space: TotalSpace, x: Array, forms: Array) -> list:
    """R(e) for horizontal bivectors given as 4x4 skew matrices in the base frame."""
    _, d = _frames(space, x)
    rm = unweighted_frame_tensor(space, x)
    out = []
    for form in forms:
        bil = 0.5 * np.einsum("ab,abcd->cd", form, rm[:4, :4]) / (d[0] * d[0])
        out.append(_to_operator(bil, d))
    return out


def _family_components(mats: list) -> list:
    """Connected components of the graph 'nonzero trace inner product'."""
    n = len(mats)
    gram = np.array([[float(np.sum(a * b)) for b in mats] for a in mats])
    scale = max(1.0, float(np.max(np.abs(gram))))
    adj = np.abs(gram) > 1e-10 * scale
    seen, comps = set(), []
    for i in range(n):
        if i in seen:
            continue
        stack, comp = [i], []
        seen.add(i)
        while stack:
            j = stack.pop()
            comp.append(j)
            for l in np.nonzero(adj[j])[0]:
                if l not in seen:
                    seen.add(int(l))
                    stack.append(int(l))
        comps.append(sorted(comp))
    return comps


def g2_space(base: str, c0: float = 1.0, c1: float = 1.0) -> TotalSpace:
    """Bryant-Salamon data: S^4 with Lambda^2_-, or H^4 with Lambda^2_+."""
    pairing = {"sphere4": ("sphere", "minus"), "hyperbolic4": ("hyperbolic", "plus")}
    if base not in pairing:
        raise ParameterError(f"g2 scenario base must be sphere4 or hyperbolic4 (got {base!r})")
    kind, sign = pairing[base]
    chart = model_chart(kind, 4, 1.0)
    s = curvature_operator(chart, chart.origin).s
    return TotalSpace(chart, lambda2_bundle(chart, sign), bryant_salamon(c0=c0, c1=c1, s=s))


def g2_scenario(base: str, c0: float = 1.0, c1: float = 1.0, x=None) -> G2Result:
    space = g2_space(base, c0, c1)
    return g2_report(space, x)


def g2_report(space: TotalSpace, x=None) -> G2Result:
    """Closure dimension plus the three generator subspaces of the decomposition."""
    if space.bundle.kind != "lambda2":
        raise ParameterError("G2 decomposition needs a lambda2 bundle")
    chart = space.chart
    x = chart.origin if x is None else chart.check_point(x)
    sign = space.bundle.sign
    other = "plus" if sign == "minus" else "minus"
    s = curvature_operator(chart, x).s
    gens = curvature_generators(space, x)
    hol = lie_closure(gens)

    m, k = space.m, space.k
    vv = gens[m * (m - 1) // 2 + m * k:]
    same = _lambda2_generators(space, x, lambda2_basis(sign)) + vv
    opposite = _lambda2_generators(space, x, lambda2_basis(other))
    mixed_start = m * (m - 1) // 2
    mixed = gens[mixed_start:mixed_start + m * k]
    mixed_mats = [g.matrix for g in mixed]
    comps = _family_components(mixed_mats)
    ranks = tuple(span_rank([mixed_mats[i] for i in comp]) for comp in comps)
    dims = (
        span_rank([g.matrix for g in same]),
        span_rank([g.matrix for g in opposite]),
        span_rank(mixed_mats),
    )
    return G2Result(holonomy=hol, subspace_dims=dims, family_ranks=ranks, s=float(s))


def _base_holonomy(space: TotalSpace, x: Array) -> HolonomyResult:
    """Closure of the base curvature operators in the base orthonormal frame."""
    m = space.m
    frame = space.chart.frame(x)
    rorth = np.einsum("ijkl,ia,jb,kc,ld->abcd", space.chart.riemann(x), frame, frame, frame, frame)
    # rorth[a, b, c, d] = g(R(f_a, f_b) f_d, f_c) is already the operator matrix
    gens = [rorth[a, b] for a, b in combinations(range(m), 2)] or [np.zeros((m, m))]
    return lie_closure(gens)


def _contains(hol: HolonomyResult, mats: list, tol: float = 1e-8) -> bool:
    if not mats:
        return True
    if hol.dimension == 0:
        return all(np.max(np.abs(mt)) <= tol for mt in mats)
    basis = np.array([b.matrix.ravel() for b in hol.basis])
    basis = basis / np.linalg.norm(basis, axis=1, keepdims=True)
    for mt in mats:
        v = mt.ravel()
        resid = v - basis.T @ (basis @ v)
        if np.linalg.norm(resid) > tol * max(1.0, np.linalg.norm(v)):
            return False
    return True


def flat_holonomy_scenario(
    m: int, k: int, profile: WeightProfile, base: str = "flat", curv: float = 1.0, x=None
) -> FlatHolonomyResult:
    """Holonomy over a flat bundle with the containment checks for the three weight cases."""
    chart = model_chart(base, m, curv)
    space = TotalSpace(chart, trivial_bundle(chart, k), profile)
    x = chart.origin if x is None else chart.check_point(x)
    hol = lie_closure(curvature_generators(space, x))
    base_hol = _base_holonomy(space, x)
    d1, d2 = profile.derivatives(0.0)[1]
    n = m + k

    def embed(mat, lo, hi):
        out = np.zeros((n, n))
        out[lo:hi, lo:hi] = mat
        return out

    required = [embed(b.matrix, 0, m) for b in base_hol.basis]
    if d1 != 0.0:
        case, bound = "i", n * (n - 1) // 2
        ok = hol.dimension == bound
    elif d2 != 0.0:
        case, bound = "ii", base_hol.dimension + k * (k - 1) // 2
        for a, b in combinations(range(k), 2):
            e = np.zeros((k, k))
            e[a, b], e[b, a] = 1.0, -1.0
            required.append(embed(e, m, n))
        ok = hol.dimension >= bound and _contains(hol, required)
    else:
        case, bound = "iii", base_hol.dimension
        ok = hol.dimension >= bound and _contains(hol, required)
        if profile.is_constant():
            ok = ok and hol.dimension == bound
    return FlatHolonomyResult(holonomy=hol, base_dimension=base_hol.dimension, case=case, lower_bound=bound, containment_ok=bool(ok))
