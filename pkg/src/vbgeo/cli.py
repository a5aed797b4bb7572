"""Command-line front end: ``vbgeo <subcommand> --scenario FILE ...``.

Results go to stdout as JSON (CSV for geodesic trajectories) or to ``--out``.
Exit codes: 0 success, 1 failed check, 2 bad input, 3 point outside the domain.
"""
from __future__ import annotations

import argparse
import io
import logging
import math
import os
import re
import sys
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import curvature as cv
from . import geodesics as gd
from . import hermitian as hm
from . import holonomy as hl
from .checks import SUITES, run_suite
from .errors import ConvergenceError, DomainError, ParameterError
from .scenario import Scenario, load_scenario
from .weights import coefficients

log = logging.getLogger("vbgeo")

RADIAL_PROFILES = {"sinh": math.sinh, "identity": lambda t: t}


# ---------------------------------------------------------------------------
# JSON output with 17 significant digits


def _scalar(v: Any) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return '"nan"'
    if math.isinf(v):
        return '"inf"' if v > 0 else '"-inf"'
    return format(v, ".17g")


def _encode(obj: Any, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        return "null"
    if isinstance(obj, str):
        return '"' + obj.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{pad}{_encode(str(k), indent, 0)}: {_encode(v, indent, level + 1)}' for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(_encode(v, indent, 0) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _encode(v, indent, level + 1) for v in obj) + "\n" + end + "]"
    return _scalar(obj)


def to_json(obj: Any, indent: int = 2) -> str:
    return _encode(obj, indent, 0) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
        log.info("wrote %s", out)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# argument parsing helpers


def _floats(text: str, where: str) -> np.ndarray:
    try:
        return np.array([float(t) for t in text.split(",") if t.strip()], dtype=float)
    except ValueError as exc:
        raise ParameterError(f"could not parse numbers in {where}: {text!r}") from exc


def parse_keyed(text: str, keys: Sequence[str]) -> dict:
    """Parse ``x=0.1,0.2,y=0.3`` style strings into arrays per key."""
    pattern = "|".join(sorted(map(re.escape, keys), key=len, reverse=True))
    parts = re.split(rf",(?=(?:{pattern})=)", text.strip())
    out = {}
    for part in parts:
        key, sep, body = part.partition("=")
        key = key.strip()
        if not sep or key not in keys:
            raise ParameterError(f"expected one of {list(keys)} followed by '=', got {part!r}")
        if key in out:
            raise ParameterError(f"{key} given twice")
        out[key] = _floats(body, key)
    return out


def _point(sc: Scenario, text: str | None):
    space = sc.space
    if text is None:
        return space.point(space.chart.origin)
    vals = parse_keyed(text, ("x", "y"))
    if "x" not in vals:
        raise ParameterError("point needs an x= block")
    return space.point(vals["x"], vals.get("y"))


def _base_x(sc: Scenario, text: str | None) -> np.ndarray:
    chart = sc.space.chart
    x = chart.origin if text is None else _floats(text, "--x")
    return chart.check_point(x)


# ---------------------------------------------------------------------------
# subcommands


def cmd_coeffs(sc: Scenario, args) -> dict:
    w = sc.space.weights
    r = float(args.r)
    co = coefficients(w, r)
    p1, p2 = w.values(r)
    return {"r": r, "phi1": p1, "phi2": p2, **co.as_dict()}


def cmd_metric(sc: Scenario, args) -> dict:
    p = _point(sc, args.point)
    met = sc.space.assemble_metric(p)
    return {
        "x": p.x,
        "y": p.y,
        "r": p.r,
        "metric": met.matrix,
        "split_metric": met.split_matrix,
        "frame_change": met.frame_change,
        "positive_definite": met.is_positive_definite(),
    }


def cmd_geodesic(sc: Scenario, args) -> str:
    space = sc.space
    vals = parse_keyed(args.init, ("x", "y", "dx", "z"))
    if "x" not in vals:
        raise ParameterError("--init needs an x= block")
    init = gd.GeodesicState(
        vals["x"],
        vals.get("y", np.zeros(space.k)),
        vals.get("dx", np.zeros(space.m)),
        vals.get("z", np.zeros(space.k)),
    )
    traj = gd.integrate(space, init, args.t_end, args.step)
    if traj.status != "ok":
        log.warning("integration stopped early at t=%s (%s)", traj.times[-1], traj.status)
    log.info("speed drift %.3e over %d steps", traj.speed_drift, len(traj.times) - 1)
    buf = io.StringIO()
    gd.write_csv(traj, buf)
    return buf.getvalue()


def cmd_curvature(sc: Scenario, args) -> dict:
    space = sc.space
    if args.at == "zero-section":
        x = _base_x(sc, args.x)
        rep = cv.ricci_scalar_zero_section(space, x)
        return {"at": "zero-section", "x": x, "method": "closed-form", "riemann": rep.riemann, "ricci": rep.ricci, "scalar": rep.scalar}
    p = _point(sc, args.point)
    if space.bundle.is_flat:
        return {"at": "point", "x": p.x, "y": p.y, "method": "closed-form", "riemann": cv.flat_bundle_tensor(space, p)}
    log.info("non-flat bundle away from the zero section: using the finite-difference oracle")
    return {"at": "point", "x": p.x, "y": p.y, "method": "finite-difference", "riemann": cv.fd_riemann_oracle(space, p)}


def cmd_ricci(sc: Scenario, args) -> dict:
    x = _base_x(sc, args.x)
    rep = cv.ricci_scalar_zero_section(sc.space, x)
    return {
        "x": x,
        "ricci": rep.ricci,
        "ricci_max_abs": float(np.max(np.abs(rep.ricci))),
        "scalar": rep.scalar,
        "einstein_lambda": rep.einstein_lambda,
    }


def _holonomy_dict(hol: hl.HolonomyResult) -> dict:
    return {
        "dimension": hol.dimension,
        "classification": hol.classification,
        "closure_rounds": hol.closure_rounds,
        "singular_value_margins": {
            "min_retained": hol.min_retained,
            "max_discarded": hol.max_discarded,
            "ratio": hol.margin,
        },
    }


def cmd_holonomy(sc: Scenario, args) -> dict:
    space = sc.space
    x = _base_x(sc, args.x)
    if args.report_subspaces:
        rep = hl.g2_report(space, x)
        out = _holonomy_dict(rep.holonomy)
        out["subspace_dims"] = list(rep.subspace_dims)
        out["family_ranks"] = list(rep.family_ranks)
        return out
    return _holonomy_dict(hl.lie_closure(hl.curvature_generators(space, x)))


def cmd_fiber(sc: Scenario, args) -> dict:
    space = sc.space
    y = np.zeros(space.k) if args.y is None else _floats(args.y, "--y")
    if y.shape != (space.k,):
        raise ParameterError(f"--y needs {space.k} components")
    fc = cv.fiber_curvatures(space.weights, space.k, y)
    return {"y": y, "sectional": fc.sectional, "ricci": fc.ricci, "scalar": fc.scalar}


def cmd_conformal(sc: Scenario, args) -> dict:
    p = _point(sc, args.point)
    gap = sc.space.conformal_check(p, RADIAL_PROFILES[args.f])
    return {"x": p.x, "y": p.y, "r": p.r, "f": args.f, "max_abs_gap": gap}


def cmd_hermitian(sc: Scenario, args) -> dict:
    space = sc.space
    p = _point(sc, args.point)
    st = hm.sasaki_structure(space, p)
    out = {
        "x": p.x,
        "y": p.y,
        "psi": st.psi,
        "psibar": st.psibar,
        "J": st.J,
        "omega": hm.omega_coordinates(space, p),
    }
    if args.check == "domega":
        norm = hm.d_omega_norm(space, p)
        out["d_omega_norm"] = norm
        out["symplectic"] = norm < 1e-6
    return out


def cmd_check(args) -> tuple[dict, int]:
    results = run_suite(args.suite, args.seed)
    failed = [r.name for r in results if not r.passed]
    report = {
        "suite": args.suite,
        "seed": args.seed,
        "passed": not failed,
        "n_cases": len(results),
        "failed": failed,
        "cases": [r.as_dict() for r in results],
    }
    return report, (1 if failed else 0)


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vbgeo", description="Spherically symmetric metrics on vector bundle total spaces")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text, scenario=True):
        sp = sub.add_parser(name, help=help_text)
        if scenario:
            sp.add_argument("--scenario", required=True, help="scenario JSON file or bundled preset name")
        sp.add_argument("--out", help="write output here instead of stdout")
        return sp

    sp = add("coeffs", "connection coefficients a, b, c1, c2 at a radius")
    sp.add_argument("--r", type=float, default=0.0)

    sp = add("metric", "coordinate and split metric at a point")
    sp.add_argument("--point", help="e.g. x=0.1,0.2,y=0.3,0.4")

    sp = add("geodesic", "integrate a geodesic, CSV output")
    sp.add_argument("--init", required=True, help="x=...,y=...,dx=...,z=... (z is the split-frame vertical velocity)")
    sp.add_argument("--t-end", type=float, default=1.0)
    sp.add_argument("--step", type=float, default=1e-3)

    sp = add("curvature", "Riemann tensor in the split frame")
    sp.add_argument("--at", choices=("zero-section", "point"), default="zero-section")
    sp.add_argument("--x", help="base point for --at zero-section")
    sp.add_argument("--point", help="point for --at point")

    sp = add("ricci", "Ricci tensor and scalar curvature on the zero section")
    sp.add_argument("--x")

    sp = add("holonomy", "Lie closure of the curvature operators at the zero section")
    sp.add_argument("--x")
    sp.add_argument("--report-subspaces", action="store_true", help="also report the generator subspaces of a lambda2 bundle")

    sp = add("fiber", "curvature of the weighted fibre metric")
    sp.add_argument("--y")

    sp = add("conformal", "gap between the Bergery metric and the rescaled Musso-Tricerri metric")
    sp.add_argument("--point")
    sp.add_argument("--f", choices=sorted(RADIAL_PROFILES), default="sinh")

    sp = add("hermitian", "Sasaki almost complex structure and its 2-form")
    sp.add_argument("--point")
    sp.add_argument("--check", choices=("domega",))

    sp = add("check", "run the invariant suites", scenario=False)
    sp.add_argument("--suite", choices=("all", *SUITES), default="all")
    sp.add_argument("--seed", type=int, default=0)
    return parser


HANDLERS = {
    "coeffs": cmd_coeffs,
    "metric": cmd_metric,
    "geodesic": cmd_geodesic,
    "curvature": cmd_curvature,
    "ricci": cmd_ricci,
    "holonomy": cmd_holonomy,
    "fiber": cmd_fiber,
    "conformal": cmd_conformal,
    "hermitian": cmd_hermitian,
}


def _configure_logging() -> None:
    level = os.environ.get("VBGEO_LOG", "error").upper()
    if level not in ("ERROR", "INFO", "DEBUG", "WARNING"):
        level = "ERROR"
    logging.basicConfig(level=getattr(logging, level), stream=sys.stderr, format="vbgeo %(levelname)s: %(message)s")


def main(argv: Sequence[str] | None = None) -> int:
    _configure_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "check":
            report, code = cmd_check(args)
            _emit(to_json(report), args.out)
            return code
        sc = load_scenario(args.scenario)
        result = HANDLERS[args.command](sc, args)
        _emit(result if isinstance(result, str) else to_json(result), args.out)
        return 0
    except DomainError as exc:
        print(f"vbgeo: domain error: {exc}", file=sys.stderr)
        return 3
    except ParameterError as exc:
        print(f"vbgeo: {exc}", file=sys.stderr)
        return 2
    except ConvergenceError as exc:
        print(f"vbgeo: numerical failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
