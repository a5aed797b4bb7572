"""JSON scenario files: base chart, bundle, weights and a sampling seed.

Schema version 1. Unknown keys are rejected at every level.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any, Mapping, Union

from .base_geometry import (
    expression_chart,
    lambda2_bundle,
    model_chart,
    tangent_bundle,
    trivial_bundle,
)
from .errors import ParameterError
from .total_space import TotalSpace
from .weights import builtin_profile

__all__ = ["Scenario", "load_scenario", "parse_scenario", "preset", "preset_names"]

SCHEMA_VERSION = 1
PRESETS = ("bs_s4", "bs_h4_plus", "flat_m2k2", "sasaki_flat", "fiber_k3")


@dataclass(frozen=True)
class Scenario:
    space: TotalSpace
    seed: int
    raw: Mapping[str, Any]
    name: str = ""


def _keys(obj: Any, where: str, required: set, optional: set = frozenset()) -> dict:
    if not isinstance(obj, dict):
        raise ParameterError(f"{where} must be a JSON object")
    unknown = set(obj) - required - set(optional)
    if unknown:
        raise ParameterError(f"unknown field(s) in {where}: {sorted(unknown)}")
    missing = required - set(obj)
    if missing:
        raise ParameterError(f"missing field(s) in {where}: {sorted(missing)}")
    return obj


def _number(v: Any, where: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ParameterError(f"{where} must be a number")
    return float(v)


def _base(spec: Any):
    spec = _keys(spec, "base", {"kind", "dim"}, {"curv", "metric", "lower", "upper"})
    kind = spec["kind"]
    dim = spec["dim"]
    if isinstance(dim, bool) or not isinstance(dim, int) or dim < 1:
        raise ParameterError("base.dim must be a positive integer")
    if kind == "custom":
        _keys(spec, "base", {"kind", "dim", "metric", "lower", "upper"})
        metric = spec["metric"]
        if not (isinstance(metric, list) and len(metric) == dim and all(isinstance(r, list) and len(r) == dim for r in metric)):
            raise ParameterError("base.metric must be a dim x dim array of expression strings")
        lower = [_number(v, "base.lower") for v in spec["lower"]]
        upper = [_number(v, "base.upper") for v in spec["upper"]]
        if len(lower) != dim or len(upper) != dim:
            raise ParameterError("base.lower/upper must have length dim")
        return expression_chart([[str(e) for e in row] for row in metric], lower, upper)
    for extra in ("metric", "lower", "upper"):
        if extra in spec:
            raise ParameterError(f"base.{extra} is only valid for custom charts")
    curv = _number(spec.get("curv", 1.0), "base.curv")
    return model_chart(kind, dim, curv)


def _bundle(spec: Any, chart):
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ParameterError("bundle must be an object with a kind")
    kind = spec["kind"]
    if kind == "trivial":
        _keys(spec, "bundle", {"kind", "rank"})
        rank = spec["rank"]
        if isinstance(rank, bool) or not isinstance(rank, int):
            raise ParameterError("bundle.rank must be an integer")
        return trivial_bundle(chart, rank)
    if kind == "tangent":
        _keys(spec, "bundle", {"kind"})
        return tangent_bundle(chart)
    if kind == "lambda2":
        _keys(spec, "bundle", {"kind", "sign"})
        return lambda2_bundle(chart, spec["sign"])
    raise ParameterError(f"unknown bundle kind {kind!r}")


def _weights(spec: Any):
    spec = _keys(spec, "weights", {"kind"}, {"params"})
    params = spec.get("params", {}) or {}
    if not isinstance(params, dict):
        raise ParameterError("weights.params must be an object")
    params = dict(params)
    # JSON has no infinity; null or a missing key means unbounded
    if "r_max" in params and params["r_max"] is None:
        params["r_max"] = math.inf
    return builtin_profile(spec["kind"], params)


def parse_scenario(data: Mapping[str, Any], name: str = "") -> Scenario:
    data = _keys(dict(data), "scenario", {"schema", "base", "bundle", "weights"}, {"seed", "name", "description"})
    if data["schema"] != SCHEMA_VERSION:
        raise ParameterError(f"unsupported scenario schema {data['schema']!r} (expected {SCHEMA_VERSION})")
    seed = data.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ParameterError("seed must be an integer")
    chart = _base(data["base"])
    bundle = _bundle(data["bundle"], chart)
    weights = _weights(data["weights"])
    return Scenario(space=TotalSpace(chart, bundle, weights), seed=seed, raw=data, name=str(data.get("name", name)))


def preset_names() -> tuple:
    return PRESETS


def _preset_text(name: str) -> str:
    stem = name[:-5] if name.endswith(".json") else name
    if stem not in PRESETS:
        raise ParameterError(f"unknown preset {name!r}")
    return resources.files("vbgeo.presets").joinpath(f"{stem}.json").read_text(encoding="utf-8")


def preset(name: str) -> Scenario:
    stem = name[:-5] if name.endswith(".json") else name
    return parse_scenario(json.loads(_preset_text(stem)), name=stem)


def load_scenario(source: Union[str, Path, Mapping[str, Any]]) -> Scenario:
    """Scenario from a mapping, a file path, or a bundled preset name."""
    if isinstance(source, Mapping):
        return parse_scenario(source)
    path = Path(source)
    if not path.exists():
        stem = path.name[:-5] if path.name.endswith(".json") else path.name
        if stem in PRESETS and path.parent == Path("."):
            return preset(stem)
        raise ParameterError(f"scenario file not found: {source}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParameterError(f"invalid JSON in {source}: {exc}") from exc
    return parse_scenario(data, name=path.stem)
