"""JSON encodings of instances and point sets.

Rationals are written as ``"numerator/denominator"`` strings and floats as
their shortest round-trip ``repr``, so a load/save cycle is bit-exact.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Dict, List, Union

from gmpy2 import mpq

from .geometry import INF, Point
from .oracle import Instance, InstanceError

FORMAT = "chord-bench/1"
_MPQ = type(mpq(0))


def format_scalar(v) -> str:
    if isinstance(v, _MPQ):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, float):
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    if isinstance(v, bool):
        return str(v).lower()
    return str(v)


def parse_scalar(s, mode: str = "rational"):
    if isinstance(s, (int, float)) and not isinstance(s, bool):
        return mpq(s) if mode == "rational" else float(s)
    s = str(s).strip()
    if s in ("inf", "+inf"):
        return INF
    if mode == "float":
        return float(mpq(s)) if "/" in s else float(s)
    return mpq(s)


def _meta_out(v):
    if isinstance(v, (_MPQ, float)):
        return format_scalar(v)
    if isinstance(v, dict):
        return {k: _meta_out(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_meta_out(x) for x in v]
    return v


def instance_to_dict(inst: Instance) -> Dict:
    return {
        "format": FORMAT,
        "mode": inst.mode,
        "m": inst.m,
        "points": [[format_scalar(p.x), format_scalar(p.y)] for p in inst.points],
        "meta": _meta_out(inst.meta),
    }


def instance_from_dict(d: Dict) -> Instance:
    if d.get("format") != FORMAT:
        raise InstanceError(f"unsupported instance format {d.get('format')!r}")
    mode = d.get("mode", "rational")
    pts = tuple(Point(parse_scalar(x, mode), parse_scalar(y, mode)) for x, y in d["points"])
    return Instance(pts, int(d["m"]), dict(d.get("meta", {})), mode)


def dumps_instance(inst: Instance) -> str:
    return json.dumps(instance_to_dict(inst), indent=1)


def loads_instance(text: str) -> Instance:
    return instance_from_dict(json.loads(text))


def save_instance(inst: Instance, path: Union[str, Path]) -> None:
    Path(path).write_text(dumps_instance(inst) + "\n")


def load_instance(path: Union[str, Path]) -> Instance:
    return loads_instance(Path(path).read_text())


def points_to_json(points: List[Point]) -> str:
    return json.dumps({"points": [[format_scalar(p.x), format_scalar(p.y)] for p in points]})


def load_point_set(path: Union[str, Path], mode: str = "rational") -> List[Point]:
    """Points from ``{"points": ...}``, a Chord result (``selected``) or a bare list."""
    d = json.loads(Path(path).read_text())
    if isinstance(d, dict):
        d = d.get("points", d.get("selected", d.get("witness")))
    if not isinstance(d, list):
        raise InstanceError("no point list found")
    return [Point(parse_scalar(x, mode), parse_scalar(y, mode)) for x, y in d]
