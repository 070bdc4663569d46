"""The Chord algorithm with full recursion tracing, and the independent verifier."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import gmpy2
from gmpy2 import mpq

from .geometry import (
    INF,
    RATIO,
    GeometryError,
    Point,
    Segment,
    Triangle,
    abs_slope,
    chain_key,
    chord_split,
    combined,
    eps_key,
    key_to_value,
    leq,
    lower_envelope,
    on_segment,
    segment_key,
    triangle_area,
    triangle_contains,
)
from .oracle import CombOracle, Instance


class ProtocolError(RuntimeError):
    """The oracle broke its certificate contract (or recursion ran away)."""

    def __init__(self, message: str, node: Optional["RecursionNode"] = None):
        super().__init__(message)
        self.node = node


class InputError(ValueError):
    pass


@dataclass
class RecursionNode:
    """One Comb call of the recursive routine and the triangle it was made on."""

    triangle: Triangle
    query_slope: object
    answer: Point
    depth: int
    children: List["RecursionNode"] = field(default_factory=list)
    split: bool = False
    y_ratio: object = None
    area: object = None
    child_area: object = None

    def walk(self):
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))


@dataclass
class ChordResult:
    selected: List[Point]
    answers: List[Point]
    comb_calls: int
    trace: Optional[RecursionNode]
    metric: str
    epsilon: object
    epsilon_internal: object
    delta: object = 0

    @property
    def chain(self) -> List[Point]:
        """The lower envelope of the selected points (redundant ones dropped)."""
        return lower_envelope(self.selected)

    @property
    def nodes(self) -> List[RecursionNode]:
        return list(self.trace.walk()) if self.trace else []


def internal_epsilon(eps, delta):
    """The error used inside the recursion: ``eps`` itself, or ``sqrt(1+eps) - 1``
    when the oracle is approximate.

    In exact mode the square root is rounded down to a multiple of 2^-64, which
    only makes the stopping rule stricter.
    """
    if delta == 0:
        return eps
    if isinstance(eps, float):
        return math.sqrt(1 + eps) - 1
    scale = 2 ** 64
    root = gmpy2.isqrt(int((1 + eps) * scale * scale))
    return mpq(int(root), scale) - 1


def depth_cap(m: int, eps) -> int:
    return int(8 * (m + math.log2(1 / float(eps)) + 8))


def _dist(p: Point, l: Point, r: Point, metric: str):
    """Comparison key of ``metric_to_segment(p, lr)``, 0 when p is on lr."""
    if p == l or p == r or on_segment(p, Segment(l, r)):
        return 0 * p.x
    return segment_key(p, Segment(l, r), metric)


def _clip_below(t: Triangle, lam, level) -> List[Point]:
    """Vertices of ``t`` intersected with the half-plane ``h_lam >= level``."""
    verts = [t.l, t.r, t.s]
    out = []
    for i, p in enumerate(verts):
        q = verts[(i + 1) % 3]
        hp, hq = combined(p, lam) - level, combined(q, lam) - level
        if hp >= 0:
            out.append(p)
        if (hp >= 0) != (hq >= 0):
            f = hp / (hp - hq)
            out.append(Point(p.x + f * (q.x - p.x), p.y + f * (q.y - p.y)))
    return out


def run_chord(oracle: CombOracle, eps, metric: str, delta=None,
              eps_internal=None) -> ChordResult:
    """Run the Chord algorithm against ``oracle``.

    ``delta`` defaults to the oracle's own approximation factor.  The returned
    ``selected`` points are the union of the ``{l, r}`` sets returned by the
    routine; ``answers`` holds every distinct Comb answer.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    if delta is None:
        delta = oracle.delta
    if delta and metric != RATIO:
        raise InputError("an approximate Comb oracle is only supported with the ratio distance")
    if eps_internal is None:
        eps_internal = internal_epsilon(eps, delta)
    if delta and (1 + eps_internal) * (1 + delta) > 1 + eps + _slack(eps):
        raise InputError("delta too large: need (1 + eps')(1 + delta) <= 1 + eps")
    start_calls = oracle.call_count
    a = oracle.answer(INF)
    b = oracle.answer(0)
    answers = {a, b}
    selected = {a, b}
    c = Point(a.x, b.y)
    root: Optional[RecursionNode] = None
    result = lambda: ChordResult(sorted(selected), sorted(answers),
                                 oracle.call_count - start_calls, root,
                                 metric, eps, eps_internal, delta)
    if a == b or c == a or c == b or triangle_area(Triangle(a, b, c)) == 0:
        return result()

    ekey = eps_key(eps_internal, metric)
    cap = depth_cap(oracle.m, eps)
    # stack of (triangle, depth, parent)
    stack = [(Triangle(a, b, c), 0, None)]
    while stack:
        tri, depth, parent = stack.pop()
        l, r, s = tri
        if depth > cap:
            raise ProtocolError(f"recursion depth exceeded {cap}", parent)
        if leq(_dist(s, l, r, metric), ekey):
            continue
        lam = abs_slope(l, r)
        q = oracle.answer(lam)
        answers.add(q)
        node = RecursionNode(tri, lam, q, depth, area=triangle_area(tri))
        if parent is None:
            root = node
        else:
            parent.children.append(node)
        below = combined(q, lam) < combined(l, lam)
        if delta:
            # Every feasible p has (1 + delta) p on or above the line through q,
            # so the scaled points left in this triangle lie in the band above it.
            if not below or _band_ok(tri, lam, combined(q, lam), ekey, metric):
                continue
            if not triangle_contains(tri, q):
                raise ProtocolError("approximate answer outside the triangle leaves "
                                    "an uncovered region", node)
        else:
            if q in (l, r) or not below or leq(_dist(q, l, r, metric), ekey):
                continue
            if not triangle_contains(tri, q):
                raise ProtocolError(f"answer {q!r} lies outside the triangle {tri!r}", node)
        try:
            sp = chord_split(tri, q)
        except GeometryError as exc:
            raise ProtocolError(str(exc), node) from exc
        node.split = True
        node.y_ratio = sp.y_ratio
        node.child_area = triangle_area(sp.left) + triangle_area(sp.right)
        selected.add(q)
        stack.append((sp.right, depth + 1, node))
        stack.append((sp.left, depth + 1, node))
    return result()


def _slack(eps):
    return 1e-12 if isinstance(eps, float) else 0


def _band_ok(tri: Triangle, lam, level, ekey, metric) -> bool:
    """True when the part of ``tri`` on or above the level line is within the
    error bound of ``lr`` (checked at its vertices; the metrics are quasi-convex)."""
    return all(leq(_dist(p, tri.l, tri.r, metric), ekey)
               for p in _clip_below(tri, lam, level))


# -- verification and statistics ----------------------------------------------


def verify_eps_cp(inst: Instance, S: Sequence[Point], eps, metric: str):
    """Check that ``S`` is an eps-convex Pareto set of ``inst``.

    The points to cover are the vertices of the instance's lower envelope (every
    other feasible point is covered whenever they are).  ``S`` is reduced to its
    own lower envelope first.  Returns ``(ok, worst, witness)``.
    """
    if not S:
        raise InputError("S must be non-empty")
    for p in S:
        if p not in inst.point_set:
            raise InputError(f"{p!r} is not an instance point")
    chain = lower_envelope(S)
    worst, witness = None, None
    for t in inst.envelope:
        k = chain_key(t, chain, metric)
        if worst is None or k > worst:
            worst, witness = k, t
    ok = leq(worst, eps_key(eps, metric))
    return ok, key_to_value(worst, metric), witness


def trace_stats(res: ChordResult) -> Dict:
    nodes = res.nodes
    if not nodes:
        return {"max_depth": -1, "node_count": 0, "lowest_internal_count": 0,
                "per_level_area_max": {}}
    per_level: Dict[int, object] = {}
    lowest = 0
    for n in nodes:
        if n.depth not in per_level or n.area > per_level[n.depth]:
            per_level[n.depth] = n.area
        if n.split and not any(ch.split for ch in n.children):
            lowest += 1
    return {
        "max_depth": max(n.depth for n in nodes),
        "node_count": len(nodes),
        "lowest_internal_count": lowest,
        "per_level_area_max": dict(sorted(per_level.items())),
    }


def is_path(res: ChordResult) -> bool:
    return all(len(n.children) <= 1 for n in res.nodes)


# -- serialization ------------------------------------------------------------


def _s(v) -> str:
    from .formats import format_scalar
    return format_scalar(v)


def node_to_dict(node: RecursionNode) -> Dict:
    tri = node.triangle
    return {
        "depth": node.depth,
        "triangle": {k: [_s(p.x), _s(p.y)] for k, p in zip("lrs", tri)},
        "query_slope": _s(node.query_slope),
        "answer": [_s(node.answer.x), _s(node.answer.y)],
        "split": node.split,
        "y_ratio": None if node.y_ratio is None else _s(node.y_ratio),
        "children": [node_to_dict(ch) for ch in node.children],
    }


def result_to_dict(res: ChordResult) -> Dict:
    return {
        "metric": res.metric,
        "epsilon": _s(res.epsilon),
        "epsilon_internal": _s(res.epsilon_internal),
        "delta": _s(res.delta),
        "comb_calls": res.comb_calls,
        "selected": [[_s(p.x), _s(p.y)] for p in res.selected],
        "answers": [[_s(p.x), _s(p.y)] for p in res.answers],
        "trace": node_to_dict(res.trace) if res.trace else None,
    }


def result_to_json(res: ChordResult) -> str:
    return json.dumps(result_to_dict(res), indent=1)

