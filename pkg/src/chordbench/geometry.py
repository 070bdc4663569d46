"""Planar primitives for convex Pareto curves.

Scalars are either ``gmpy2.mpq`` (exact) or ``float``.  Nothing here mixes the
two: every function just does arithmetic on whatever it is handed, and the
comparison helpers pick an absolute tolerance only for floats.
"""

from __future__ import annotations

import math
from typing import Iterable, List, NamedTuple, Optional, Sequence, Tuple

from gmpy2 import mpq

INF = math.inf

RATIO = "ratio"
HORIZONTAL = "horizontal"
HAUSDORFF = "hausdorff"
METRICS = (RATIO, HORIZONTAL, HAUSDORFF)

_MPQ = type(mpq(0))
_tolerance = 1e-12


class GeometryError(ValueError):
    """Raised on domain errors (non-positive coordinates, horizontal lines...)."""


class ContractError(GeometryError):
    """A precondition of a construction was violated."""


def set_tolerance(tol: float) -> None:
    """Set the absolute tolerance used for float comparisons."""
    global _tolerance
    if tol < 0:
        raise ValueError("tolerance must be non-negative")
    _tolerance = float(tol)


def get_tolerance() -> float:
    return _tolerance


def is_exact(v) -> bool:
    return isinstance(v, (int, _MPQ))


def tol(*values) -> float:
    """Tolerance applicable to a comparison between ``values``."""
    for v in values:
        if isinstance(v, float) and not math.isinf(v):
            return _tolerance
    return 0


def leq(a, b) -> bool:
    return a <= b + tol(a, b)


def lt(a, b) -> bool:
    return a < b - tol(a, b)


def eq(a, b) -> bool:
    t = tol(a, b)
    if t == 0:
        return a == b
    return abs(a - b) <= t


def to_scalar(value, mode: str):
    """Coerce ``value`` (int, str "p/q", float, mpq, Fraction) into ``mode``."""
    if mode == "rational":
        if isinstance(value, float):
            return mpq(value)
        if hasattr(value, "numerator") and not isinstance(value, _MPQ):
            return mpq(value.numerator, value.denominator)
        return mpq(value)
    if mode == "float":
        if isinstance(value, str) and "/" in value:
            return float(mpq(value))
        return float(value)
    raise ValueError(f"unknown scalar mode {mode!r}")


class Point(NamedTuple):
    x: object
    y: object

    def __repr__(self) -> str:
        return f"({self.x}, {self.y})"


class Segment(NamedTuple):
    p: Point
    q: Point


class Triangle(NamedTuple):
    """Sandwich triangle: feasible vertices ``l``, ``r`` and lower vertex ``s``."""

    l: Point
    r: Point
    s: Point


def check_positive(p: Point) -> None:
    if not (p.x > 0 and p.y > 0):
        raise GeometryError(f"point {p!r} is not strictly positive")


def ratio_distance(p: Point, q: Point):
    """max{x(q)/x(p) - 1, y(q)/y(p) - 1, 0}: how much ``p`` must be scaled to be covered by ``q``."""
    check_positive(p)
    check_positive(q)
    d = max(q.x / p.x - 1, q.y / p.y - 1)
    return d if d > 0 else d * 0


def horizontal_distance(p: Point, q: Point):
    d = q.x - p.x
    return d if d > 0 else d * 0


def abs_slope(p: Point, q: Point):
    """Absolute slope of the line through ``p`` and ``q`` (``INF`` if vertical)."""
    dx = q.x - p.x
    if dx == 0:
        return INF
    return abs((q.y - p.y) / dx)


def combined(p: Point, lam):
    """The scalarized objective y + lam*x; for lam = +inf only x matters."""
    if lam == INF:
        return p.x
    return p.y + lam * p.x


def cross(o: Point, a: Point, b: Point):
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)


def triangle_area(t: Triangle):
    return abs(cross(t.s, t.l, t.r)) / 2


def on_segment(p: Point, seg: Segment) -> bool:
    a, b = seg
    if not eq(cross(a, b, p), 0 * p.x):
        return False
    return (min(a.x, b.x) - tol(p.x) <= p.x <= max(a.x, b.x) + tol(p.x)
            and min(a.y, b.y) - tol(p.y) <= p.y <= max(a.y, b.y) + tol(p.y))


# -- point-to-segment distances -----------------------------------------------
#
# Hausdorff distances are handled through their squares so that exact mode
# never needs a square root; ``_key`` values are what gets compared and
# ``key_to_value`` turns a key back into a distance.


def _ratio_to_segment(p: Point, seg: Segment):
    check_positive(p)
    a, b = seg
    dx, dy = b.x - a.x, b.y - a.y
    gx0, gx1 = (a.x - p.x) / p.x, dx / p.x
    gy0, gy1 = (a.y - p.y) / p.y, dy / p.y
    # f(t) = max(gx0 + gx1 t, gy0 + gy1 t, 0) is convex piecewise linear on
    # [0, 1]; its minimum sits at an endpoint or at a breakpoint.
    ts = [0 * dx, 0 * dx + 1]
    if gx1 != gy1:
        ts.append((gy0 - gx0) / (gx1 - gy1))
    if gx1 != 0:
        ts.append(-gx0 / gx1)
    if gy1 != 0:
        ts.append(-gy0 / gy1)
    best = None
    for t in ts:
        if t < 0 or t > 1:
            continue
        v = max(gx0 + gx1 * t, gy0 + gy1 * t)
        if v < 0:
            v = v * 0
        if best is None or v < best:
            best = v
    return best


def _horizontal_to_line(p: Point, seg: Segment):
    a, b = seg
    dy = b.y - a.y
    if dy == 0:
        raise GeometryError("horizontal distance to a horizontal line is undefined")
    x = a.x + (p.y - a.y) * (b.x - a.x) / dy
    d = x - p.x
    return d if d > 0 else d * 0


def _dist2_to_segment(p: Point, seg: Segment):
    a, b = seg
    dx, dy = b.x - a.x, b.y - a.y
    wx, wy = p.x - a.x, p.y - a.y
    den = dx * dx + dy * dy
    if den == 0:
        return wx * wx + wy * wy
    t = (wx * dx + wy * dy) / den
    if t <= 0:
        return wx * wx + wy * wy
    if t >= 1:
        ex, ey = p.x - b.x, p.y - b.y
        return ex * ex + ey * ey
    ex, ey = wx - t * dx, wy - t * dy
    return ex * ex + ey * ey


def segment_key(p: Point, seg: Segment, metric: str):
    if metric == RATIO:
        return _ratio_to_segment(p, seg)
    if metric == HORIZONTAL:
        return _horizontal_to_line(p, seg)
    if metric == HAUSDORFF:
        return _dist2_to_segment(p, seg)
    raise ValueError(f"unknown metric {metric!r}")


def key_to_value(key, metric: str):
    if metric == HAUSDORFF and key != INF:
        return math.sqrt(key)
    return key


def eps_key(eps, metric: str):
    return eps * eps if metric == HAUSDORFF else eps


def metric_to_segment(p: Point, seg: Segment, metric: str):
    """Distance from ``p`` to ``seg`` under ``metric``.

    ratio: inf over z on the segment of ``ratio_distance(p, z)``; the origin
    ray minimizer is clamped into the segment.  horizontal: x-gap to the
    y-projection of ``p`` on the *line* through the segment, floored at 0.
    hausdorff: Euclidean distance to the segment (returned as a float).
    """
    return key_to_value(segment_key(p, seg, metric), metric)


def within(p: Point, seg: Segment, metric: str, eps) -> bool:
    """``metric_to_segment(p, seg) <= eps`` decided without square roots."""
    if p == seg.p or p == seg.q:
        return True
    if seg.p == seg.q:
        return leq(chain_key(p, [seg.p], metric), eps_key(eps, metric))
    return leq(segment_key(p, seg, metric), eps_key(eps, metric))


# -- chains -------------------------------------------------------------------


def is_chain(vertices: Sequence[Point]) -> bool:
    """Strictly monotone (x up, y down) and strictly convex."""
    for a, b in zip(vertices, vertices[1:]):
        if not (a.x < b.x and a.y > b.y):
            return False
    for a, b, c in zip(vertices, vertices[1:], vertices[2:]):
        if not cross(a, b, c) > 0:
            return False
    return True


def chain_key(p: Point, chain: Sequence[Point], metric: str):
    """Comparison key for the distance of ``p`` to the polygonal ``chain``.

    Horizontal distance is measured along the y-projection onto the chain; a
    point whose y lies outside the chain's y-range is at infinite distance.
    """
    if metric == HORIZONTAL:
        if p.y > chain[0].y or p.y < chain[-1].y:
            return INF
        best = INF
        if len(chain) == 1:
            return horizontal_distance(p, chain[0])
        for a, b in zip(chain, chain[1:]):
            if a.y >= p.y >= b.y:
                if a.y == b.y:
                    d = horizontal_distance(p, a)
                else:
                    d = _horizontal_to_line(p, Segment(a, b))
                if d < best:
                    best = d
        return best
    if len(chain) == 1:
        v = chain[0]
        if metric == RATIO:
            return ratio_distance(p, v)
        return (p.x - v.x) ** 2 + (p.y - v.y) ** 2
    best = INF
    for a, b in zip(chain, chain[1:]):
        d = segment_key(p, Segment(a, b), metric)
        if d < best:
            best = d
            if d == 0:
                break
    return best


def coverage_error(points: Iterable[Point], chain: Sequence[Point], metric: str):
    """Worst distance from ``points`` to ``chain`` and the first point attaining it.

    Returns ``(0, None)`` for an empty point sequence.
    """
    if not chain:
        raise GeometryError("chain must be non-empty")
    worst, witness = None, None
    for p in points:
        k = chain_key(p, chain, metric)
        if worst is None or k > worst:
            worst, witness = k, p
    if worst is None:
        return 0, None
    return key_to_value(worst, metric), witness


def pareto_points(points: Iterable[Point]) -> List[Point]:
    """Undominated points, sorted by increasing x."""
    out: List[Point] = []
    for p in sorted(set(points)):
        if not out or p.y < out[-1].y:
            out.append(p)
    return out


def lower_envelope(points: Iterable[Point]) -> List[Point]:
    """Vertices of the lower envelope (the convex Pareto set), left to right."""
    hull: List[Point] = []
    for p in pareto_points(points):
        while len(hull) >= 2 and cross(hull[-2], hull[-1], p) <= 0:
            hull.pop()
        hull.append(p)
    return hull


# -- chord subdivision --------------------------------------------------------


class Split(NamedTuple):
    left: Triangle
    right: Triangle
    y_ratio: object  # (s_l s)/(l s), the similarity ratio of the middle triangle
    left_degenerate: bool
    right_degenerate: bool


def line_point(a: Point, b: Point, t) -> Point:
    return Point(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y))


def chord_split(t: Triangle, q: Point) -> Split:
    """Cut ``t`` along the line through ``q`` parallel to ``lr``.

    Returns the sub-triangles (l, q, s_l) and (q, r, s_r) where s_l, s_r are
    the intersections of that line with ls and rs.
    """
    l, r, s = t
    lam = abs_slope(l, r)
    if lam == INF:
        raise ContractError("chord lr is vertical")
    h_line = combined(l, lam)
    hq = combined(q, lam)
    hs = combined(s, lam)
    if not hq < h_line:
        raise ContractError(f"{q!r} is not strictly below the chord {l!r}-{r!r}")
    if hq < hs:
        raise ContractError(f"{q!r} lies below the sandwich vertex {s!r}")
    frac = (h_line - hq) / (h_line - hs)
    s_l = line_point(l, s, frac)
    s_r = line_point(r, s, frac)
    left = Triangle(l, q, s_l)
    right = Triangle(q, r, s_r)
    return Split(left, right, 1 - frac,
                 triangle_area(left) == 0 or q == l,
                 triangle_area(right) == 0 or q == r)


def triangle_contains(t: Triangle, p: Point) -> bool:
    """Closed containment test, orientation independent."""
    l, r, s = t
    d1, d2, d3 = cross(l, r, p), cross(r, s, p), cross(s, l, p)
    z = 0 * p.x
    e = tol(p.x)
    has_neg = d1 < z - e or d2 < z - e or d3 < z - e
    has_pos = d1 > z + e or d2 > z + e or d3 > z + e
    return not (has_neg and has_pos)


def y_projection(p: Point, a: Point, b: Point) -> Optional[Point]:
    """Point of line ab at height y(p); None for a horizontal line."""
    if a.y == b.y:
        return None
    t = (p.y - a.y) / (b.y - a.y)
    return line_point(a, b, t)


def as_points(pairs: Iterable[Tuple[object, object]]) -> List[Point]:
    return [Point(x, y) for x, y in pairs]
