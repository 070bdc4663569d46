"""Comb oracles: exact, approximate, and the two adversarial ones.

An oracle answers ``answer(lam)`` with a point minimizing ``y + lam * x``
(``lam = INF`` means "minimize x").  Every implementation counts its calls and
keeps a log of ``(lam, point)`` pairs so traces can be replayed.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from gmpy2 import mpq

from .geometry import (
    INF,
    GeometryError,
    Point,
    abs_slope,
    combined,
    get_tolerance,
    lower_envelope,
    pareto_points,
)

LEFTMOST = "leftmost"
RIGHTMOST = "rightmost"
TIE_BREAKS = (LEFTMOST, RIGHTMOST)

BEST, WORST, RANDOM = "best", "worst", "random"
POLICIES = (BEST, WORST, RANDOM)


class InstanceError(ValueError):
    pass


class StateError(RuntimeError):
    """Operation not allowed in the oracle's current state."""


@dataclass(frozen=True, eq=False)
class Instance:
    """A finite feasible point set in ``[2^-m, 2^m]^2`` plus its metadata."""

    points: Tuple[Point, ...]
    m: int
    meta: Dict = field(default_factory=dict)
    mode: str = "rational"

    def __post_init__(self):
        if not self.points:
            raise InstanceError("instance must contain at least one point")
        if self.mode not in ("rational", "float"):
            raise InstanceError(f"unknown mode {self.mode!r}")
        pts = tuple(sorted(Point(*p) for p in self.points))
        object.__setattr__(self, "points", pts)
        lo = mpq(1, 2 ** self.m)
        hi = mpq(2 ** self.m)
        if self.mode == "float":
            lo, hi = float(lo), float(hi)
            bad = not (pts[0].x >= lo and pts[-1].x <= hi)
            if not bad:
                arr = self.arrays[1]
                bad = not (arr.min() >= lo and arr.max() <= hi)
        else:
            bad = any(not (lo <= p.x <= hi and lo <= p.y <= hi) for p in pts)
            if not bad and any(not isinstance(p.x, type(lo)) or not isinstance(p.y, type(lo))
                               for p in pts):
                raise InstanceError("rational instances need mpq coordinates")
        if bad:
            raise InstanceError(f"points must lie in [2^-{self.m}, 2^{self.m}]^2")

    @classmethod
    def from_arrays(cls, xs: np.ndarray, ys: np.ndarray, m: int, meta: Dict) -> "Instance":
        """Float instance from coordinate arrays, skipping the per-point Python sort."""
        if len(xs) == 0:
            raise InstanceError("instance must contain at least one point")
        order = np.lexsort((ys, xs))
        xs, ys = np.ascontiguousarray(xs[order]), np.ascontiguousarray(ys[order])
        lo, hi = 2.0 ** -m, 2.0 ** m
        if min(xs.min(), ys.min()) < lo or max(xs.max(), ys.max()) > hi:
            raise InstanceError(f"points must lie in [2^-{m}, 2^{m}]^2")
        self = object.__new__(cls)
        for k, v in (("points", tuple(map(Point, xs.tolist(), ys.tolist()))), ("m", m),
                     ("meta", meta), ("mode", "float")):
            object.__setattr__(self, k, v)
        self.__dict__["arrays"] = (xs, ys)
        return self

    def __len__(self) -> int:
        return len(self.points)

    @cached_property
    def point_set(self) -> frozenset:
        return frozenset(self.points)

    @cached_property
    def arrays(self) -> Tuple[np.ndarray, np.ndarray]:
        xs = np.array([float(p.x) for p in self.points])
        ys = np.array([float(p.y) for p in self.points])
        return xs, ys

    @cached_property
    def pareto(self) -> List[Point]:
        if self.mode == "float" and len(self.points) > 64:
            xs, ys = self.arrays  # already sorted by (x, y)
            prev = np.minimum.accumulate(np.concatenate(([np.inf], ys[:-1])))
            idx = np.nonzero(ys < prev)[0]
            return [self.points[i] for i in idx]
        return pareto_points(self.points)

    @cached_property
    def envelope(self) -> List[Point]:
        return lower_envelope(self.pareto)

    def with_meta(self, **extra) -> "Instance":
        return Instance(self.points, self.m, {**self.meta, **extra}, self.mode)


def min_bits(points: Sequence[Point]) -> int:
    """Smallest m with every coordinate in [2^-m, 2^m]."""
    m = 1
    for p in points:
        for v in (p.x, p.y):
            while not (mpq(1, 2 ** m) <= v <= 2 ** m):
                m += 1
    return m


# -- exact and approximate Comb -----------------------------------------------


def _tie_key(p: Point, tb: str):
    # Traversal order along a tie set is (x ascending, y descending): the
    # upper-left end first.  This is the only order that is "left to right"
    # for every slope including the two extremes.
    if tb == LEFTMOST:
        return (p.x, -p.y)
    if tb == RIGHTMOST:
        return (-p.x, p.y)
    raise ValueError(f"unknown tie-break {tb!r}")


def _h_values(inst: Instance, lam) -> np.ndarray:
    xs, ys = inst.arrays
    if lam == INF:
        return xs
    return ys + float(lam) * xs


def _float_ties(inst: Instance, lam, bound: float, tb: str, upper: bool = False) -> Point:
    """Float-mode pick among points with h within tolerance of ``bound``."""
    h = _h_values(inst, lam)
    eps = get_tolerance()
    mask = h >= bound - eps if upper else h <= bound + eps
    idx = np.nonzero(mask)[0]
    xs, ys = inst.arrays
    # points are sorted by (x, y); pick the extreme in the tie order
    if tb == LEFTMOST:
        order = np.lexsort((-ys[idx], xs[idx]))
    else:
        order = np.lexsort((ys[idx], -xs[idx]))
    return inst.points[idx[order[0]]]


def comb_exact(inst: Instance, lam, tb: str = LEFTMOST) -> Point:
    """A minimizer of ``y + lam * x`` over ``inst``; ties broken by ``tb``."""
    if not (lam >= 0):
        raise GeometryError(f"slope {lam!r} outside [0, +inf]")
    if inst.mode == "float" and len(inst.points) > 64:
        h = _h_values(inst, lam)
        return _float_ties(inst, lam, float(h.min()), tb)
    best, best_key = None, None
    for p in _candidates(inst, lam):
        key = (combined(p, lam),) + _tie_key(p, tb)
        if best_key is None or _key_lt(key, best_key, inst.mode):
            best, best_key = p, key
    return best


def _candidates(inst: Instance, lam):
    # The minimizers of a linear objective lie on the Pareto set except for
    # the two axis-parallel directions, where dominated ties can occur.
    if lam == INF or lam == 0:
        return inst.points
    return inst.pareto


def _key_lt(a, b, mode: str) -> bool:
    if mode == "float":
        t = get_tolerance()
        if a[0] < b[0] - t:
            return True
        if a[0] > b[0] + t:
            return False
        return a[1:] < b[1:]
    return a < b


def admissible(inst: Instance, lam, delta) -> List[Point]:
    """Points whose objective is within a (1 + delta) factor of the optimum."""
    hs = [(combined(p, lam), p) for p in inst.points]
    lo = min(h for h, _ in hs)
    limit = (1 + delta) * lo
    t = get_tolerance() if inst.mode == "float" else 0
    return [p for h, p in hs if h <= limit + t]


def comb_delta(inst: Instance, lam, delta, policy: str = BEST,
               seed: Optional[int] = None, tb: str = LEFTMOST,
               rng: Optional[random.Random] = None) -> Point:
    """A point within a ``(1 + delta)`` factor of the Comb optimum.

    ``best`` returns the exact minimizer, ``worst`` the admissible point with the
    largest objective, ``random`` a uniform admissible point.
    """
    if delta < 0:
        raise ValueError("delta must be non-negative")
    if delta == 0 or policy == BEST:
        return comb_exact(inst, lam, tb)
    pool = admissible(inst, lam, delta)
    if policy == WORST:
        best, best_key = None, None
        for p in pool:
            key = (-combined(p, lam),) + _tie_key(p, tb)
            if best_key is None or _key_lt(key, best_key, inst.mode):
                best, best_key = p, key
        return best
    if policy == RANDOM:
        rng = rng or random.Random(seed)
        return pool[rng.randrange(len(pool))]
    raise ValueError(f"unknown policy {policy!r}")


def certificate_ok(points: Sequence[Point], q: Point, lam, delta=0) -> bool:
    """No point lies strictly below the line through ``q`` of slope ``-lam``
    scaled by ``1/(1+delta)``."""
    bound = combined(q, lam) / (1 + delta)
    t = get_tolerance() if isinstance(bound, float) else 0
    return all(combined(p, lam) >= bound - t for p in points)


class CombOracle:
    """Base class: call counting and a replayable log."""

    delta = 0

    def __init__(self):
        self.call_count = 0
        self.log: List[Tuple[object, Point]] = []

    def answer(self, lam) -> Point:
        q = self._answer(lam)
        self.call_count += 1
        self.log.append((lam, q))
        return q

    def _answer(self, lam) -> Point:  # pragma: no cover - abstract
        raise NotImplementedError

    @property
    def mode(self) -> str:
        return "rational"

    @property
    def m(self) -> int:
        return 64


class ExactComb(CombOracle):
    def __init__(self, inst: Instance, tb: str = LEFTMOST):
        super().__init__()
        if tb not in TIE_BREAKS:
            raise ValueError(f"unknown tie-break {tb!r}")
        self.instance = inst
        self.tb = tb

    def _answer(self, lam):
        return comb_exact(self.instance, lam, self.tb)

    @property
    def mode(self):
        return self.instance.mode

    @property
    def m(self):
        return self.instance.m


class DeltaComb(ExactComb):
    def __init__(self, inst: Instance, delta, policy: str = BEST,
                 seed: Optional[int] = None, tb: str = LEFTMOST):
        super().__init__(inst, tb)
        if policy not in POLICIES:
            raise ValueError(f"unknown policy {policy!r}")
        self.delta = delta
        self.policy = policy
        self._rng = random.Random(seed)

    def _answer(self, lam):
        return comb_delta(self.instance, lam, self.delta, self.policy,
                          tb=self.tb, rng=self._rng)


# -- adaptive adversary for the horizontal distance ---------------------------


@dataclass
class AdversaryState:
    """Committed answers of the horizontal-distance adversary.

    Coordinates are in the normalized frame ``c = (0, 0)``, ``a = (0, 1)``,
    ``b = (1, 0)``.
    """

    k: int
    committed: List[Tuple[object, Point]] = field(default_factory=list)
    finalized: bool = False
    clamped: int = 0
    # Heights are rounded down to this many significant bits (None: exact).
    # Without rounding, bit lengths double with every query.
    precision: Optional[int] = 64

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("k must be at least 2")

    A = Point(mpq(0), mpq(1))
    B = Point(mpq(1), mpq(0))

    def star(self, i: Optional[int] = None) -> Point:
        """q_i*: where the certificate line of the i-th answer meets y = 0."""
        lam, q = self.committed[-1 if i is None else i - 1]
        return Point(q.x + q.y / lam, mpq(0))

    def certified_error(self):
        """Horizontal error the adversary can still force: (q_i* b)."""
        if not self.committed:
            return mpq(1)
        return 1 - self.star().x


def _round_down(v, bits: Optional[int]):
    """Largest dyadic rational <= v (v > 0) with ``bits`` significant bits."""
    if bits is None:
        return v
    e = v.denominator.bit_length() - v.numerator.bit_length() + bits
    if e < 0:
        return v
    scale = 1 << e
    return mpq(int(v * scale), scale)


def adversary_hd_answer(st: AdversaryState, lam) -> Point:
    """Answer ``Comb(lam)`` for the adaptive horizontal-distance adversary."""
    if st.finalized:
        raise StateError("adversary already finalized")
    if lam == INF:
        return st.A
    lam = mpq(lam)
    if lam <= 0:
        raise GeometryError("adversary queries need lam > 0")
    k2 = 2 * st.k
    if not st.committed:
        q = Point(mpq(0), _round_down(min(lam, mpq(1)) / k2, st.precision))
        st.committed.append((lam, q))
        return q
    lam_i, q_i = st.committed[-1]
    if lam >= lam_i:
        # Answered from the existing certificate; state does not advance.
        st.clamped += 1
        return q_i
    lam_qb = abs_slope(q_i, st.B)
    y = _round_down((lam_qb if lam >= lam_qb else lam) / k2, st.precision)
    q = Point(q_i.x + (q_i.y - y) / lam_i, y)
    st.committed.append((lam, q))
    return q


SHIFT = mpq(1)


def shift(p: Point) -> Point:
    return Point(p.x + SHIFT, p.y + SHIFT)


def adversary_hd_finalize(st: AdversaryState) -> Instance:
    """The instance ``{a, q_1..q_i, q_i*, b}`` shifted by (+1, +1)."""
    if not st.committed:
        raise StateError("no answers committed")
    st.finalized = True
    pts = [st.A] + [q for _, q in st.committed] + [st.star(), st.B]
    pts = [shift(p) for p in pts]
    meta = {"family": "adversary-hd", "k": st.k, "queries": len(st.committed)}
    return Instance(tuple(dict.fromkeys(pts)), 2, meta)


class AdversaryOracle(CombOracle):
    """Oracle wrapper that answers in the shifted (positive) frame."""

    def __init__(self, k: int, precision: Optional[int] = 64):
        super().__init__()
        self.state = AdversaryState(k, precision=precision)

    def _answer(self, lam):
        if lam == 0:
            return shift(self.state.B)
        return shift(adversary_hd_answer(self.state, lam))

    def finalize(self) -> Instance:
        return adversary_hd_finalize(self.state)


# -- prefix family of the general ratio-distance lower bound ------------------


class PrefixFamily:
    """The instances ``I_l = {a, q_1..q_l, b}``, ``1 <= l <= j``, over a chain.

    ``vertices`` is ``[a, q_1, ..., q_{j'}, b]`` with ``j' > j`` (the vertex set
    of ``gen_lb``).  Slope cells are ``Lambda_i = (lam(q_i q_{i+1}), lam(q_{i-1} q_i)]``
    for ``i <= j``, ``Lambda_{j+1} = (lam(q_j b), lam(q_j q_{j+1})]``; anything
    steeper belongs to ``a`` and anything flatter to ``b``.  A query on a cell
    boundary is answered with the right-hand point.
    """

    def __init__(self, vertices: Sequence[Point], j: int):
        self.a, self.b = vertices[0], vertices[-1]
        self.q = list(vertices[:-1])  # q[0] = a, q[i] = q_i
        if not 1 <= j <= len(self.q) - 2:
            raise ValueError("j out of range for the vertex set")
        self.j = j
        # upper[i] = upper end of Lambda_i; upper[j+2] = lower end of Lambda_{j+1}
        self.upper = [INF] + [abs_slope(self.q[i - 1], self.q[i]) for i in range(1, j + 2)]
        self.upper.append(abs_slope(self.q[j], self.b))

    def cell(self, lam) -> int:
        """Index i with lam in Lambda_i; 0 for the a-side, j+2 for the b-side."""
        if lam == INF or lam > self.upper[1]:
            return 0
        for i in range(1, self.j + 2):
            if self.upper[i + 1] < lam <= self.upper[i]:
                return i
        return self.j + 2

    def answer(self, ell: int, lam) -> Point:
        if not 1 <= ell <= self.j:
            raise ValueError("ell must be in [1, j]")
        if not (lam >= 0):
            raise GeometryError(f"slope {lam!r} outside [0, +inf]")
        i = self.cell(lam)
        if i == 0:
            return self.a
        if ell >= i:
            return self.q[i]
        if ell == i - 1:
            return self.q[ell]
        return self.b

    def instance_points(self, ell: int) -> List[Point]:
        return [self.a] + self.q[1:ell + 1] + [self.b]


def prefix_family_answer(fam: PrefixFamily, ell: int, lam) -> Point:
    return fam.answer(ell, lam)


class PrefixFamilyOracle(CombOracle):
    def __init__(self, fam: PrefixFamily, ell: int):
        super().__init__()
        self.family = fam
        self.ell = ell

    def _answer(self, lam):
        return self.family.answer(self.ell, lam)


def is_finite_slope(lam) -> bool:
    return lam != INF and not (isinstance(lam, float) and math.isnan(lam))
