"""Offline baselines: exact and greedy minimum eps-convex Pareto sets.

Both searches rely on one structural fact.  Take the points to be covered
(``targets``: the lower-envelope vertices) and a candidate set ``S`` of Pareto
points listed by increasing x.  For all three metrics a target lying strictly
between two consecutive members of ``S`` is best served by the segment joining
them, and a target left of (right of) ``S`` by its first (last) member: every
other point of the chain is dominated in the relevant coordinates.  Coverage
therefore splits into independent edge checks, and the minimum set is a
shortest path in a DAG.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import List, Optional, Sequence

from gmpy2 import mpq

from .chord import ChordResult, verify_eps_cp
from .geometry import Point, Segment, chain_key, eps_key, leq, segment_key
from .oracle import Instance

EXACT, GREEDY, TRACE_LOWER = "exact", "greedy-upper", "trace-lower"
DEFAULT_CAP = 24


class CapExceeded(RuntimeError):
    """The exact search refuses instances with too many Pareto points."""


@dataclass
class OptResult:
    size: int
    witness: List[Point]
    mode: str
    metric: str
    epsilon: object


class _Coverage:
    """Edge and endpoint validity for a fixed (targets, eps, metric)."""

    def __init__(self, targets: Sequence[Point], eps, metric: str):
        self.targets = list(targets)
        self.xs = [t.x for t in self.targets]
        self.metric = metric
        self.ekey = eps_key(eps, metric)

    def _ok(self, key) -> bool:
        return leq(key, self.ekey)

    def _between(self, u: Point, v: Point):
        return [t for t in self.targets if u.x < t.x < v.x]

    def start_ok(self, v: Point) -> bool:
        return all(self._ok(chain_key(t, [v], self.metric))
                   for t in self.targets if t.x < v.x)

    def end_ok(self, v: Point) -> bool:
        return all(self._ok(chain_key(t, [v], self.metric))
                   for t in self.targets if t.x > v.x)

    def edge_ok(self, u: Point, v: Point) -> bool:
        seg = Segment(u, v)
        return all(self._ok(segment_key(t, seg, self.metric))
                   for t in self._between(u, v))


def opt_exact(inst: Instance, eps, metric: str, cap: int = DEFAULT_CAP) -> OptResult:
    """Minimum eps-CP over the Pareto points, by breadth-first search over size."""
    cands = inst.pareto
    if len(cands) > cap:
        raise CapExceeded(f"{len(cands)} Pareto points exceed the cap of {cap}")
    cov = _Coverage(inst.envelope, eps, metric)
    n = len(cands)
    starts = [i for i in range(n) if cov.start_ok(cands[i])]
    ends = {i for i in range(n) if cov.end_ok(cands[i])}
    parent = {i: None for i in starts}
    frontier = starts
    while frontier:
        done = [i for i in frontier if i in ends]
        if done:
            return OptResult(*_path(parent, done[0], cands), EXACT, metric, eps)
        nxt = []
        for i in frontier:
            for j in range(i + 1, n):
                if j not in parent and cov.edge_ok(cands[i], cands[j]):
                    parent[j] = i
                    nxt.append(j)
        frontier = sorted(nxt)
    raise AssertionError("the full Pareto set is always feasible")


def _path(parent, last: int, cands):
    out = []
    i = last
    while i is not None:
        out.append(cands[i])
        i = parent[i]
    out.reverse()
    return len(out), out


def _last_true(lo: int, hi: int, pred) -> int:
    """Largest i in [lo, hi] with pred(i), assuming pred is true-then-false and pred(lo)."""
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if pred(mid):
            lo = mid
        else:
            hi = mid - 1
    return lo


def opt_greedy(inst: Instance, eps, metric: str) -> OptResult:
    """Farthest-reach walk along the envelope vertices.

    Valid start vertices form a prefix, valid end vertices a suffix, and the
    vertices reachable from an anchor form a contiguous range, so each step is a
    binary search.  The result is verified before it is returned.
    """
    env = inst.envelope
    cov = _Coverage(env, eps, metric)
    n = len(env)
    cur = _last_true(0, n - 1, lambda i: cov.start_ok(env[i]))
    chosen = [env[cur]]
    first_end = next(i for i in range(n - 1, -2, -1) if i < 0 or not cov.end_ok(env[i])) + 1
    while cur < first_end:
        far = _last_true(cur + 1, n - 1, lambda j: cov.edge_ok(env[cur], env[j]))
        cur = first_end if far >= first_end else far
        chosen.append(env[cur])
    ok, worst, witness = verify_eps_cp(inst, chosen, eps, metric)
    if not ok:
        raise AssertionError(f"greedy set failed verification at {witness!r} ({worst})")
    return OptResult(len(chosen), chosen, GREEDY, metric, eps)


def opt_bruteforce(inst: Instance, eps, metric: str, limit: int = 10) -> OptResult:
    """Smallest subset of *all* instance points passing ``verify_eps_cp``.

    Independent of the structural argument above; only for tiny instances.
    """
    pts = list(inst.points)
    if len(pts) > limit:
        raise CapExceeded(f"brute force limited to {limit} points")
    for size in range(1, len(pts) + 1):
        for combo in itertools.combinations(pts, size):
            if verify_eps_cp(inst, list(combo), eps, metric)[0]:
                return OptResult(size, list(combo), EXACT, metric, eps)
    raise AssertionError("the full point set is always feasible")


def opt_auto(inst: Instance, eps, metric: str, cap: int = DEFAULT_CAP) -> OptResult:
    """Exact below the cap, greedy above it."""
    if len(inst.pareto) <= cap:
        return opt_exact(inst, eps, metric, cap)
    return opt_greedy(inst, eps, metric)


def performance_ratio(chord: ChordResult, opt: OptResult):
    """``comb_calls / opt.size``: an exact rational unless the instance is float.

    When ``opt.mode`` is greedy the value underestimates the true ratio.
    """
    if opt.size <= 0:
        raise ValueError("optimum size must be positive")
    if isinstance(chord.epsilon, float):
        return chord.comb_calls / opt.size
    return mpq(chord.comb_calls, opt.size)
