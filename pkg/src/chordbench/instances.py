"""Instance generators: the adversarial families and the stochastic ones.

Adversarial families are built in exact rational arithmetic; the stochastic
families sample floats from a numpy ``SeedSequence([seed, trial])`` stream, so
a cell of a sweep can be regenerated on its own.
"""

from __future__ import annotations

import math
import random
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from gmpy2 import mpq

from .geometry import Point, Triangle, abs_slope, triangle_area
from .oracle import Instance, InstanceError, min_bits

ONE = mpq(1)
PPP_CAP = 10 ** 7


class ParameterError(ValueError):
    pass


def _q(v):
    return v if isinstance(v, type(ONE)) else mpq(v)


def _float_bits(xs: np.ndarray, ys: np.ndarray) -> int:
    lo = min(xs.min(), ys.min())
    hi = max(xs.max(), ys.max())
    return max(1, math.ceil(max(math.log2(hi), -math.log2(lo))))


# -- I_G and I_LB -------------------------------------------------------------


def ig_vertices(H, L, k: int, j: int, perturb: bool = False) -> List[Point]:
    """``[a, q_1, ..., q_{j+1}, b]`` of the worst-case construction.

    ``q_i`` sits on the line through ``q_{i-1}`` parallel to ``q_{i-2} b`` at
    height ``1 + (y(q_{i-1}) - 1)/(k + i - 1)``.  With ``perturb`` each of those
    lines has its slope shrunk by a factor ``1 - 2^-64``, which moves ``q_i``
    slightly right so that ``q_{i-1}`` becomes the unique Comb minimizer.
    """
    H, L = _q(H), _q(L)
    if not (H > 0 and L > 0):
        raise ParameterError("H and L must be positive")
    if k < 2 or not 1 <= j <= k - 1:
        raise ParameterError("need k >= 2 and 1 <= j <= k - 1")
    a = Point(ONE, 1 + H)
    b = Point(1 + L, ONE)
    q = [a, Point(ONE, 1 + H / k)]
    shrink = 1 - mpq(1, 2 ** 64) if perturb else ONE
    for i in range(2, j + 2):
        prev, prev2 = q[i - 1], q[i - 2]
        slope = abs_slope(prev2, b) * shrink
        y = 1 + (prev.y - 1) / (k + i - 1)
        q.append(Point(prev.x + (prev.y - y) / slope, y))
    return q + [b]


def ig_epsilons(L, k: int, j: int):
    """(eps_L, eps'_L) of I_G(H, L, k, j)."""
    eps_L = _q(L) * (k - 1) / (k + j - 1)
    return eps_L, eps_L * j / k


def gen_ig(H, L, k: int, j: int, perturb: bool = False) -> Instance:
    pts = ig_vertices(H, L, k, j, perturb)
    eps_L, eps_Lp = ig_epsilons(L, k, j)
    meta = {"family": "ig", "H": _q(H), "L": _q(L), "k": k, "j": j,
            "eps_L": eps_L, "eps_L_prime": eps_Lp, "perturbed": perturb}
    return Instance(tuple(pts), min_bits(pts), meta)


def lb_parameters(eps, m: int, mu=1, c0=1) -> Dict:
    """H*, L*, j*, k* of the worst-case family (natural logs, floor, j* >= 1)."""
    eps, mu, c0 = _q(eps), _q(mu), _q(c0)
    H = mpq(2 ** m - 1)
    L = (mu + 1) * eps
    X = float(H / eps)
    j = max(1, math.floor(float(c0 / mu) * math.log(X) / math.log(math.log(X))))
    k = int(math.ceil(mu * j)) + 1
    adjusted = False
    if j > k - 1:
        k, adjusted = j + 1, True
    return {"H": H, "L": L, "j": j, "k": k, "k_adjusted": adjusted}


def gen_lb(eps, m: int, mu=1, c0=1, eps_max=mpq(1, 64), m_min: int = 4,
           perturb: bool = False) -> Instance:
    eps = _q(eps)
    if not 0 < eps <= eps_max:
        raise ParameterError(f"eps must lie in (0, {eps_max}]")
    if m < m_min:
        raise ParameterError(f"m must be at least {m_min}")
    if _q(mu) < 1:
        raise ParameterError("mu must be at least 1")
    p = lb_parameters(eps, m, mu, c0)
    pts = ig_vertices(p["H"], p["L"], p["k"], p["j"], perturb)
    eps_L, eps_Lp = ig_epsilons(p["L"], p["k"], p["j"])
    meta = {"family": "lb", "eps": eps, "m": m, "mu": _q(mu), "c0": _q(c0),
            "H": p["H"], "L": p["L"], "k": p["k"], "j": p["j"],
            "k_adjusted": p["k_adjusted"], "eps_L": eps_L, "eps_L_prime": eps_Lp,
            "perturbed": perturb}
    return Instance(tuple(pts), m, meta)


# -- Poisson point processes --------------------------------------------------


def rng_for(seed: int, trial: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(trial)]))


def _tri_floats(t: Triangle) -> np.ndarray:
    return np.array([[float(p.x), float(p.y)] for p in t])


def uniform_in_triangle(rng: np.random.Generator, t: Triangle, n: int) -> np.ndarray:
    """``n`` uniform points in ``t`` (fold the unit square onto the simplex)."""
    v = _tri_floats(t)
    u = rng.random((n, 2))
    flip = u.sum(axis=1) > 1
    u[flip] = 1 - u[flip]
    return v[2] + u[:, :1] * (v[0] - v[2]) + u[:, 1:] * (v[1] - v[2])


def _float_instance(xy: np.ndarray, extra: Sequence[Point], meta: Dict) -> Instance:
    ex = np.array([[float(p.x), float(p.y)] for p in extra]).reshape(-1, 2)
    allxy = np.vstack([np.asarray(xy, dtype=float).reshape(-1, 2), ex])
    if not len(allxy):
        raise InstanceError("empty realization")
    xs, ys = allxy[:, 0], allxy[:, 1]
    return Instance.from_arrays(xs, ys, _float_bits(xs, ys), meta)


def ppp_sample(t: Triangle, nu, seed: int, trial: int = 0, cap: float = PPP_CAP) -> np.ndarray:
    """Points of a homogeneous PPP of intensity ``nu`` on ``t``.

    N ~ Poisson(nu * area) and, given N, the points are i.i.d. uniform.
    """
    mean = float(nu) * float(triangle_area(t))
    if not mean < float("inf") or mean < 0:
        raise ParameterError("intensity times area must be finite")
    if mean > cap:
        raise ParameterError(f"expected count {mean:.3g} exceeds the cap {cap:.3g}")
    rng = rng_for(seed, trial)
    n = int(rng.poisson(mean))
    return uniform_in_triangle(rng, t, n)


def gen_ppp(t: Triangle, nu, seed: int, trial: int = 0, extra: Sequence[Point] = (),
            cap: float = PPP_CAP) -> Instance:
    xy = ppp_sample(t, nu, seed, trial, cap)
    meta = {"family": "ppp", "nu": float(nu), "seed": int(seed), "trial": int(trial)}
    return _float_instance(xy, extra, meta)


def avg_lb_triangle(eps) -> Triangle:
    eps = float(eps)
    return Triangle(Point(1.0, 2.0), Point(1 + 2 * eps, 1.0), Point(1.0, 1.0))


def gen_avg_lb(eps, seed: int, trial: int = 0, nu=None, cap: float = PPP_CAP) -> Instance:
    """PPP of intensity 1/eps^2 on a=(1,2), b=(1+2eps,1), c=(1,1), plus a and b."""
    eps = float(eps)
    if not 0 < eps < 0.25:
        raise ParameterError("eps must lie in (0, 1/4)")
    t = avg_lb_triangle(eps)
    nu = 1 / eps ** 2 if nu is None else float(nu)
    xy = ppp_sample(t, nu, seed, trial, cap)
    meta = {"family": "avg-lb", "eps": eps, "nu": nu, "seed": int(seed), "trial": int(trial)}
    return _float_instance(xy, [t.l, t.r], meta)


def density_threshold(t: Triangle, eps) -> float:
    """The intensity 10 S(T) / S*^2 above which Chord needs O(1) calls on average,
    with S* = (eps^2 alpha^2 / 2) min(lam_ab, 1/lam_ab) and alpha = min(x(c), y(c))."""
    eps = float(eps)
    lam = float(abs_slope(t.l, t.r))
    alpha = min(float(t.s.x), float(t.s.y))
    s_star = eps ** 2 * alpha ** 2 / 2 * min(lam, 1 / lam)
    return 10 * float(triangle_area(t)) / s_star ** 2


# -- gamma-balanced samples ---------------------------------------------------


def _linear_weight(tilt, xmin: float, xmax: float):
    kind = tilt[0] if isinstance(tilt, (tuple, list)) else tilt
    if kind == "uniform":
        return lambda x: np.ones_like(x)
    if kind == "linear-x":
        lo, hi = float(tilt[1]), float(tilt[2])
        if lo <= 0 or hi <= 0:
            raise ParameterError("linear tilt weights must be positive")
        return lambda x: lo + (hi - lo) * (np.asarray(x, dtype=float) - xmin) / (xmax - xmin)
    raise ParameterError(f"unsupported tilt descriptor {tilt!r}")


def tilt_ratio_range(region: Triangle, tilt) -> Tuple[float, float]:
    """Pointwise range of density / uniform density over ``region``.

    For a weight linear in x the mean over a triangle is its value at the
    centroid, and the extremes are at the vertices.
    """
    v = _tri_floats(region)
    xmin, xmax = v[:, 0].min(), v[:, 0].max()
    w = _linear_weight(tilt, xmin, xmax)
    mean = float(w(np.array([v[:, 0].mean()]))[0])
    vals = w(v[:, 0]) / mean
    return float(vals.min()), float(vals.max())


def gen_balanced(region: Triangle, n: int, gamma, tilt=("uniform",), seed: int = 0,
                 trial: int = 0) -> Instance:
    """``n`` i.i.d. draws from a gamma-balanced density by rejection sampling."""
    gamma = float(gamma)
    if not 0 <= gamma < 1:
        raise ParameterError("gamma must lie in [0, 1)")
    lo, hi = tilt_ratio_range(region, tilt)
    if lo < (1 - gamma) - 1e-12 or hi > 1 / (1 - gamma) + 1e-12:
        raise ParameterError(f"tilt ratio range [{lo:.4g}, {hi:.4g}] is not {gamma}-balanced")
    v = _tri_floats(region)
    xmin, xmax = v[:, 0].min(), v[:, 0].max()
    w = _linear_weight(tilt, xmin, xmax)
    wmax = float(w(v[:, 0]).max())
    rng = rng_for(seed, trial)
    out = np.empty((0, 2))
    while len(out) < n:
        batch = uniform_in_triangle(rng, region, max(64, 2 * (n - len(out))))
        keep = rng.random(len(batch)) * wmax <= w(batch[:, 0])
        out = np.vstack([out, batch[keep]])
    meta = {"family": "balanced", "n": n, "gamma": gamma, "tilt": list(tilt),
            "seed": int(seed), "trial": int(trial)}
    return _float_instance(out[:n], [], meta)


def polygon_mass(poly: np.ndarray, region: Triangle, tilt) -> float:
    """Probability mass of the polygon ``poly`` (inside ``region``) under the tilted density."""
    v = _tri_floats(region)
    xmin, xmax = v[:, 0].min(), v[:, 0].max()
    w = _linear_weight(tilt, xmin, xmax)
    area_r = float(triangle_area(region))
    mean = float(w(np.array([v[:, 0].mean()]))[0])
    area, cx = _area_centroid_x(poly)
    if area == 0:
        return 0.0
    return area * float(w(np.array([cx]))[0]) / (mean * area_r)


def _area_centroid_x(poly: np.ndarray) -> Tuple[float, float]:
    x, y = poly[:, 0], poly[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    c = x * yn - xn * y
    a = c.sum() / 2
    if abs(a) < 1e-300:
        return 0.0, 0.0
    return abs(a), float(((x + xn) * c).sum() / (6 * a))


def clip_box(region: Triangle, x0, x1, y0, y1) -> np.ndarray:
    """The triangle clipped to an axis-parallel box (Sutherland-Hodgman)."""
    poly = [tuple(p) for p in _tri_floats(region)]
    for axis, bound, keep_ge in ((0, x0, True), (0, x1, False), (1, y0, True), (1, y1, False)):
        out = []
        for i, p in enumerate(poly):
            q = poly[(i + 1) % len(poly)]
            pin = p[axis] >= bound if keep_ge else p[axis] <= bound
            qin = q[axis] >= bound if keep_ge else q[axis] <= bound
            if pin:
                out.append(p)
            if pin != qin:
                f = (bound - p[axis]) / (q[axis] - p[axis])
                out.append((p[0] + f * (q[0] - p[0]), p[1] + f * (q[1] - p[1])))
        poly = out
        if not poly:
            break
    return np.array(poly) if poly else np.zeros((0, 2))


# -- random convex chains (test corpus) ---------------------------------------


def random_convex_chain(rng: random.Random, n: int, dominated: int = 0) -> Instance:
    """``n`` rational points in strictly convex decreasing position, plus
    ``dominated`` extra points lying above the chain."""
    if n < 1:
        raise ParameterError("n must be positive")
    slopes = set()
    while len(slopes) < n - 1:
        slopes.add(mpq(rng.randint(1, 400), rng.randint(1, 40)))
    slopes = sorted(slopes, reverse=True)
    steps = [mpq(rng.randint(1, 16), 8) for _ in slopes]
    drop = sum(s * d for s, d in zip(slopes, steps))
    x, y = ONE, ONE + drop
    pts = [Point(x, y)]
    for s, d in zip(slopes, steps):
        x, y = x + d, y - s * d
        pts.append(Point(x, y))
    for _ in range(dominated):
        base = pts[rng.randrange(len(pts))]
        pts.append(Point(base.x + mpq(rng.randint(0, 16), 8), base.y + mpq(rng.randint(1, 16), 8)))
    pts = list(dict.fromkeys(pts))
    return Instance(tuple(pts), min_bits(pts), {"family": "random-chain", "n": n})
