"""Sweep harness: grids of instances, Chord runs, baselines and CSV rows."""

from __future__ import annotations

import csv
import io
import itertools
import json
import os
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence

from gmpy2 import mpq

from .chord import ProtocolError, run_chord, trace_stats, verify_eps_cp
from .formats import format_scalar, load_instance, parse_scalar
from .geometry import HORIZONTAL, INF, METRICS, RATIO, Point, Triangle, abs_slope
from .instances import (avg_lb_triangle, gen_avg_lb, gen_balanced, gen_ig, gen_lb,
                        gen_ppp)
from .oracle import (BEST, LEFTMOST, POLICIES, TIE_BREAKS, AdversaryState, DeltaComb,
                     ExactComb, adversary_hd_answer, adversary_hd_finalize, shift)
from .optimum import (DEFAULT_CAP, EXACT, GREEDY, CapExceeded, opt_exact, opt_greedy,
                      performance_ratio)

FAMILIES = ("ig", "lb", "ppp", "avg-lb", "balanced", "file")
PARAMS = ("H", "L", "k", "j", "m", "eps", "mu", "nu", "gamma")
COLUMNS = ("family", "H", "L", "k", "j", "m", "eps", "mu", "nu", "gamma", "delta",
           "metric", "seed", "trial", "chd_calls", "opt_size", "opt_mode", "ratio",
           "trace_depth", "lowest_internal", "runtime_ms", "valid", "ratio_exact")
INT_COLUMNS = ("seed", "trial", "chd_calls", "opt_size", "trace_depth",
               "lowest_internal", "runtime_ms")


class ConfigError(ValueError):
    pass


@dataclass
class SweepConfig:
    family: str
    grid: Dict[str, list] = field(default_factory=dict)
    metric: str = RATIO
    delta: object = 0
    policy: str = BEST
    tiebreak: str = LEFTMOST
    trials: int = 1
    seed: int = 0
    opt_mode: str = "auto"
    cap: int = DEFAULT_CAP
    files: List[str] = field(default_factory=list)
    triangle: Optional[list] = None
    tilt: list = field(default_factory=lambda: ["uniform"])
    n: Optional[int] = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown family {self.family!r}")
        if self.metric not in METRICS:
            raise ConfigError(f"unknown metric {self.metric!r}")
        if self.opt_mode not in ("exact", "greedy", "auto"):
            raise ConfigError(f"unknown opt_mode {self.opt_mode!r}")
        if self.tiebreak not in TIE_BREAKS or self.policy not in POLICIES:
            raise ConfigError("bad tie-break or policy")
        if self.delta and self.metric != RATIO:
            raise ConfigError("delta > 0 is only supported with the ratio metric")
        if self.trials < 0:
            raise ConfigError("trials must be non-negative")
        for k, v in self.grid.items():
            if k not in PARAMS and k != "n":
                raise ConfigError(f"unknown grid parameter {k!r}")
            if not isinstance(v, list) or not v:
                raise ConfigError(f"grid for {k!r} must be a non-empty list")
        if self.family == "file" and not self.files:
            raise ConfigError("family 'file' needs a list of instance files")

    @classmethod
    def from_dict(cls, d: Dict) -> "SweepConfig":
        known = {f.name for f in fields(cls)}
        extra = set(d) - known - {"out"}
        if extra:
            raise ConfigError(f"unknown config keys {sorted(extra)}")
        return cls(**{k: v for k, v in d.items() if k in known})

    def cells(self) -> List[Dict]:
        keys = sorted(self.grid)
        return [dict(zip(keys, combo))
                for combo in itertools.product(*(self.grid[k] for k in keys))]


@dataclass
class BenchRecord:
    family: str
    H: Optional[str]
    L: Optional[str]
    k: Optional[str]
    j: Optional[str]
    m: Optional[str]
    eps: Optional[str]
    mu: Optional[str]
    nu: Optional[str]
    gamma: Optional[str]
    delta: str
    metric: str
    seed: int
    trial: int
    chd_calls: int
    opt_size: int
    opt_mode: str
    ratio: float
    trace_depth: int
    lowest_internal: int
    runtime_ms: int
    valid: bool
    ratio_exact: Optional[str] = None


def _fmt(v) -> Optional[str]:
    if v is None:
        return None
    if isinstance(v, float):
        return repr(v)
    return format_scalar(v)


def _rational(v):
    return parse_scalar(v, "rational") if isinstance(v, str) else mpq(v)


def build_instance(cfg: SweepConfig, cell: Dict, trial: int):
    """Instance plus the error the run uses and the CSV parameter columns."""
    f = cfg.family
    p = dict(cell)
    if f == "ig":
        inst = gen_ig(_rational(p["H"]), _rational(p["L"]), int(p["k"]), int(p["j"]))
        eps = _rational(p["eps"]) if "eps" in p else inst.meta["eps_L"]
        cols = {"H": p["H"], "L": p["L"], "k": p["k"], "j": p["j"], "eps": eps}
    elif f == "lb":
        mu = _rational(p.get("mu", 1))
        inst = gen_lb(_rational(p["eps"]), int(p["m"]), mu)
        eps = mu * inst.meta["eps"]
        cols = {"m": p["m"], "eps": inst.meta["eps"], "mu": mu,
                "k": inst.meta["k"], "j": inst.meta["j"]}
    elif f == "avg-lb":
        eps = float(p["eps"])
        nu = p.get("nu")
        inst = gen_avg_lb(eps, cfg.seed, trial, nu=nu)
        cols = {"eps": eps, "nu": inst.meta["nu"]}
    elif f == "ppp":
        eps = float(p["eps"])
        tri = _triangle(cfg.triangle) if cfg.triangle else avg_lb_triangle(eps)
        inst = gen_ppp(tri, float(p["nu"]), cfg.seed, trial, extra=[tri.l, tri.r])
        cols = {"eps": eps, "nu": float(p["nu"])}
    elif f == "balanced":
        eps = float(p["eps"])
        tri = _triangle(cfg.triangle) if cfg.triangle else avg_lb_triangle(eps)
        n = int(p.get("n", cfg.n or 1000))
        inst = gen_balanced(tri, n, float(p["gamma"]), tuple(cfg.tilt), cfg.seed, trial)
        inst = type(inst)(inst.points + (Point(float(tri.l.x), float(tri.l.y)),
                                         Point(float(tri.r.x), float(tri.r.y))),
                          inst.m, inst.meta, inst.mode)
        cols = {"eps": eps, "gamma": float(p["gamma"])}
    else:
        inst = load_instance(p["file"])
        eps = parse_scalar(p["eps"], inst.mode)
        cols = {"eps": eps}
    return inst, eps, cols


def _triangle(spec) -> Triangle:
    pts = [Point(float(x), float(y)) for x, y in spec]
    return Triangle(*pts)


def run_cell(cfg: SweepConfig, cell: Dict, trial: int) -> BenchRecord:
    t0 = time.perf_counter()
    inst, eps, cols = build_instance(cfg, cell, trial)
    delta = parse_scalar(cfg.delta, inst.mode) if isinstance(cfg.delta, str) else cfg.delta
    if delta:
        oracle = DeltaComb(inst, delta, cfg.policy, seed=cfg.seed * 7919 + trial, tb=cfg.tiebreak)
    else:
        oracle = ExactComb(inst, cfg.tiebreak)
    valid = True
    try:
        res = run_chord(oracle, eps, cfg.metric)
        ok = verify_eps_cp(inst, res.selected, eps, cfg.metric)[0]
    except ProtocolError:
        res, ok = None, False
    valid = valid and ok
    opt = _baseline(inst, eps, cfg)
    stats = trace_stats(res) if res else {"max_depth": -1, "lowest_internal_count": 0}
    calls = res.comb_calls if res else 0
    if not delta and opt.mode == EXACT and stats["lowest_internal_count"] > opt.size:
        valid = False
    ratio = performance_ratio(res, opt) if res else mpq(0)
    exact = format_scalar(ratio) if inst.mode == "rational" else None
    record = {k: _fmt(cols.get(k)) for k in PARAMS}
    return BenchRecord(
        family=cfg.family, **record, delta=_fmt(delta), metric=cfg.metric,
        seed=cfg.seed, trial=trial, chd_calls=calls, opt_size=opt.size,
        opt_mode=opt.mode, ratio=float(f"{float(ratio):.12g}"),
        trace_depth=stats["max_depth"], lowest_internal=stats["lowest_internal_count"],
        runtime_ms=int(round(1000 * (time.perf_counter() - t0))), valid=valid,
        ratio_exact=exact)


def _baseline(inst, eps, cfg: SweepConfig):
    if cfg.opt_mode == "greedy":
        return opt_greedy(inst, eps, cfg.metric)
    try:
        return opt_exact(inst, eps, cfg.metric, cfg.cap)
    except CapExceeded:
        if cfg.opt_mode == "exact":
            raise
        return opt_greedy(inst, eps, cfg.metric)


def _run_task(args):
    cfg, cell, trial = args
    return run_cell(cfg, cell, trial)


def pool_size() -> int:
    env = os.environ.get("CHORD_BENCH_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ConfigError("CHORD_BENCH_THREADS must be an integer") from exc
    return os.cpu_count() or 1


def run_sweep(cfg: SweepConfig, workers: Optional[int] = None) -> List[BenchRecord]:
    """All (cell, trial) pairs; rows come back ordered by (cell index, trial)."""
    cells = cfg.cells()
    if cfg.family == "file":
        cells = [dict(c, file=f) for f in cfg.files for c in cells]
    tasks = [(cfg, cell, t) for cell in cells for t in range(cfg.trials)]
    workers = pool_size() if workers is None else workers
    if workers <= 1 or len(tasks) <= 1:
        return [_run_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(_run_task, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


# -- CSV ----------------------------------------------------------------------


def _cell_out(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def emit_csv(rows: Iterable[BenchRecord], out=None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        d = asdict(r)
        w.writerow([_cell_out(d[c]) for c in COLUMNS])
    text = buf.getvalue()
    if out is not None:
        Path(out).write_text(text)
    return text


def parse_csv(text: str) -> List[BenchRecord]:
    rows = []
    for d in csv.DictReader(io.StringIO(text)):
        vals = {}
        for c in COLUMNS:
            v = d.get(c, "")
            if c in INT_COLUMNS:
                vals[c] = int(v)
            elif c == "ratio":
                vals[c] = float(v)
            elif c == "valid":
                vals[c] = v == "true"
            elif c in ("family", "metric", "opt_mode", "delta"):
                vals[c] = v
            else:
                vals[c] = v or None
        rows.append(BenchRecord(**vals))
    return rows


# -- summaries ----------------------------------------------------------------


SUMMARY_COLUMNS = ("count", "mean_ratio", "median_ratio", "max_ratio", "mean_calls",
                   "mean_opt", "frac_exact")


def summarize(rows: Sequence[BenchRecord], group_by: Sequence[str]) -> List[Dict]:
    groups: Dict[tuple, List[BenchRecord]] = {}
    for r in rows:
        groups.setdefault(tuple(getattr(r, g) for g in group_by), []).append(r)
    table = []
    for key, rs in groups.items():
        exact = [r.ratio_exact for r in rs]
        if all(exact):
            ratios = [mpq(e) for e in exact]
            mean = sum(ratios) / len(ratios)
            mean_s, max_s = format_scalar(mean), format_scalar(max(ratios))
            fl = [float(x) for x in ratios]
        else:
            fl = [r.ratio for r in rs]
            mean_s, max_s = None, None
        row = dict(zip(group_by, key))
        row.update({
            "count": len(rs),
            "mean_ratio": statistics.fmean(fl),
            "median_ratio": statistics.median(fl),
            "max_ratio": max(fl),
            "mean_calls": statistics.fmean(r.chd_calls for r in rs),
            "mean_opt": statistics.fmean(r.opt_size for r in rs),
            "frac_exact": sum(r.opt_mode == EXACT for r in rs) / len(rs),
            "mean_ratio_exact": mean_s,
            "max_ratio_exact": max_s,
        })
        table.append(row)
    return table


def summary_csv(table: List[Dict], group_by: Sequence[str]) -> str:
    buf = io.StringIO()
    cols = list(group_by) + list(SUMMARY_COLUMNS) + ["mean_ratio_exact", "max_ratio_exact"]
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for row in table:
        w.writerow([_cell_out(row.get(c)) for c in cols])
    return buf.getvalue()


def summary_text(table: List[Dict], group_by: Sequence[str]) -> str:
    cols = list(group_by) + list(SUMMARY_COLUMNS)
    cells = [[_cell_out(r.get(c)) if not isinstance(r.get(c), float) else f"{r[c]:.4g}"
              for c in cols] for r in table]
    widths = [max([len(c)] + [len(row[i]) for row in cells]) for i, c in enumerate(cols)]
    lines = ["  ".join(c.rjust(w) for c, w in zip(cols, widths))]
    lines += ["  ".join(v.rjust(w) for v, w in zip(row, widths)) for row in cells]
    return "\n".join(lines)


# -- adversary duel -----------------------------------------------------------


@dataclass
class DuelReport:
    k: int
    strategy: str
    queries: int
    slopes: List[str]
    certified_errors: List[str]
    clamped: int
    opt_size: int
    three_point_error: str
    certified: bool

    def to_dict(self) -> Dict:
        return asdict(self)


def _chord_strategy(st: AdversaryState):
    if not st.committed:
        return mpq(1)
    return abs_slope(st.committed[-1][1], st.B)


def _bisection_strategy(st: AdversaryState):
    if not st.committed:
        return mpq(1)
    return st.committed[-1][0] / 2


def adversary_duel(k: int, strategy: str = "chord", script: Optional[Sequence] = None,
                   precision: Optional[int] = 64) -> DuelReport:
    """Play a query strategy against the horizontal-distance adversary.

    Stops once the certified error is at most 1/2 or after k - 1 queries, then
    finalizes the instance and measures what three points achieve on it.
    """
    if k < 2:
        raise ConfigError("k must be at least 2")
    st = AdversaryState(k, precision=precision)
    if strategy == "chord":
        nxt = _chord_strategy
    elif strategy == "bisection":
        nxt = _bisection_strategy
    elif strategy == "file-script":
        if not script:
            raise ConfigError("file-script strategy needs a list of slopes")
        seq = [parse_scalar(s) for s in script]
        nxt = lambda s, it=iter(seq): next(it, None)
    else:
        raise ConfigError(f"unknown strategy {strategy!r}")
    slopes, errors = [], []
    half = mpq(1, 2)
    while len(slopes) < k - 1 and st.certified_error() > half:
        lam = nxt(st)
        if lam is None:  # script exhausted
            break
        if lam == INF or lam <= 0:
            # out-of-range slopes are treated as "no progress"
            st.clamped += 1
            slopes.append(format_scalar(mpq(lam) if lam != INF else lam))
            errors.append(format_scalar(st.certified_error()))
            continue
        adversary_hd_answer(st, lam)
        slopes.append(format_scalar(mpq(lam)))
        errors.append(format_scalar(st.certified_error()))
    if not st.committed:
        adversary_hd_answer(st, mpq(1))
    star = shift(st.star())
    inst = adversary_hd_finalize(st)
    opt = opt_exact(inst, half, HORIZONTAL, cap=max(DEFAULT_CAP, len(inst)))
    three = [shift(st.A), star, shift(st.B)]
    err = verify_eps_cp(inst, three, half, HORIZONTAL)[1]
    return DuelReport(k, strategy, len(slopes), slopes, errors, st.clamped, opt.size,
                      format_scalar(err), st.certified_error() <= half)
