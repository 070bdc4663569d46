"""Command-line front end.

Exit codes: 0 success, 2 when a benchmark row (or a verification) is invalid,
3 for configuration errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional

from .bench import (ConfigError, SweepConfig, adversary_duel, emit_csv, run_sweep,
                    summarize, summary_text)
from .chord import ProtocolError, result_to_json, run_chord, trace_stats, verify_eps_cp
from .formats import (format_scalar, load_instance, load_point_set, parse_scalar,
                      points_to_json, save_instance)
from .geometry import METRICS, Point, Triangle
from .instances import ParameterError, gen_avg_lb, gen_balanced, gen_ig, gen_lb, gen_ppp
from .oracle import BEST, LEFTMOST, POLICIES, TIE_BREAKS, DeltaComb, ExactComb, InstanceError
from .optimum import CapExceeded, opt_exact, opt_greedy

EXIT_OK, EXIT_INVALID, EXIT_CONFIG = 0, 2, 3


def _triangle(text: str) -> Triangle:
    nums = [float(v) for v in text.replace(";", ",").split(",")]
    if len(nums) != 6:
        raise ConfigError("triangle needs six numbers: lx,ly,rx,ry,sx,sy")
    return Triangle(Point(*nums[0:2]), Point(*nums[2:4]), Point(*nums[4:6]))


def cmd_gen(a) -> int:
    f = a.family
    if f == "ig":
        inst = gen_ig(parse_scalar(a.H), parse_scalar(a.L), a.k, a.j, perturb=a.perturb)
    elif f == "lb":
        inst = gen_lb(parse_scalar(a.eps), a.m, parse_scalar(a.mu), parse_scalar(a.c0))
    elif f == "avg-lb":
        inst = gen_avg_lb(float(parse_scalar(a.eps)), a.seed, a.trial,
                          nu=None if a.nu is None else float(a.nu))
    elif f == "ppp":
        inst = gen_ppp(_triangle(a.triangle), float(a.nu), a.seed, a.trial)
    else:
        tilt = ("uniform",) if a.tilt is None else ("linear-x", *a.tilt)
        inst = gen_balanced(_triangle(a.triangle), a.n, float(a.gamma), tilt, a.seed, a.trial)
    save_instance(inst, a.out)
    print(f"wrote {len(inst)} points to {a.out}")
    return EXIT_OK


def _oracle(inst, a):
    delta = parse_scalar(a.delta, inst.mode) if a.delta is not None else 0
    if delta:
        return DeltaComb(inst, delta, a.policy, seed=a.seed, tb=a.tiebreak)
    return ExactComb(inst, a.tiebreak)


def cmd_run(a) -> int:
    inst = load_instance(a.instance)
    eps = parse_scalar(a.eps, inst.mode)
    res = run_chord(_oracle(inst, a), eps, a.metric)
    stats = trace_stats(res)
    ok, worst, _ = verify_eps_cp(inst, res.selected, eps, a.metric)
    print(f"comb_calls={res.comb_calls} selected={len(res.selected)} "
          f"depth={stats['max_depth']} lowest_internal={stats['lowest_internal_count']} "
          f"error={format_scalar(worst)} valid={ok}")
    for p in res.selected:
        print(f"  {format_scalar(p.x)} {format_scalar(p.y)}")
    if a.trace:
        Path(a.trace).write_text(result_to_json(res) + "\n")
    return EXIT_OK if ok else EXIT_INVALID


def cmd_opt(a) -> int:
    inst = load_instance(a.instance)
    eps = parse_scalar(a.eps, inst.mode)
    if a.mode == "exact":
        res = opt_exact(inst, eps, a.metric, a.cap)
    else:
        res = opt_greedy(inst, eps, a.metric)
    print(f"size={res.size} mode={res.mode}")
    for p in res.witness:
        print(f"  {format_scalar(p.x)} {format_scalar(p.y)}")
    if a.out:
        Path(a.out).write_text(points_to_json(res.witness) + "\n")
    return EXIT_OK


def cmd_verify(a) -> int:
    inst = load_instance(a.instance)
    eps = parse_scalar(a.eps, inst.mode)
    S = load_point_set(a.set, inst.mode)
    ok, worst, witness = verify_eps_cp(inst, S, eps, a.metric)
    wit = "-" if witness is None else f"({format_scalar(witness.x)}, {format_scalar(witness.y)})"
    print(f"ok={ok} worst={format_scalar(worst)} witness={wit}")
    return EXIT_OK if ok else EXIT_INVALID


def cmd_adversary(a) -> int:
    script = None
    if a.strategy == "file-script":
        if not a.script:
            raise ConfigError("--script is required for the file-script strategy")
        script = json.loads(Path(a.script).read_text())
    rep = adversary_duel(a.k, a.strategy, script)
    if a.json:
        print(json.dumps(rep.to_dict(), indent=1))
    else:
        print(f"k={rep.k} strategy={rep.strategy} queries={rep.queries} clamped={rep.clamped}")
        for i, (lam, err) in enumerate(zip(rep.slopes, rep.certified_errors), 1):
            print(f"  {i:3d} lambda={lam} certified_error~{float(parse_scalar(err)):.6f}")
        print(f"finalized opt(1/2)={rep.opt_size} three-point error~"
              f"{float(parse_scalar(rep.three_point_error)):.6f}")
    return EXIT_OK


def cmd_bench(a) -> int:
    d = json.loads(Path(a.config).read_text())
    cfg = SweepConfig.from_dict(d)
    rows = run_sweep(cfg)
    out = a.out or d.get("out")
    if not out:
        raise ConfigError("no output path (use --out or 'out' in the config)")
    emit_csv(rows, out)
    if rows:
        keys = [k for k in ("family", "metric", "m", "eps") if k == "family" or getattr(rows[0], k)]
        print(summary_text(summarize(rows, keys), keys))
    bad = sum(not r.valid for r in rows)
    if bad:
        print(f"{bad} INVALID row(s)", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


def cmd_report(a) -> int:
    from .report import render_report
    for p in render_report(a.csv, a.out):
        print(f"wrote {p}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="chordbench", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate an instance file")
    g.add_argument("--family", required=True, choices=["ig", "lb", "ppp", "avg-lb", "balanced"])
    g.add_argument("--H", default="1")
    g.add_argument("--L", default="1")
    g.add_argument("--k", type=int, default=4)
    g.add_argument("--j", type=int, default=3)
    g.add_argument("--perturb", action="store_true")
    g.add_argument("--eps", default="1/256")
    g.add_argument("--m", type=int, default=8)
    g.add_argument("--mu", default="1")
    g.add_argument("--c0", default="1")
    g.add_argument("--nu")
    g.add_argument("--triangle", default="1,2,2,1,1,1", help="lx,ly,rx,ry,sx,sy")
    g.add_argument("--n", type=int, default=1000)
    g.add_argument("--gamma", default="0")
    g.add_argument("--tilt", nargs=2, metavar=("W_LEFT", "W_RIGHT"))
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--trial", type=int, default=0)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen)

    r = sub.add_parser("run", help="run the Chord algorithm on an instance")
    r.add_argument("--instance", required=True)
    r.add_argument("--eps", required=True)
    r.add_argument("--metric", required=True, choices=METRICS)
    r.add_argument("--delta")
    r.add_argument("--policy", default=BEST, choices=POLICIES)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--tiebreak", default=LEFTMOST, choices=TIE_BREAKS)
    r.add_argument("--trace")
    r.set_defaults(func=cmd_run)

    o = sub.add_parser("opt", help="minimum eps-convex Pareto set")
    o.add_argument("--instance", required=True)
    o.add_argument("--eps", required=True)
    o.add_argument("--metric", required=True, choices=METRICS)
    o.add_argument("--mode", default="exact", choices=["exact", "greedy"])
    o.add_argument("--cap", type=int, default=24)
    o.add_argument("--out")
    o.set_defaults(func=cmd_opt)

    v = sub.add_parser("verify", help="check a point set against an instance")
    v.add_argument("--instance", required=True)
    v.add_argument("--set", required=True)
    v.add_argument("--eps", required=True)
    v.add_argument("--metric", required=True, choices=METRICS)
    v.set_defaults(func=cmd_verify)

    d = sub.add_parser("adversary", help="duel a query strategy against the adversary")
    d.add_argument("--k", type=int, required=True)
    d.add_argument("--strategy", default="chord", choices=["chord", "bisection", "file-script"])
    d.add_argument("--script", help="JSON list of slopes for file-script")
    d.add_argument("--json", action="store_true")
    d.set_defaults(func=cmd_adversary)

    b = sub.add_parser("bench", help="run a parameter sweep and write CSV")
    b.add_argument("--config", required=True)
    b.add_argument("--out")
    b.set_defaults(func=cmd_bench)

    p = sub.add_parser("report", help="summary CSV and figures from a sweep CSV")
    p.add_argument("--csv", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_report)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ParameterError, InstanceError, CapExceeded, ValueError,
            FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ProtocolError as exc:
        print(f"protocol error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
