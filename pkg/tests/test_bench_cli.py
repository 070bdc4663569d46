import json

import pytest
from gmpy2 import mpq

from chordbench.bench import (COLUMNS, ConfigError, SweepConfig, adversary_duel, emit_csv,
                              parse_csv, pool_size, run_sweep, summarize)
from chordbench.cli import EXIT_CONFIG, EXIT_INVALID, EXIT_OK, main
from chordbench.formats import load_instance, points_to_json
from chordbench.geometry import Point

Q = mpq


def _write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


class TestSweep:
    def test_ig_cell(self):
        cfg = SweepConfig("ig", {"H": ["1"], "L": ["1"], "k": [4], "j": [3]}, metric="horizontal")
        (row,) = run_sweep(cfg, workers=1)
        assert row.chd_calls == 5 and row.opt_size == 3 and row.valid
        assert row.ratio_exact == "5/3" and row.ratio == pytest.approx(5 / 3)

    def test_csv_roundtrip_and_columns(self):
        cfg = SweepConfig("lb", {"m": [4, 8], "eps": ["1/256"]}, trials=1)
        rows = run_sweep(cfg, workers=1)
        text = emit_csv(rows)
        header = text.splitlines()[0].split(",")
        assert tuple(header[:len(COLUMNS)]) == COLUMNS
        assert parse_csv(text) == rows

    def test_parallel_matches_serial(self, monkeypatch):
        cfg = SweepConfig("avg-lb", {"eps": [0.05]}, trials=4, seed=3)
        serial = run_sweep(cfg, workers=1)
        monkeypatch.setenv("CHORD_BENCH_THREADS", "2")
        assert pool_size() == 2
        parallel = run_sweep(cfg)
        strip = lambda rs: [(r.trial, r.chd_calls, r.opt_size, r.ratio) for r in rs]
        assert strip(serial) == strip(parallel)

    def test_summary(self):
        cfg = SweepConfig("avg-lb", {"eps": [0.05, 0.02]}, trials=3)
        table = summarize(run_sweep(cfg, workers=1), ["eps"])
        assert len(table) == 2 and all(t["count"] == 3 for t in table)

    @pytest.mark.parametrize("bad", [
        {"family": "nope"},
        {"family": "ig", "metric": "manhattan"},
        {"family": "ig", "grid": {"zeta": [1]}},
        {"family": "ig", "grid": {"k": []}},
        {"family": "ig", "delta": "1/100", "metric": "horizontal"},
        {"family": "file"},
        {"family": "ig", "bogus": 1},
    ])
    def test_config_errors(self, bad):
        with pytest.raises(ConfigError):
            SweepConfig.from_dict(bad)


class TestAdversaryDuel:
    def test_chord_never_certifies(self):
        rep = adversary_duel(8)
        assert rep.queries == 7
        assert all(Q(e) > Q(1, 2) for e in rep.certified_errors)
        assert rep.opt_size == 2

    def test_bisection_and_script(self):
        assert adversary_duel(6, "bisection").queries <= 5
        rep = adversary_duel(6, "file-script", ["1", "1/2", "1/4"])
        assert rep.queries == 3


class TestCli:
    def test_gen_run_opt_verify(self, tmp_path, capsys):
        inst = str(tmp_path / "ig.json")
        assert main(["gen", "--family", "ig", "--k", "4", "--j", "3", "--out", inst]) == EXIT_OK
        assert len(load_instance(inst)) == 6
        trace = tmp_path / "t.json"
        assert main(["run", "--instance", inst, "--eps", "1/2", "--metric", "horizontal",
                     "--trace", str(trace)]) == EXIT_OK
        assert "comb_calls=5" in capsys.readouterr().out
        assert json.loads(trace.read_text())["comb_calls"] == 5
        wit = str(tmp_path / "w.json")
        assert main(["opt", "--instance", inst, "--eps", "1/2", "--metric", "horizontal",
                     "--out", wit]) == EXIT_OK
        assert "size=3" in capsys.readouterr().out
        assert main(["verify", "--instance", inst, "--set", wit, "--eps", "1/2",
                     "--metric", "horizontal"]) == EXIT_OK
        assert main(["verify", "--instance", inst, "--set", wit, "--eps", "1/100",
                     "--metric", "horizontal"]) == EXIT_INVALID

    def test_verify_two_point_set(self, tmp_path, capsys):
        inst = str(tmp_path / "ig.json")
        main(["gen", "--family", "ig", "--out", inst])
        s = tmp_path / "s.json"
        s.write_text(points_to_json([Point(Q(1), Q(2)), Point(Q(2), Q(1))]))
        assert main(["verify", "--instance", inst, "--set", str(s), "--eps", "1/2",
                     "--metric", "horizontal"]) == EXIT_INVALID
        assert "worst=3/4" in capsys.readouterr().out

    def test_stochastic_gen(self, tmp_path):
        for fam, extra in (("avg-lb", ["--eps", "0.05"]), ("ppp", ["--nu", "500"]),
                           ("balanced", ["--n", "200", "--gamma", "0.2"])):
            out = str(tmp_path / f"{fam}.json")
            assert main(["gen", "--family", fam, *extra, "--out", out]) == EXIT_OK
            assert load_instance(out).mode == "float"

    def test_bench_and_report(self, tmp_path):
        cfg = _write(tmp_path / "c.json", {"family": "lb", "grid": {"m": [4], "eps": ["1/256"]},
                                           "metric": "ratio"})
        csv_path = tmp_path / "out.csv"
        assert main(["bench", "--config", cfg, "--out", str(csv_path)]) == EXIT_OK
        rows = parse_csv(csv_path.read_text())
        assert len(rows) == 1 and rows[0].valid
        rep = tmp_path / "rep"
        assert main(["report", "--csv", str(csv_path), "--out", str(rep)]) == EXIT_OK
        for name in ("summary.csv", "ratio_vs_eps.png", "calls_vs_opt.png"):
            assert (rep / name).stat().st_size > 0

    def test_adversary(self, capsys):
        assert main(["adversary", "--k", "5", "--json"]) == EXIT_OK
        out = json.loads(capsys.readouterr().out)
        assert out["queries"] == 4

    def test_config_errors_exit_3(self, tmp_path):
        bad = _write(tmp_path / "bad.json", {"family": "nope"})
        assert main(["bench", "--config", bad, "--out", str(tmp_path / "x.csv")]) == EXIT_CONFIG
        assert main(["run", "--instance", str(tmp_path / "missing.json"), "--eps", "1/2",
                     "--metric", "ratio"]) == EXIT_CONFIG
        assert main(["adversary", "--k", "4", "--strategy", "file-script"]) == EXIT_CONFIG
