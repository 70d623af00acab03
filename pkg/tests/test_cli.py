from __future__ import annotations

import csv
import json
import subprocess
import sys

import pytest

from xxzcorr.cli import CORRLEN_COLUMNS, SWEEP_COLUMNS, load_config, main


def run(*args):
    return subprocess.run([sys.executable, "-m", "xxzcorr.cli", *args], capture_output=True, text=True)


def _rows(text):
    return list(csv.reader(line for line in text.splitlines() if not line.startswith("#")))


def test_corrlen_json(tmp_path, capsys):
    out = tmp_path / "c.json"
    assert main(["corrlen", "--delta", "0", "--h", "1", "--T", "0.5", "--no-meta", "--out", str(out)]) == 0
    rec = json.loads(out.read_text())
    assert {"q", "vF", "Zq", "delta", "decay_rate"} <= set(rec)
    assert "meta" not in rec
    assert rec["decay_rate"] > 0


def test_corrlen_csv_columns(tmp_path):
    out = tmp_path / "c.csv"
    assert main(["corrlen", "--delta", "0", "--h", "1", "--T", "0.5", "--format", "csv", "--out", str(out)]) == 0
    text = out.read_text()
    assert text.startswith("# generated ")
    assert [l for l in text.splitlines() if l.startswith("#")][1].startswith("# corrlen v1:")
    rows = _rows(text)
    assert rows[0] == CORRLEN_COLUMNS and len(rows) == 2


def test_regime_error_exit_code():
    r = run("corrlen", "--delta", "1.5")
    assert r.returncode == 2
    rec = json.loads(r.stderr.strip().splitlines()[-1])
    assert rec["error"] == "RegimeError" and rec["exit"] == 2


def test_io_error_exit_code(tmp_path):
    assert main(["dressed", "--points", "3", "--out", str(tmp_path / "missing" / "x.csv")]) == 4
    assert main(["corrlen", "--config", str(tmp_path / "nope.cfg")]) == 4


def test_nonconvergence_exit_code(tmp_path, monkeypatch):
    from xxzcorr import cli
    from xxzcorr.nlie import ConvergenceError

    def boom(*a, **k):
        raise ConvergenceError("forced", 1.0)
    monkeypatch.setattr(cli, "dominant_corrlen", boom)
    assert main(["corrlen", "--delta", "0", "--no-meta", "--out", str(tmp_path / "x")]) == 3


def test_config_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\ndelta = 0.0\nh=2.0\nT = 0.5\n")
    out = tmp_path / "o.json"
    assert main(["corrlen", "--config", str(cfg), "--h", "1.0", "--no-meta", "--out", str(out)]) == 0
    rec = json.loads(out.read_text())
    assert rec["params"] == {"J": 1.0, "delta": 0.0, "h": 1.0, "T": 0.5}


def test_json_config_and_unknown_key(tmp_path):
    good = tmp_path / "a.json"
    good.write_text(json.dumps({"command": "sweep", "Ts": [0.5, 1.0], "t-over-m": 0.1}))
    assert load_config(str(good)) == {"command": "sweep", "Ts": [0.5, 1.0], "t_over_m": 0.1}
    bad = tmp_path / "b.cfg"
    bad.write_text("colour = red\n")
    assert main(["corrlen", "--config", str(bad)]) == 2


def test_sweep_records_failures(tmp_path):
    out = tmp_path / "s.csv"
    assert main(["sweep", "--delta", "0", "--hs", "1,9", "--Ts", "0.5", "--jobs", "1", "--no-meta",
                 "--out", str(out)]) == 0
    rows = _rows(out.read_text())
    assert rows[0] == SWEEP_COLUMNS and len(rows) == 3
    status = [r[SWEEP_COLUMNS.index("status")] for r in rows[1:]]
    assert status == ["ok", "failed"]
    assert "RegimeError" in rows[2][SWEEP_COLUMNS.index("error")]


def test_sweep_parallel_matches_serial(tmp_path):
    args = ["sweep", "--delta", "0", "--hs", "1,2", "--Ts", "0.5,1.0", "--no-meta"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["--jobs", "1", "--out", str(a)]) == 0
    assert main(args + ["--jobs", "2", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_sweep_needs_axes():
    assert main(["sweep", "--no-meta"]) == 2


def test_lowt_scan_and_dressed(tmp_path):
    out = tmp_path / "l.json"
    assert main(["lowt-scan", "--nmax", "2", "--M", "3", "--format", "json", "--no-meta", "--out", str(out)]) == 0
    rec = json.loads(out.read_text())
    assert rec["argmin"] == "p+[] p-[] h+[0] h-[]" and rec["ties"] == []
    assert rec["value"][1] == pytest.approx(rec["target"], rel=1e-14)
    d = tmp_path / "d.csv"
    assert main(["dressed", "--points", "5", "--no-meta", "--out", str(d)]) == 0
    rows = _rows(d.read_text())
    assert rows[0] == ["lam", "eps", "eps_deriv", "Z", "p_deriv", "p"] and len(rows) == 6


def test_ff_oracle(tmp_path):
    out = tmp_path / "f.csv"
    assert main(["ff-oracle", "--J", "1.0", "--h", "1.0", "--T", "0.5", "--no-meta", "--out", str(out)]) == 0
    rows = _rows(out.read_text())
    rec = dict(zip(rows[0], rows[1]))
    assert float(rec["rel_diff"]) < 1e-6
    assert main(["ff-oracle", "--delta", "0.3"]) == 2


def test_console_entry_point_help():
    r = run("--help")
    assert r.returncode == 0 and "corrlen" in r.stdout
