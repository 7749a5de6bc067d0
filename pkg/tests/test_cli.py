import csv
import json
import subprocess
import sys
from pathlib import Path

import pytest

from geomcmp.cli import main

SMALL = {
    "scenarios": [
        {"id": "b-real", "kind": "bound", "params": {"flavor": "real", "n": 3, "k": 0.0, "h": 0.5}},
        {"id": "b-bad", "kind": "bound", "params": {"flavor": "real", "n": 3, "k": -1.0, "h": 1.0},
         "expect": "expect-hypothesis-violation"},
        {"id": "r-real", "kind": "riccati-real", "params": {"n": 3, "k": 0.0, "h": 0.5, "trials": 5, "seed": 2}},
        {"id": "r-dip", "kind": "riccati-real", "params": {"n": 3, "k": 0.0, "h": 0.5, "negative_control": "dip"},
         "expect": "expect-hypothesis-violation"},
        {"id": "cusp", "kind": "cusp", "params": {"n": 3, "s_max": 5.0}},
    ]
}


def write_config(tmp_path, data, name="c.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def test_bound_real(capsys):
    assert main(["bound", "--kind", "real", "--n", "3", "--k", "0", "--h", "0.5"]) == 0
    assert "rho_max 2\n" in capsys.readouterr().out


def test_bound_kahler_json(capsys):
    assert main(["bound", "--kind", "kahler", "--n", "2", "--k", "0", "--Hb", "6", "--json"]) == 0
    record = json.loads(capsys.readouterr().out)
    assert record["h"] == pytest.approx(0.5)
    assert record["eigen_lower_bound"] == pytest.approx(9.0)


def test_bound_domain_error(capsys):
    assert main(["bound", "--kind", "real", "--n", "3", "--k", "-1", "--h", "1"]) == 2
    assert "sqrt(-k)" in capsys.readouterr().err


def test_bad_flags():
    assert main(["bound", "--n", "x"]) == 2
    assert main(["nope"]) == 2
    assert main(["verify"]) == 2
    assert main(["verify", "--config", "c.json", "--jobs", "0"]) == 2


def test_verify_expectations(tmp_path, capsys):
    cfg = write_config(tmp_path, SMALL)
    out = tmp_path / "out"
    assert main(["verify", "--config", cfg, "--out", str(out)]) == 0
    names = sorted(p.name for p in out.iterdir())
    for sc in SMALL["scenarios"]:
        assert {f"{sc['id']}.json", f"{sc['id']}.csv", f"{sc['id']}.timing.json"} <= set(names)
    dip = json.loads((out / "r-dip.json").read_text())
    assert dip["summary"]["status"] == "hypothesis-violation"
    assert dip["notes"]["expectation_met"] is True
    cusp = json.loads((out / "cusp.json").read_text())
    assert cusp["summary"]["focal_times"] == [None]


def test_verify_missed_expectation(tmp_path):
    data = {"scenarios": [
        {"id": "x", "kind": "riccati-real", "params": {"n": 3, "k": 0.0, "h": 0.5, "negative_control": "dip"}},
    ]}
    assert main(["verify", "--config", write_config(tmp_path, data), "--out", str(tmp_path / "o")]) == 1


@pytest.mark.parametrize("data", [
    {"scenarios": [{"id": "a", "kind": "bound", "params": {"n": 3, "k": 0.0, "h": 1.0}}] * 2},
    {"scenarios": [{"id": "a", "kind": "warp", "params": {}}]},
    {"scenarios": [{"id": "a", "kind": "bound", "params": {"n": 3, "k": 0.0, "zz": 1}}]},
    {"scenarios": [{"id": "a/b", "kind": "bound", "params": {"n": 3, "k": 0.0, "h": 1.0}}]},
    {"scenarios": [{"id": "a", "kind": "bound", "params": {"n": 3, "k": 0.0, "h": 1.0}, "expect": "fail"}]},
    # a precondition failure without the violation expectation is a config error
    {"scenarios": [{"id": "a", "kind": "bound", "params": {"n": 3, "k": -1.0, "h": 1.0}}]},
    {"rows": []},
])
def test_config_errors(tmp_path, data):
    assert main(["verify", "--config", write_config(tmp_path, data), "--out", str(tmp_path / "o")]) == 2


def test_unreadable_config(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["verify", "--config", str(bad)]) == 2
    assert main(["verify", "--config", str(tmp_path / "missing.json")]) == 2


def test_jobs_do_not_change_bytes(tmp_path):
    cfg = write_config(tmp_path, SMALL)
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["verify", "--config", cfg, "--out", str(a), "--jobs", "1"]) == 0
    assert main(["verify", "--config", cfg, "--out", str(b), "--jobs", "3"]) == 0
    for path in a.iterdir():
        if not path.name.endswith(".timing.json"):
            assert path.read_bytes() == (b / path.name).read_bytes()


def test_seed_flag_fills_missing_seeds(tmp_path):
    data = {"scenarios": [{"id": "r", "kind": "riccati-real", "params": {"n": 3, "k": 0.0, "h": 0.5, "trials": 3}}]}
    cfg = write_config(tmp_path, data)
    main(["verify", "--config", cfg, "--out", str(tmp_path / "s1"), "--seed", "1"])
    main(["verify", "--config", cfg, "--out", str(tmp_path / "s2"), "--seed", "2"])
    one = json.loads((tmp_path / "s1" / "r.json").read_text())
    two = json.loads((tmp_path / "s2" / "r.json").read_text())
    assert one["summary"]["seed"] == 1 and two["summary"]["seed"] == 2
    assert one["rows"] != two["rows"]


def test_eigen_command(tmp_path, capsys):
    assert main(["eigen", "--n", "1", "--k", "0", "--h", "1", "--R", "1", "--grid", "256",
                 "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "lambda1 5.783" in out and "bound 0.25" in out and out.rstrip().endswith("pass")
    assert (tmp_path / "eigen.json").exists()
    assert main(["eigen", "--n", "1", "--k", "0", "--h", "1", "--grid", "16", "--out", str(tmp_path)]) == 2
    assert main(["eigen", "--n", "1", "--k", "0", "--h", "1", "--R", "2", "--out", str(tmp_path)]) == 2


def test_eigen_config_runs_only_eigen(tmp_path):
    data = {"scenarios": SMALL["scenarios"] + [
        {"id": "e", "kind": "eigen", "params": {"n": 1, "k": 0.0, "h": 1.0, "grid": 256}}]}
    out = tmp_path / "o"
    assert main(["eigen", "--config", write_config(tmp_path, data), "--out", str(out)]) == 0
    assert sorted(p.name for p in out.iterdir()) == ["e.csv", "e.json", "e.timing.json"]


def test_report_command(tmp_path, capsys):
    cfg = write_config(tmp_path, SMALL)
    out = tmp_path / "out"
    main(["verify", "--config", cfg, "--out", str(out)])
    capsys.readouterr()
    assert main(["report", str(out)]) == 0
    rows = list(csv.DictReader((out / "summary.csv").open()))
    assert [r["scenario_id"] for r in rows] == sorted(sc["id"] for sc in SMALL["scenarios"])
    assert all(r["pass"] == "true" for r in rows)
    assert list(rows[0]) == ["scenario_id", "kind", "n", "k", "h", "pass", "max_margin", "runtime_ms"]
    assert all(float(r["runtime_ms"]) >= 0 for r in rows)


def test_report_empty_and_duplicates(tmp_path, capsys):
    empty = tmp_path / "empty"
    empty.mkdir()
    assert main(["report", str(empty)]) == 0
    assert (empty / "summary.csv").read_text() == "scenario_id,kind,n,k,h,pass,max_margin,runtime_ms\n"
    dup = tmp_path / "dup"
    dup.mkdir()
    report = {"scenario_id": "same", "kind": "bound", "params": {}, "summary": {"pass": True, "max_margin": 0}}
    (dup / "one.json").write_text(json.dumps(report))
    (dup / "two.json").write_text(json.dumps(report))
    assert main(["report", str(dup)]) == 2
    bad = tmp_path / "bad"
    bad.mkdir()
    (bad / "x.json").write_text("{")
    assert main(["report", str(bad)]) == 2
    assert main(["report", str(tmp_path / "missing")]) == 2


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "geomcmp", "bound", "--kind", "kahler", "--n", "1", "--k", "1",
                           "--Hb", "2"], capture_output=True, text=True, cwd=tmp_path)
    assert proc.returncode == 0
    assert "h 0.392699081" in proc.stdout
    proc = subprocess.run([sys.executable, "-m", "geomcmp", "bound", "--kind", "kahler", "--n", "1", "--k", "-1",
                           "--Hb", "2"], capture_output=True, text=True, cwd=tmp_path)
    assert proc.returncode == 2 and "infimum" in proc.stderr
