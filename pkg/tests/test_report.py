import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geomcmp.report import ROW_FIELDS, VerificationReport, atomic_write, default_tol

finite = st.floats(-1e6, 1e6)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(finite, finite), min_size=1, max_size=30), st.floats(0, 1e-3))
def test_pass_flag_and_summary(pairs, tol):
    rep = VerificationReport("r", "test", {}, tol)
    for i, (v, b) in enumerate(pairs):
        rep.add_row(i, "c", 0.0, v, b)
    for row in rep.rows:
        assert row["margin"] == row["value"] - row["bound"]
        assert row["pass"] == (row["margin"] <= tol)
    assert rep.summary()["max_margin"] == max(r["margin"] for r in rep.rows)
    assert rep.passed == all(r["pass"] for r in rep.rows)


def test_serialization(tmp_path):
    rep = VerificationReport("demo", "test", {"n": 2}, 1e-8, seed=3)
    rep.add_row(0, "a", 0.5, 1.0, 2.0)
    rep.add_row(1, "b", 0.25, 1.0 / 3.0, 0.0, margin=float("nan"))
    rep.focal_times = [None, 0.5]
    rep.notes = {"x": float("inf")}
    data = json.loads(rep.to_json())
    assert data["summary"]["seed"] == 3
    assert data["summary"]["version"]
    assert data["notes"]["x"] is None
    assert data["rows"][1]["margin"] is None
    assert "sub-family" in data["hypothesis_gap"]
    lines = rep.to_csv().splitlines()
    assert lines[0] == ",".join(ROW_FIELDS)
    assert lines[2] == "1,b,0.25,0.333333333333,0,nan,false"
    json_path, csv_path = rep.write(tmp_path / "out")
    assert json_path.read_text() == rep.to_json()
    assert csv_path.read_text() == rep.to_csv()
    assert sorted(p.name for p in (tmp_path / "out").iterdir()) == ["demo.csv", "demo.json"]


def test_empty_report_summary():
    rep = VerificationReport("e", "test", {}, 1e-8)
    assert rep.summary()["max_margin"] is None
    assert rep.max_margin == -math.inf and rep.passed


def test_atomic_write_replaces(tmp_path):
    path = tmp_path / "f.txt"
    atomic_write(path, "one")
    atomic_write(path, "two")
    assert path.read_text() == "two"
    assert path.stat().st_mode & 0o777 == 0o644
    assert [p.name for p in tmp_path.iterdir()] == ["f.txt"]


def test_default_tol(monkeypatch):
    monkeypatch.delenv("GEOMCMP_TOL", raising=False)
    assert default_tol() == 1e-8
    monkeypatch.setenv("GEOMCMP_TOL", "1e-6")
    assert default_tol() == 1e-6
    monkeypatch.setenv("GEOMCMP_TOL", "abc")
    with pytest.raises(ValueError):
        default_tol()
    monkeypatch.setenv("GEOMCMP_TOL", "-1")
    with pytest.raises(ValueError):
        default_tol()
