"""Acceptance criteria A1-A9, each checked at its stated tolerance and runtime limit."""
import contextlib
import json
import math
import time
from pathlib import Path

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from geomcmp import InfimumNotAttained, cs, period, sn
from geomcmp.bounds import eigen_lower_bound, rho_max_real
from geomcmp.cli import main
from geomcmp.eigen import verify_eigen_bound
from geomcmp.errors import HypothesisViolated
from geomcmp.jacobi import (
    cusp_field,
    first_focal,
    integrate,
    model_field,
    random_admissible_field,
    verify_basic_inequality,
    verify_kahler_comparison,
    verify_real_comparison,
)
from geomcmp.models import (
    WarpProfile,
    laplacian_rho_profile,
    random_perturbed_disk,
    read_profile_csv,
    rho_max_profile,
    rigidity_diagnostic,
)

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = sorted((ROOT / "configs").glob("*.json"))


@contextlib.contextmanager
def criterion(label, limit_s):
    """Time the block, record a PASS/FAIL line and enforce the runtime limit."""
    info = {}
    start = time.perf_counter()
    try:
        yield info
    except BaseException as exc:
        elapsed = time.perf_counter() - start
        line = f"{label} FAIL ({elapsed:.2f} s, limit {limit_s} s): {type(exc).__name__}: {str(exc)[:200]}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        raise
    elapsed = time.perf_counter() - start
    ok = elapsed < limit_s
    detail = "; ".join(f"{k}={v}" for k, v in info.items())
    line = f"{label} {'PASS' if ok else 'FAIL'} ({elapsed:.2f} s, limit {limit_s} s): {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_a1_model_function_identities():
    with criterion("A1 model-function identities", 1.0) as info:
        rng = np.random.default_rng(2024)
        worst_w = worst_add = 0.0
        checks = 0
        for k in rng.uniform(-4.0, 4.0, 100):
            span = 0.9 * period(k) if k > 0 else 3.0
            a = rng.uniform(0.0, 0.5 * span, 100)
            b = rng.uniform(0.0, 0.5 * span, 100)
            s_a, c_a, s_b, c_b = sn(k, a), cs(k, a), sn(k, b), cs(k, b)
            t = a + b
            s_t, c_t = sn(k, t), cs(k, t)
            scale_w = np.maximum(1.0, c_t ** 2 + abs(k) * s_t ** 2)
            worst_w = max(worst_w, float(np.max(np.abs(c_t ** 2 + k * s_t ** 2 - 1.0) / scale_w)))
            scale = np.maximum(1.0, np.maximum(np.abs(s_a * c_b) + np.abs(c_a * s_b),
                                               np.abs(c_a * c_b) + np.abs(k * s_a * s_b)))
            err = np.maximum(np.abs(s_t - (s_a * c_b + c_a * s_b)), np.abs(c_t - (c_a * c_b - k * s_a * s_b)))
            worst_add = max(worst_add, float(np.max(err / scale)))
            checks += len(t)
        ks = rng.uniform(-1e-8, 1e-8, 100)
        ts = rng.uniform(0.0, 10.0, 100)
        bridge = max(abs(sn(k, t) - t) - abs(k) * t ** 3 for k, t in zip(ks, ts))
        info.update(checks=checks, wronskian=f"{worst_w:.2e}", addition=f"{worst_add:.2e}",
                    bridge_excess=f"{bridge:.2e}")
        assert checks == 10 ** 4
        assert worst_w <= 1e-12
        assert worst_add <= 1e-11
        assert bridge <= 0.0


def test_a2_focal_points_reproduce_distance_bound():
    grid = {-1.0: [1.1, 1.5, 2.0, 3.0, 5.0], 0.0: [0.25, 0.5, 1.0, 2.0, 4.0], 1.0: [-0.5, 0.0, 0.5, 1.0, 2.0]}
    with criterion("A2 focal points reproduce the distance bound", 10.0) as info:
        worst = 0.0
        for k, hs in grid.items():
            for h in hs:
                expected = rho_max_real(3, k, h)
                focal = first_focal(model_field(2, k), h * np.eye(2), 1.02 * expected, 1e-3)
                worst = max(worst, abs(focal - expected) / expected)
        info.update(cases=15, worst_rel_error=f"{worst:.2e}")
        assert worst <= 1e-6


def test_a3_real_laplacian_comparison():
    with criterion("A3 real Laplacian comparison, 500 trials", 60.0) as info:
        report = verify_real_comparison(4, -1.0, 1.5, trials=500, seed=42)
        info.update(status=report.status, max_margin=f"{report.max_margin:.2e}",
                    model_equality=f"{report.notes['model_equality']:.2e}")
        assert report.status == "pass" and report.passed
        assert report.max_margin <= 1e-8
        assert report.notes["model_equality"] <= 1e-9


def test_a4_kahler_hessian_comparison():
    with criterion("A4 Kahler Hessian comparison, 3 x 500 trials", 120.0) as info:
        for k, h in ((-1.0, 1.0), (0.0, 1.0), (1.0, 1.0)):
            report = verify_kahler_comparison(2, k, h, trials=500, seed=7)
            info[f"k={k:g}"] = (f"{report.status} max_margin={report.max_margin:.2e} "
                                f"model_eq={report.notes['model_equality']:.1e}")
            assert report.status == "pass" and report.passed
            assert {r["check"].removesuffix("-worst") for r in report.rows} == {"hopf", "pair0", "trace"}
            assert report.notes["model_equality"] <= 1e-9


def test_a5_cusp_sharpness():
    with criterion("A5 cusp counterexample", 1.0) as info:
        n = 3
        traj = integrate(cusp_field(n - 1), np.eye(n - 1), 50.0, 1e-3)
        deviation = float(np.max(np.abs(traj.laplacian + (n - 1))))
        cusp = WarpProfile.cusp(n)
        with pytest.raises(InfimumNotAttained):
            rho_max_profile(cusp, -1.0)
        info.update(focal=traj.focal_s, max_deviation=f"{deviation:.1e}",
                    profile_laplacian=laplacian_rho_profile(cusp, 50.0))
        assert traj.focal_s is None
        assert deviation <= 1e-9


def test_a6_eigenvalue_bound():
    with criterion("A6 eigenvalue lower bound", 60.0) as info:
        cases = [(1, 0.0, 1.0), (2, 0.0, 1.0), (1, 1.0, 0.5), (2, -1.0, 1.0)]
        for n, k, h in cases:
            report = verify_eigen_bound(n, k, h, [h], grid=1024)
            d = report.notes["per_radius"][0]
            assert abs(d["lambda_fd"] - d["lambda_shooting"]) <= d["error_fd"] + d["error_shooting"]
            assert d["slack"] > 0 and report.passed
            assert d["lambda_fd"] - d["error_fd"] >= eigen_lower_bound(n, k, h)
            if k == 0.0:
                reference = {1: 5.7832, 2: 14.682}[n]
                assert abs(d["lambda_fd"] - d["lambda_shooting"]) <= 1e-3 * d["lambda_shooting"]
                assert abs(d["lambda_fd"] - reference) <= 1e-3 * reference
            info[f"(n={n},k={k:g},R={h:g})"] = f"lambda1={d['lambda_fd']:.6f} bound={report.notes['bound']:.4f}"


def test_a7_rigidity_diagnostic():
    with criterion("A7 rigidity diagnostic", 30.0) as info:
        model = rigidity_diagnostic(WarpProfile.space_form(3, 1.0, 1.0), 1.0)
        assert model.verdict == "Rigid"
        assert abs(model.deficit) <= 1e-9 and model.metric_gap <= 1e-9
        verdicts = {}
        admissible = skipped = 0
        seeds = np.random.SeedSequence(77).spawn(2000)
        for i, child in enumerate(seeds):
            if admissible == 1000:
                break
            k = (-1.0, 0.0, 1.0)[i % 3]
            try:
                res = rigidity_diagnostic(random_perturbed_disk(3, k, child), k)
            except HypothesisViolated:
                skipped += 1
                continue
            admissible += 1
            verdicts[res.verdict] = verdicts.get(res.verdict, 0) + 1
            assert res.deficit >= -1e-9
        shipped = rigidity_diagnostic(read_profile_csv(ROOT / "configs" / "profiles" / "perturbed_disk.csv", 3), 0.0)
        info.update(admissible=admissible, skipped=skipped, verdicts=verdicts,
                    shipped=f"{shipped.verdict} deficit={shipped.deficit:.4f}")
        assert admissible == 1000
        assert "Inconsistent" not in verdicts
        assert shipped.verdict == "NonRigid" and shipped.deficit > 1e-3


def test_a8_index_form_minimality():
    with criterion("A8 index form minimality", 10.0) as info:
        field = random_admissible_field(4, 1.0, seed=8, s_max=2.0, roughness=0.5)
        report = verify_basic_inequality(field, 0.3 * np.eye(4), 0.6, trials=200, seed=8)
        notes = report.notes
        info.update(trials=len(report.rows), equality_gap=notes["equality_gap"],
                    min_gap=f"{notes['min_gap_perturbed']:.3e}",
                    closed_form_error=f"{notes['closed_form_error']:.1e}")
        assert len(report.rows) == 200 and report.passed
        assert abs(notes["equality_gap"]) <= 1e-8
        assert notes["min_gap_perturbed"] > 1e-8


def test_a9_cli_determinism_and_exit_codes(tmp_path):
    with criterion("A9 CLI determinism and exit codes", 120.0) as info:
        assert len(CONFIGS) == 3
        runs = []
        for name in ("first", "second"):
            out = tmp_path / name
            for cfg in CONFIGS:
                assert main(["verify", "--config", str(cfg), "--out", str(out), "--jobs", "2"]) == 0
            runs.append(out)
        files = sorted(p.name for p in runs[0].iterdir() if not p.name.endswith(".timing.json"))
        for name in files:
            assert (runs[0] / name).read_bytes() == (runs[1] / name).read_bytes(), name
        assert main(["report", str(runs[0])]) == 0
        summary = (runs[0] / "summary.csv").read_text().splitlines()
        assert all(line.split(",")[5] == "true" for line in summary[1:])

        missed = tmp_path / "missed.json"
        missed.write_text(json.dumps({"scenarios": [{"id": "dip", "kind": "riccati-real", "params": {
            "n": 3, "k": 0.0, "h": 0.5, "negative_control": "dip"}}]}))
        broken = tmp_path / "broken.json"
        broken.write_text(json.dumps({"scenarios": [{"id": "x", "kind": "bound", "params": {"n": 3}}]}))
        codes = {
            "demo": 0,
            "missed": main(["verify", "--config", str(missed), "--out", str(tmp_path / "m")]),
            "config_error": main(["verify", "--config", str(broken), "--out", str(tmp_path / "b")]),
            "domain_error": main(["bound", "--kind", "real", "--n", "3", "--k", "-1", "--h", "1"]),
            "grid_too_coarse": main(["eigen", "--n", "1", "--k", "0", "--h", "1", "--grid", "16",
                                     "--out", str(tmp_path / "e")]),
        }
        info.update(files=len(files), scenarios=len(summary) - 1, exit_codes=codes)
        assert codes == {"demo": 0, "missed": 1, "config_error": 2, "domain_error": 2, "grid_too_coarse": 2}
