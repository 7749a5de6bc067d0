"""Command line front end: ``geomcmp bound | verify | eigen | report``.

Exit codes: 0 when every expectation is met, 1 when a scenario misses its
expectation, 2 for invalid input (bad flags, config errors, domain errors).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import (
    eigen_lower_bound,
    hessian_bounds_kahler,
    invert_KH,
    laplace_bound_kahler,
    laplace_bound_real,
    model_H,
    model_KH,
    rho_max_real,
)
from .eigen import verify_eigen_bound
from .errors import DomainError, GridTooCoarse, HypothesisViolated
from .jacobi import (
    cusp_field,
    dip_field,
    integrate,
    model_field,
    random_admissible_field,
    verify_basic_inequality,
    verify_kahler_comparison,
    verify_real_comparison,
)
from .modelfn import ct
from .models import (
    WarpProfile,
    random_perturbed_disk,
    read_profile_csv,
    rho_max_profile,
    rigidity_diagnostic,
)
from .report import VerificationReport, atomic_write, default_tol

KINDS = ("bound", "riccati-real", "riccati-kahler", "rigidity", "eigen", "cusp", "index-form")
EXPECTATIONS = ("pass", "expect-hypothesis-violation")
SUMMARY_FIELDS = ("scenario_id", "kind", "n", "k", "h", "pass", "max_margin", "runtime_ms")
ID_PATTERN = re.compile(r"^[A-Za-z0-9][A-Za-z0-9_.-]*$")

PARAMS = {
    "bound": {"flavor", "n", "k", "h", "Hb"},
    "riccati-real": {"n", "k", "h", "trials", "seed", "s_grid", "step", "shape_rule", "negative_control"},
    "riccati-kahler": {"n", "k", "h", "trials", "seed", "s_grid", "step", "negative_control"},
    "rigidity": {"n", "k", "h", "R", "profile", "trials", "seed", "tol", "expect_verdict"},
    "eigen": {"n", "k", "h", "R", "grid"},
    "cusp": {"n", "s_max", "step", "s_grid"},
    "index-form": {"m", "k", "flavor", "field", "S", "ell", "trials", "seed", "step"},
}
REQUIRED = {
    "bound": {"n", "k"},
    "riccati-real": {"n", "k", "h"},
    "riccati-kahler": {"n", "k", "h"},
    "rigidity": {"n", "k"},
    "eigen": {"n", "k", "h"},
    "cusp": {"n"},
    "index-form": {"m", "k", "ell", "S"},
}


class ConfigError(Exception):
    """Invalid scenario configuration."""


# ---------------------------------------------------------------- config

def load_config(path) -> list[dict]:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict) or not isinstance(data.get("scenarios"), list):
        raise ConfigError("config must be an object with a 'scenarios' list")
    seen = set()
    scenarios = []
    for i, sc in enumerate(data["scenarios"]):
        if not isinstance(sc, dict):
            raise ConfigError(f"scenario #{i} is not an object")
        sid = sc.get("id")
        if not isinstance(sid, str) or not ID_PATTERN.match(sid):
            raise ConfigError(f"scenario #{i}: id must be a non-empty file-safe string, got {sid!r}")
        if sid in seen:
            raise ConfigError(f"duplicate scenario id {sid!r}")
        seen.add(sid)
        kind = sc.get("kind")
        if kind not in KINDS:
            raise ConfigError(f"{sid}: unknown kind {kind!r}")
        params = sc.get("params", {})
        if not isinstance(params, dict):
            raise ConfigError(f"{sid}: params must be an object")
        unknown = set(params) - PARAMS[kind]
        if unknown:
            raise ConfigError(f"{sid}: unknown parameters {sorted(unknown)} for kind {kind}")
        missing = REQUIRED[kind] - set(params)
        if missing:
            raise ConfigError(f"{sid}: missing parameters {sorted(missing)}")
        expect = sc.get("expect", "pass")
        if expect not in EXPECTATIONS:
            raise ConfigError(f"{sid}: unknown expectation {expect!r}")
        extra = set(sc) - {"id", "kind", "params", "expect", "description"}
        if extra:
            raise ConfigError(f"{sid}: unknown keys {sorted(extra)}")
        scenarios.append({"id": sid, "kind": kind, "params": params, "expect": expect,
                          "base": str(path.parent)})
    return scenarios


# ---------------------------------------------------------------- scenario runners

def _run_bound(sid, p, tol, seed):
    flavor = p.get("flavor", "real")
    n, k = int(p["n"]), float(p["k"])
    report = VerificationReport(sid, "bound", dict(p), tol, seed=seed)
    if flavor == "real":
        h = float(p["h"])
        rho = rho_max_real(n, k, h)
        report.add_row(0, "arccot-inverse", rho, ct(k, rho), h, margin=abs(ct(k, rho) - h))
        report.notes = {"rho_max": rho}
    elif flavor == "kahler":
        Hb = float(p["Hb"])
        h = invert_KH(n, k, Hb)
        KH = model_KH(n, k, h)
        report.add_row(0, "KH-inverse", h, KH, Hb, margin=abs(KH - Hb))
        report.notes = {"rho_max": h}
    else:
        raise ConfigError(f"{sid}: flavor must be 'real' or 'kahler'")
    return report


def _run_riccati(sid, kind, p, tol, seed):
    n, k, h = int(p["n"]), float(p["k"]), float(p["h"])
    common = dict(trials=int(p.get("trials", 100)), seed=int(p.get("seed", seed)),
                  s_grid=int(p.get("s_grid", 40)), step=float(p.get("step", 1e-3)), tol=tol,
                  scenario_id=sid)
    control = p.get("negative_control")
    if control not in (None, "dip"):
        raise ConfigError(f"{sid}: negative_control must be 'dip'")
    if kind == "riccati-real":
        fields = [dip_field(n - 1, k, 0.2 * h, 0.8 * h, depth=2.0)] if control else None
        report = verify_real_comparison(n, k, h, fields=fields, shape_rule=p.get("shape_rule", "matrix"), **common)
    else:
        fields = [dip_field(2 * n - 1, k, 0.2 * h, 0.8 * h, depth=2.0, flavor="kahler")] if control else None
        report = verify_kahler_comparison(n, k, h, fields=fields, **common)
    report.params = dict(p, **{"seed": common["seed"]})
    return report


def _load_profile(source, n, base):
    if source == "model":
        return None
    path = Path(source)
    if not path.is_absolute():
        path = Path(base) / path
    return read_profile_csv(path, n)


def _run_rigidity(sid, p, tol, seed, base):
    n, k = int(p["n"]), float(p["k"])
    dtol = float(p.get("tol", 1e-9))
    seed = int(p.get("seed", seed))
    report = VerificationReport(sid, "rigidity", dict(p, seed=seed), tol, seed=seed)
    source = p.get("profile", "model")
    if source == "random":
        trials = int(p.get("trials", 100))
        profiles = []
        skipped = 0
        children = np.random.SeedSequence(seed).spawn(trials * 4)
        for child in children:
            if len(profiles) == trials:
                break
            prof = random_perturbed_disk(n, k, child)
            try:
                profiles.append((prof, rigidity_diagnostic(prof, k, dtol)))
            except HypothesisViolated:
                skipped += 1
        report.notes["skipped_inadmissible"] = skipped
    else:
        if source == "model":
            R = float(p.get("R", p.get("h", 1.0)))
            prof = WarpProfile.space_form(n, k, R)
        else:
            prof = _load_profile(source, n, base)
        h = p.get("h")
        profiles = [(prof, rigidity_diagnostic(prof, k, dtol, h=None if h is None else float(h)))]
    verdicts = {}
    inconsistent = []
    for t, (prof, res) in enumerate(profiles):
        verdicts[res.verdict] = verdicts.get(res.verdict, 0) + 1
        if res.verdict == "Inconsistent":
            inconsistent.append(t)
        report.add_row(t, "distance-bound", res.h, prof.R, res.h)
    report.notes.update({"verdicts": verdicts, "inconsistent": inconsistent})
    if len(profiles) == 1:
        res = profiles[0][1]
        report.notes.update({"deficit": res.deficit, "metric_gap": res.metric_gap, "verdict": res.verdict})
    wanted = p.get("expect_verdict")
    report.status = "pass"
    if inconsistent:
        report.status = "theorem-failure"
    elif wanted is not None and set(verdicts) != {wanted}:
        report.status = "unexpected-verdict"
    return report


def _run_eigen(sid, p, tol):
    n, k, h = int(p["n"]), float(p["k"]), float(p["h"])
    R = p.get("R", [h])
    R = R if isinstance(R, list) else [R]
    report = verify_eigen_bound(n, k, h, R, grid=int(p.get("grid", 1024)), tol=tol, scenario_id=sid)
    report.params = dict(p)
    return report


def _run_cusp(sid, p, tol):
    n = int(p["n"])
    s_max = float(p.get("s_max", 50.0))
    s_grid = int(p.get("s_grid", 50))
    traj = integrate(cusp_field(n - 1), np.eye(n - 1), s_max, float(p.get("step", 1e-3)))
    report = VerificationReport(sid, "cusp", dict(p), tol)
    idx = np.unique(np.round(np.linspace(0, len(traj.s) - 1, s_grid + 1)).astype(int))
    lap = traj.laplacian
    for i in idx:
        report.add_row(0, "laplacian", traj.s[i], lap[i], -(n - 1), margin=abs(lap[i] + (n - 1)))
    report.focal_times = [traj.focal_s]
    report.notes = {"max_deviation": float(np.nanmax(np.abs(lap + (n - 1))))}
    try:
        rho_max_profile(WarpProfile.cusp(n), -1.0)
        report.notes["distance_bound"] = "finite"
    except DomainError as exc:
        report.notes["distance_bound"] = f"{type(exc).__name__}: {exc}"
    report.status = "pass" if traj.focal_s is None else "theorem-failure"
    return report


def _run_index(sid, p, tol, seed):
    m, k, ell = int(p["m"]), float(p["k"]), float(p["ell"])
    flavor = p.get("flavor", "real")
    seed = int(p.get("seed", seed))
    kind = p.get("field", "random")
    if kind == "random":
        field = random_admissible_field(m, k, flavor, seed=seed, s_max=ell + 1.0)
    elif kind == "model":
        field = model_field(m, k, flavor)
    else:
        raise ConfigError(f"{sid}: field must be 'random' or 'model'")
    S = p["S"]
    S = float(S) * np.eye(m) if np.isscalar(S) else np.asarray(S, float)
    report = verify_basic_inequality(field, S, ell, int(p.get("trials", 200)), seed,
                                     step=float(p.get("step", 5e-4)), tol=tol, scenario_id=sid)
    report.params = dict(p, seed=seed)
    report.status = "pass"
    return report


def run_scenario(sc: dict, tol: float, seed: int) -> tuple[VerificationReport, float]:
    """Run one scenario; returns the report and its runtime in milliseconds."""
    sid, kind, p, expect = sc["id"], sc["kind"], sc["params"], sc["expect"]
    t0 = time.perf_counter()
    try:
        if kind == "bound":
            report = _run_bound(sid, p, tol, seed)
        elif kind in ("riccati-real", "riccati-kahler"):
            report = _run_riccati(sid, kind, p, tol, seed)
        elif kind == "rigidity":
            report = _run_rigidity(sid, p, tol, seed, sc.get("base", "."))
        elif kind == "eigen":
            report = _run_eigen(sid, p, tol)
        elif kind == "cusp":
            report = _run_cusp(sid, p, tol)
        else:
            report = _run_index(sid, p, tol, seed)
    except (DomainError, GridTooCoarse) as exc:
        if expect != "expect-hypothesis-violation":
            raise ConfigError(f"{sid}: {type(exc).__name__}: {exc}") from exc
        report = VerificationReport(sid, kind, dict(p), tol, status="hypothesis-violation")
        report.notes = {"error": f"{type(exc).__name__}: {exc}"}
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{sid}: invalid parameters ({type(exc).__name__}: {exc})") from exc
    report.notes["expect"] = expect
    report.notes["expectation_met"] = expectation_met(report, expect)
    return report, (time.perf_counter() - t0) * 1000.0


def expectation_met(report: VerificationReport, expect: str) -> bool:
    if expect == "pass":
        return report.passed
    return report.status == "hypothesis-violation"


def _worker(args):
    sc, tol, seed = args
    try:
        return run_scenario(sc, tol, seed), None
    except ConfigError as exc:
        return None, str(exc)


def run_config(path, out_dir, jobs: int = 1, seed: int = 0, kinds=None, echo=print) -> int:
    scenarios = load_config(path)
    if kinds is not None:
        scenarios = [sc for sc in scenarios if sc["kind"] in kinds]
    tol = default_tol()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    tasks = [(sc, tol, seed) for sc in sorted(scenarios, key=lambda s: s["id"])]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_worker, tasks))
    else:
        results = [_worker(t) for t in tasks]
    all_met = True
    errors = []
    for (sc, _, _), (res, err) in zip(tasks, results):
        if err is not None:
            errors.append(err)
            continue
        report, runtime = res
        report.write(out_dir)
        atomic_write(out_dir / f"{report.scenario_id}.timing.json",
                     json.dumps({"scenario_id": report.scenario_id, "runtime_ms": round(runtime, 3)}) + "\n")
        met = report.notes["expectation_met"]
        all_met &= met
        echo(f"{report.scenario_id:<28} {report.kind:<15} status={report.status:<22} "
             f"max_margin={report.max_margin:.3e} expect={sc['expect']} {'OK' if met else 'MISSED'}")
    if errors:
        for err in errors:
            print(f"error: {err}", file=sys.stderr)
        return 2
    return 0 if all_met else 1


# ---------------------------------------------------------------- report aggregation

def summarize(report_dir) -> str:
    """Summary CSV over the JSON reports in ``report_dir``, rows sorted by scenario id."""
    report_dir = Path(report_dir)
    if not report_dir.is_dir():
        raise ConfigError(f"{report_dir} is not a directory")
    rows = {}
    for path in sorted(report_dir.glob("*.json")):
        if path.name.endswith(".timing.json"):
            continue
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
            sid = data["scenario_id"]
            summary = data["summary"]
        except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ConfigError(f"unreadable report {path}: {exc}") from exc
        if sid in rows:
            raise ConfigError(f"duplicate scenario id {sid!r} in {report_dir}")
        params = data.get("params", {})
        runtime = None
        timing = report_dir / f"{sid}.timing.json"
        if timing.exists():
            try:
                runtime = json.loads(timing.read_text(encoding="utf-8"))["runtime_ms"]
            except (OSError, json.JSONDecodeError, KeyError) as exc:
                raise ConfigError(f"unreadable timing file {timing}: {exc}") from exc
        met = data.get("notes", {}).get("expectation_met", summary.get("pass"))
        rows[sid] = [sid, data.get("kind"), params.get("n"), params.get("k"), params.get("h"),
                     met, summary.get("max_margin"), runtime]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SUMMARY_FIELDS)
    for sid in sorted(rows):
        writer.writerow([_cell(v) for v in rows[sid]])
    return buf.getvalue()


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return "%.12g" % v
    return str(v)


# ---------------------------------------------------------------- commands

def cmd_bound(args) -> int:
    record = {"kind": args.kind, "n": args.n, "k": args.k}
    if args.kind == "real":
        if args.h is None:
            raise DomainError("--h is required for --kind real")
        record["h"] = args.h
        record["rho_max"] = rho_max_real(args.n, args.k, args.h)
        if args.rho is not None:
            radius = record["rho_max"]
            record["laplace_bound"] = laplace_bound_real(args.n, args.k, radius, args.rho)
        if args.r is not None:
            record["H"] = model_H(args.n, args.k, args.r)
    else:
        if args.Hb is not None:
            record["Hb"] = args.Hb
            record["h"] = invert_KH(args.n, args.k, args.Hb)
        elif args.h is not None:
            record["h"] = args.h
        else:
            raise DomainError("--Hb or --h is required for --kind kahler")
        h = record["h"]
        record["rho_max"] = h
        record["KH"] = model_KH(args.n, args.k, h)
        if record["KH"] >= 0:
            record["eigen_lower_bound"] = eigen_lower_bound(args.n, args.k, h)
        if args.rho is not None:
            lap = laplace_bound_kahler(args.n, args.k, h, args.rho)
            record["laplace_bound"] = lap.value
            record["laplace_bound_uniform"] = lap.uniform
            record["hessian_bounds"] = list(hessian_bounds_kahler(args.n, args.k, h, args.rho))
    if args.json:
        print(json.dumps(record, sort_keys=True))
    else:
        for key, value in record.items():
            print(f"{key} {value:.12g}" if isinstance(value, float) else f"{key} {value}")
    return 0


def cmd_verify(args) -> int:
    if not args.config:
        raise ConfigError("--config is required")
    return run_config(args.config, args.out, args.jobs, args.seed)


def cmd_eigen(args) -> int:
    if args.config:
        return run_config(args.config, args.out, args.jobs, args.seed, kinds={"eigen"})
    if args.n is None or args.k is None or args.h is None:
        raise ConfigError("--n, --k and --h are required without --config")
    R = args.R or [args.h]
    report = verify_eigen_bound(args.n, args.k, args.h, R, grid=args.grid, scenario_id=args.id)
    report.write(args.out)
    if args.json:
        print(report.to_json(), end="")
    else:
        bound = report.notes["bound"]
        for d in report.notes["per_radius"]:
            print(f"R {d['R']:.12g} lambda1 {d['lambda_fd']:.10g} (+-{d['error_fd']:.2g}) "
                  f"shooting {d['lambda_shooting']:.10g} bound {bound:.10g} slack {d['slack']:.6g}")
        print("pass" if report.passed else "FAIL")
    return 0 if report.passed else 1


def cmd_report(args) -> int:
    report_dir = args.dir or args.out
    if report_dir is None:
        raise ConfigError("a report directory is required")
    text = summarize(report_dir)
    target = Path(args.summary) if args.summary else Path(report_dir) / "summary.csv"
    atomic_write(target, text)
    if args.json:
        rows = list(csv.DictReader(io.StringIO(text)))
        print(json.dumps(rows, sort_keys=True))
    else:
        print(text, end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output directory for reports")
    common.add_argument("--jobs", type=int, default=1, help="scenarios run concurrently")
    common.add_argument("--seed", type=int, default=0, help="seed for scenarios that do not set one")
    common.add_argument("--json", action="store_true", help="print machine-readable output")
    common.add_argument("--config", help="scenario config (JSON)")

    parser = argparse.ArgumentParser(prog="geomcmp", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"geomcmp {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bound", parents=[common], help="evaluate closed-form bounds")
    b.add_argument("--kind", choices=("real", "kahler"), default="real")
    b.add_argument("--n", type=int, required=True)
    b.add_argument("--k", type=float, required=True)
    b.add_argument("--h", type=float, help="real: mean curvature parameter H >= (n-1)h; kahler: radius")
    b.add_argument("--Hb", type=float, help="kahler: boundary mean curvature lower bound")
    b.add_argument("--rho", type=float, help="distance at which to evaluate the Laplacian bound")
    b.add_argument("--r", type=float, help="radius at which to evaluate H(r)")
    b.set_defaults(func=cmd_bound)

    v = sub.add_parser("verify", parents=[common], help="run verification scenarios")
    v.set_defaults(func=cmd_verify)

    e = sub.add_parser("eigen", parents=[common], help="first Dirichlet eigenvalue against its lower bound")
    e.add_argument("--n", type=int)
    e.add_argument("--k", type=float)
    e.add_argument("--h", type=float)
    e.add_argument("--R", type=float, action="append", help="ball radius (repeatable, default h)")
    e.add_argument("--grid", type=int, default=1024)
    e.add_argument("--id", default="eigen", help="scenario id for the written report")
    e.set_defaults(func=cmd_eigen)

    r = sub.add_parser("report", parents=[common], help="aggregate reports into a summary CSV")
    r.add_argument("dir", nargs="?", help="directory of reports (default: --out)")
    r.add_argument("--summary", help="summary CSV path (default DIR/summary.csv)")
    r.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    if getattr(args, "jobs", 1) < 1:
        print("error: --jobs must be >= 1", file=sys.stderr)
        return 2
    try:
        if args.command in ("verify", "eigen") and args.out is None:
            args.out = "reports"
        return args.func(args)
    except (ConfigError, DomainError, GridTooCoarse) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
