"""Randomized verification of the Laplacian and Hessian comparison along geodesics.

Each trial integrates the boundary Jacobi fields for one curvature field and
one shape operator and compares the Hessian of the distance to the boundary
with the model bound at a grid of points ``s < h`` before the first focal
point. Trial 0 is the model itself, where the bounds hold with equality.
"""
from __future__ import annotations

import math

import numpy as np

from ..errors import DomainError
from ..modelfn import ct, period
from ..report import VerificationReport, default_tol
from .fields import CurvatureField, model_field, model_matrix, random_admissible_field
from .integrator import grid_for, integrate_batch, last_reportable

CHUNK = 50
#: integrate this many steps past ``h`` so that the model focal point is inside the run
OVERSHOOT = 20
ADMISSIBLE_TOL = 1e-12
MODEL_EQUALITY_TOL = 1e-9


def _trial_rngs(seed, trials):
    return [np.random.default_rng(c) for c in np.random.SeedSequence(seed).spawn(trials)]


def _run(fields, shapes, s_max, step, h):
    """Integrate in chunks; returns the grid, actual step, Hessians and focal times."""
    U_all, focal_all = [], []
    s = actual = None
    for lo in range(0, len(fields), CHUNK):
        s, actual, U, focal = integrate_batch(fields[lo:lo + CHUNK], shapes[lo:lo + CHUNK], s_max, step,
                                             check_until=h)
        U_all.append(U)
        focal_all.extend(focal)
    return s, actual, np.concatenate(U_all), focal_all


def _field_excess(field: CurvatureField, s):
    K = field(s) - field.model
    return float(np.linalg.eigvalsh(0.5 * (K + np.swapaxes(K, 1, 2))).min())


def _checkpoints(h, s_grid, step):
    idx = np.unique(np.round(np.arange(s_grid) * (h / s_grid) / step).astype(int))
    return idx[idx * step < h]


def _sym(rng, m, scale):
    X = scale * rng.standard_normal((m, m))
    return 0.5 * (X + X.T)


def _real_shape(rng, m, c, rule):
    if rule == "matrix":
        B = rng.standard_normal((m, m))
        return c * np.eye(m) + rng.uniform(0.0, 0.5) * (B @ B.T) / m
    T = _sym(rng, m, 0.5)
    T -= (np.trace(T) / m) * np.eye(m)
    return c * np.eye(m) + T + rng.uniform(0.0, 0.2) * np.eye(m)


def _kahler_shape(rng, m, base):
    S = np.diag(base).astype(float)
    for i in range(0, m - 1, 2):
        t = rng.normal(0.0, 0.3)
        S[i, i] += t
        S[i + 1, i + 1] -= t
    off = _sym(rng, m, 0.2)
    np.fill_diagonal(off, 0.0)
    B = rng.standard_normal((m, m))
    return S + off + rng.uniform(0.0, 0.3) * (B @ B.T) / m


def _prepare(m, k, flavor, trials, seed, fields, shapes, model_S, shape_draw, s_field):
    if fields is not None:
        fields = list(fields)
        if shapes is None:
            shapes = [model_S] * len(fields)
        if len(shapes) != len(fields):
            raise DomainError("fields and shapes must have equal length")
        return fields, [np.asarray(S, float) for S in shapes], "custom"
    if trials < 1:
        raise DomainError(f"trials must be >= 1, got {trials!r}")
    fields, shapes = [model_field(m, k, flavor)], [model_S]
    for rng in _trial_rngs(seed, trials)[1:]:
        roughness = float(rng.uniform(0.0, 1.0))
        fseed = int(rng.integers(2 ** 63))
        fields.append(random_admissible_field(m, k, flavor, seed=fseed, s_max=s_field, roughness=roughness))
        shapes.append(shape_draw(rng))
    return fields, shapes, "random"


def _classify(report, admissible, failed):
    """Set the status: a failed check on admissible data falsifies the comparison."""
    theorem = [t for t in range(len(failed)) if failed[t] and admissible[t]]
    inadmissible = [t for t in range(len(admissible)) if not admissible[t]]
    if theorem:
        report.status = "theorem-failure"
    elif inadmissible:
        report.status = "hypothesis-violation"
    else:
        report.status = "pass"
    report.notes.update({
        "inadmissible_trials": inadmissible,
        "theorem_failures": theorem,
        "failed_inadmissible": [t for t in inadmissible if failed[t]],
    })


def _add_checks(report, t, s, idx_check, dense_idx, value, bound, label):
    """Rows at the check points plus one row at the worst sample in between."""
    for i in idx_check:
        report.add_row(t, label, s[i], value[i], bound[i])
    if len(dense_idx):
        gap = value[dense_idx] - bound[dense_idx]
        j = dense_idx[int(np.argmax(gap))]
        report.add_row(t, label + "-worst", s[j], value[j], bound[j])
        return float(np.max(np.abs(gap) / np.maximum(1.0, np.abs(bound[dense_idx]))))
    return 0.0


def verify_real_comparison(n: int, k: float, h: float, trials: int = 100, seed: int = 0, s_grid: int = 40,
                           step: float = 1e-3, fields=None, shapes=None, shape_rule: str = "matrix",
                           tol: float | None = None, scenario_id: str = "riccati-real") -> VerificationReport:
    """Check ``Lap rho(s) <= -(n - 1) ct(k, h - s)`` on random admissible data.

    ``h`` is the radius normalization: the boundary satisfies ``S >= ct(k, h) I``
    (``shape_rule="matrix"``) or only ``tr S >= (n - 1) ct(k, h)``
    (``shape_rule="trace"``), and the curvature satisfies ``K(s) >= k I``.
    Passing ``fields`` (and optionally ``shapes``) replaces the random draw,
    e.g. for negative controls.
    """
    if n < 2:
        raise DomainError(f"real dimension must be >= 2, got {n}")
    if not 0 < h < period(k):
        raise DomainError(f"h={h!r} must lie in (0, {period(k)!r})")
    if shape_rule not in ("matrix", "trace"):
        raise DomainError(f"shape_rule must be 'matrix' or 'trace', got {shape_rule!r}")
    tol = default_tol() if tol is None else tol
    m = n - 1
    c = ct(k, h)
    s_max = h + OVERSHOOT * step
    fields, shapes, origin = _prepare(m, k, "real", trials, seed, fields, shapes, c * np.eye(m),
                                      lambda rng: _real_shape(rng, m, c, shape_rule), s_max + 1.0)
    s, step, U, focal = _run(fields, shapes, s_max, step, h)
    N = len(s) - 1
    inside = s < h
    bound = np.full(len(s), np.nan)
    bound[inside] = -(n - 1) * ct(k, h - s[inside])
    lap = np.trace(U, axis1=-2, axis2=-1)
    check = _checkpoints(h, s_grid, step)

    report = VerificationReport(scenario_id, "riccati-real",
                                {"n": n, "k": k, "h": h, "trials": len(fields), "seed": seed,
                                 "s_grid": s_grid, "step": step, "shape_rule": shape_rule,
                                 "fields": origin}, tol, seed=seed)
    admissible, failed = [], []
    for t in range(len(fields)):
        last = last_reportable(N, step, focal[t])
        dense = np.flatnonzero(inside[: last + 1]) if last >= 0 else np.array([], int)
        before = len(report.rows)
        rel = _add_checks(report, t, s, check[check <= last], dense, lap[t], bound, "trace")
        if t == 0 and origin == "random":
            report.notes["model_equality"] = rel
            report.notes["model_equality_ok"] = rel <= MODEL_EQUALITY_TOL
            report.notes["model_focal_error"] = abs(focal[0] - h) / h if focal[0] is not None else None
        failed.append(any(not r["pass"] for r in report.rows[before:]))
        S = shapes[t]
        shape_ok = (np.linalg.eigvalsh(S - c * np.eye(m)).min() >= -ADMISSIBLE_TOL if shape_rule == "matrix"
                    else np.trace(S) >= m * c - ADMISSIBLE_TOL)
        admissible.append(bool(shape_ok) and _field_excess(fields[t], s) >= -ADMISSIBLE_TOL)
    report.focal_times = focal
    _classify(report, admissible, failed)
    return report


def verify_kahler_comparison(n: int, k: float, h: float, trials: int = 100, seed: int = 0, s_grid: int = 40,
                             step: float = 1e-3, fields=None, shapes=None, tol: float | None = None,
                             scenario_id: str = "riccati-kahler") -> VerificationReport:
    """Check the Hopf, J-pair and trace Hessian bounds on random Kähler-admissible data.

    The frame has size ``m = 2n - 1`` with the Hopf direction last and J-pairs
    ``(0, 1), (2, 3), ...``. Admissible data satisfy ``K(s) >= diag(k, ..., k, 4k)``,
    ``S[hopf, hopf] >= ct(4k, h)`` and ``S[a, a] + S[b, b] >= 2 ct(k, h)`` for
    each pair. Checked at every grid point ``s < h`` before the focal point:

    * ``U[hopf, hopf](s) <= -ct(4k, h - s)``
    * ``U[a, a](s) + U[b, b](s) <= -2 ct(k, h - s)``
    * ``tr U(s) <= -ct(4k, h - s) - (2n - 2) ct(k, h - s)``
    """
    if n < 1:
        raise DomainError(f"complex dimension must be >= 1, got {n}")
    if not 0 < h < period(4 * k):
        raise DomainError(f"h={h!r} must lie in (0, {period(4 * k)!r})")
    tol = default_tol() if tol is None else tol
    m = 2 * n - 1
    c1, c4 = ct(k, h), ct(4 * k, h)
    base = np.full(m, c1)
    base[-1] = c4
    s_max = h + OVERSHOOT * step
    fields, shapes, origin = _prepare(m, k, "kahler", trials, seed, fields, shapes, np.diag(base),
                                      lambda rng: _kahler_shape(rng, m, base), s_max + 1.0)
    s, step, U, focal = _run(fields, shapes, s_max, step, h)
    N = len(s) - 1
    inside = s < h
    hopf_bound = np.full(len(s), np.nan)
    pair_bound = np.full(len(s), np.nan)
    hopf_bound[inside] = -ct(4 * k, h - s[inside])
    if n > 1:
        pair_bound[inside] = -2.0 * ct(k, h - s[inside])
    trace_bound = hopf_bound + (n - 1) * pair_bound if n > 1 else hopf_bound
    check = _checkpoints(h, s_grid, step)

    report = VerificationReport(scenario_id, "riccati-kahler",
                                {"n": n, "k": k, "h": h, "trials": len(fields), "seed": seed,
                                 "s_grid": s_grid, "step": step, "fields": origin}, tol, seed=seed)
    admissible, failed = [], []
    model_rel = 0.0
    for t in range(len(fields)):
        last = last_reportable(N, step, focal[t])
        dense = np.flatnonzero(inside[: last + 1]) if last >= 0 else np.array([], int)
        pts = check[check <= last]
        before = len(report.rows)
        rels = [_add_checks(report, t, s, pts, dense, U[t, :, m - 1, m - 1], hopf_bound, "hopf")]
        for p in range(n - 1):
            a, b = 2 * p, 2 * p + 1
            rels.append(_add_checks(report, t, s, pts, dense, U[t, :, a, a] + U[t, :, b, b],
                                    pair_bound, f"pair{p}"))
        rels.append(_add_checks(report, t, s, pts, dense, np.trace(U[t], axis1=-2, axis2=-1),
                                trace_bound, "trace"))
        if t == 0 and origin == "random":
            model_rel = max(rels)
            report.notes["model_equality"] = model_rel
            report.notes["model_equality_ok"] = model_rel <= MODEL_EQUALITY_TOL
            report.notes["model_focal_error"] = abs(focal[0] - h) / h if focal[0] is not None else None
        failed.append(any(not r["pass"] for r in report.rows[before:]))
        S = shapes[t]
        shape_ok = S[m - 1, m - 1] >= c4 - ADMISSIBLE_TOL and all(
            S[2 * p, 2 * p] + S[2 * p + 1, 2 * p + 1] >= 2 * c1 - ADMISSIBLE_TOL for p in range(n - 1))
        admissible.append(bool(shape_ok) and _field_excess(fields[t], s) >= -ADMISSIBLE_TOL)
    report.focal_times = focal
    _classify(report, admissible, failed)
    return report
