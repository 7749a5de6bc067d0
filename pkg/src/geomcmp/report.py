"""Verification reports: per-check rows plus a summary, serialized as JSON and CSV."""
from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__

ROW_FIELDS = ("trial", "check", "x", "value", "bound", "margin", "pass")

HYPOTHESIS_GAP = (
    "random fields satisfy the pointwise sub-family K(s) >= model curvature matrix and "
    "per-direction (or per-pair) boundary bounds; the Ricci/bisectional and mean-curvature "
    "hypotheses admit more general data that is not sampled"
)


def _clean(value):
    """Make a value JSON-safe: NaN and infinities become None, numpy scalars become Python."""
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if hasattr(value, "item") and not isinstance(value, (str, bytes)):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return "nan" if math.isnan(value) else "%.12g" % value
    if isinstance(value, int):
        return str(value)
    return str(value)


@dataclass
class VerificationReport:
    """Outcome of one verification scenario.

    Every row compares a computed ``value`` with a ``bound``; ``margin`` is the
    amount by which the checked inequality is violated (negative when it holds
    with room to spare) and a row passes iff ``margin <= tol``.
    """

    scenario_id: str
    kind: str
    params: dict
    tol: float
    rows: list = field(default_factory=list)
    focal_times: list = field(default_factory=list)
    status: str = "pass"
    seed: int | None = None
    notes: dict = field(default_factory=dict)
    version: str = __version__

    def add_row(self, trial, check, x, value, bound, margin=None):
        if margin is None:
            margin = value - bound
        margin = float(margin)
        self.rows.append({
            "trial": int(trial), "check": str(check), "x": float(x),
            "value": float(value), "bound": float(bound), "margin": margin,
            "pass": bool(margin <= self.tol),
        })

    @property
    def max_margin(self) -> float:
        margins = [r["margin"] for r in self.rows if not math.isnan(r["margin"])]
        return max(margins) if margins else float("-inf")

    @property
    def passed(self) -> bool:
        return self.status == "pass" and all(r["pass"] for r in self.rows)

    @property
    def failed_rows(self) -> int:
        return sum(not r["pass"] for r in self.rows)

    def summary(self) -> dict:
        return {
            "max_margin": self.max_margin if self.rows else None,
            "failed_rows": self.failed_rows,
            "rows": len(self.rows),
            "pass": self.passed,
            "status": self.status,
            "focal_times": self.focal_times,
            "seed": self.seed,
            "version": self.version,
            "tol": self.tol,
        }

    def to_dict(self) -> dict:
        return _clean({
            "scenario_id": self.scenario_id,
            "kind": self.kind,
            "params": self.params,
            "summary": self.summary(),
            "notes": self.notes,
            "hypothesis_gap": HYPOTHESIS_GAP,
            "rows": self.rows,
        })

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(ROW_FIELDS)
        for row in self.rows:
            writer.writerow([_fmt(row[k]) for k in ROW_FIELDS])
        return buf.getvalue()

    def write(self, out_dir) -> tuple[Path, Path]:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        json_path = out_dir / f"{self.scenario_id}.json"
        csv_path = out_dir / f"{self.scenario_id}.csv"
        atomic_write(json_path, self.to_json())
        atomic_write(csv_path, self.to_csv())
        return json_path, csv_path


def atomic_write(path, text: str) -> None:
    """Write ``text`` to ``path`` via a temporary file and rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.chmod(tmp, 0o644)  # mkstemp creates files private to the owner
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def default_tol() -> float:
    """Comparison tolerance, overridable through ``GEOMCMP_TOL``."""
    raw = os.environ.get("GEOMCMP_TOL")
    if raw is None or raw.strip() == "":
        return 1e-8
    try:
        tol = float(raw)
    except ValueError as exc:
        raise ValueError(f"GEOMCMP_TOL must be a number, got {raw!r}") from exc
    if not tol >= 0:
        raise ValueError(f"GEOMCMP_TOL must be non-negative, got {raw!r}")
    return tol
