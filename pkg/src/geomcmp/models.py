"""Rotationally symmetric test manifolds and the rigidity diagnostic.

A warped product ``dr^2 + phi(r)^2 g_{S^{n-1}}`` is described by its profile
``phi``. Disk profiles start at a smooth center (``phi(0) = 0``,
``phi'(0) = 1``) and have their boundary at ``r = R``, so the distance to the
boundary is ``rho = R - r``. Collar profiles such as ``phi(t) = exp(-t)`` have
their boundary at ``t = 0`` and ``rho = t``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Literal, NamedTuple

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline

from .bounds import model_H, model_KH
from .errors import DomainError, HypothesisViolated, InfimumNotAttained
from .modelfn import arccot, cs, ct, period, sn

Kind = Literal["disk", "collar"]
MIN_CSV_ROWS = 100
RICCI_SLACK = 1e-9
DIAGNOSTIC_SAMPLES = 4001


def _arr(f):
    return lambda r: np.asarray(f(np.asarray(r, dtype=float)), dtype=float)


@dataclass(frozen=True)
class WarpProfile:
    """Warping function with its first two derivatives.

    ``d2_error`` bounds the error of ``d2`` (zero for analytic profiles, a
    refinement estimate for splines) and is used to widen tolerances.
    """

    n: int
    R: float
    phi: Callable = field(repr=False)
    d1: Callable = field(repr=False)
    d2: Callable = field(repr=False)
    kind: Kind = "disk"
    d2_error: float = 0.0
    label: str = "analytic"

    def __post_init__(self):
        if self.n < 2:
            raise DomainError(f"real dimension must be >= 2, got {self.n}")
        if not self.R > 0:
            raise DomainError(f"radius must be positive, got {self.R!r}")
        if self.kind not in ("disk", "collar"):
            raise DomainError(f"unknown profile kind {self.kind!r}")
        if self.kind == "disk":
            p0 = float(self.phi(np.array([0.0]))[0])
            dp0 = float(self.d1(np.array([0.0]))[0])
            if abs(p0) > 1e-12 or abs(dp0 - 1.0) > 1e-10:
                raise DomainError(f"disk profile needs phi(0) = 0, phi'(0) = 1; got {p0!r}, {dp0!r}")
        r = self.grid()
        lo = 1 if self.kind == "disk" else 0
        if not np.all(self.phi(r[lo:]) > 0):
            raise DomainError("warping function must be positive away from the center")

    def grid(self, samples: int = DIAGNOSTIC_SAMPLES) -> np.ndarray:
        return np.linspace(0.0, self.R, samples)

    @classmethod
    def analytic(cls, n, R, phi, d1, d2, kind: Kind = "disk", label="analytic") -> "WarpProfile":
        return cls(n, float(R), _arr(phi), _arr(d1), _arr(d2), kind, 0.0, label)

    @classmethod
    def space_form(cls, n: int, k: float, R: float) -> "WarpProfile":
        """Geodesic ball of radius ``R`` in the space form of curvature ``k``."""
        if not R < period(k):
            raise DomainError(f"radius {R!r} must be below {period(k)!r}")
        return cls.analytic(n, R, lambda r: sn(k, r), lambda r: cs(k, r),
                            lambda r: -k * sn(k, r), label=f"space-form k={k!r}")

    @classmethod
    def cusp(cls, n: int, length: float = 50.0) -> "WarpProfile":
        """The collar ``[0, length] x_{exp(-t)} S^{n-1}`` with boundary at ``t = 0``."""
        return cls.analytic(n, length, lambda t: np.exp(-t), lambda t: -np.exp(-t),
                            lambda t: np.exp(-t), kind="collar", label="cusp")

    @classmethod
    def from_samples(cls, n: int, r, phi, kind: Kind = "disk", label="samples") -> "WarpProfile":
        """Cubic spline through samples; a disk spline is clamped to ``phi'(0) = 1``.

        ``d2_error`` is the largest change of the second derivative at the
        sample points when every other sample is dropped.
        """
        r = np.asarray(r, dtype=float)
        phi = np.asarray(phi, dtype=float)
        if r.ndim != 1 or r.shape != phi.shape:
            raise DomainError("r and phi must be 1-d arrays of equal length")
        if len(r) < MIN_CSV_ROWS:
            raise DomainError(f"need at least {MIN_CSV_ROWS} samples, got {len(r)}")
        if not np.all(np.diff(r) > 0):
            raise DomainError("sample radii must be strictly increasing")
        if r[0] != 0.0:
            raise DomainError("samples must start at r = 0")
        bc = ((1, 1.0), "not-a-knot") if kind == "disk" else "not-a-knot"
        spline = CubicSpline(r, phi, bc_type=bc)
        coarse = CubicSpline(r[::2], phi[::2], bc_type=bc)
        err = float(np.max(np.abs(spline(r, 2) - coarse(r, 2))))
        return cls(n, float(r[-1]), spline, spline.derivative(), spline.derivative(2), kind, err, label)

    @classmethod
    def from_radial_curvature(cls, n: int, K: Callable, R: float, label="radial-curvature") -> "WarpProfile":
        """Disk profile solving ``phi'' + K(r) phi = 0``, ``phi(0) = 0``, ``phi'(0) = 1``.

        The radial sectional curvature ``K`` then equals ``-phi''/phi`` exactly
        and the second derivative is evaluated from the equation.
        """
        sol = solve_ivp(lambda r, y: [y[1], -K(r) * y[0]], (0.0, R), [0.0, 1.0],
                        method="DOP853", rtol=1e-12, atol=1e-14, dense_output=True)
        if not sol.success:
            raise DomainError(f"profile integration failed: {sol.message}")
        dense = sol.sol

        def phi(r):
            out = dense(np.asarray(r, float))[0]
            return np.where(np.asarray(r) == 0.0, 0.0, out)

        def d1(r):
            out = dense(np.asarray(r, float))[1]
            return np.where(np.asarray(r) == 0.0, 1.0, out)

        return cls(n, float(R), phi, d1, lambda r: -K(np.asarray(r, float)) * phi(r), "disk", 0.0, label)

    def to_csv(self, path, samples: int = 2001) -> None:
        r = self.grid(samples)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["r", "phi"])
            for x, y in zip(r, self.phi(r)):
                writer.writerow(["%.17g" % x, "%.17g" % y])


def read_profile_csv(path, n: int, kind: Kind = "disk") -> WarpProfile:
    """Load a sampled profile from a CSV file with header ``r,phi``."""
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["r", "phi"]:
            raise DomainError(f"{path}: expected header 'r,phi', got {header!r}")
        try:
            rows = [(float(a), float(b)) for a, b in reader]
        except ValueError as exc:
            raise DomainError(f"{path}: malformed row ({exc})") from exc
    data = np.array(rows, dtype=float).reshape(-1, 2)
    return WarpProfile.from_samples(n, data[:, 0], data[:, 1], kind, label=path.name)


def _point(p: WarpProfile, r, allow_zero: bool):
    r = float(r)
    lo_ok = r >= 0 if (allow_zero or p.kind == "collar") else r > 0
    if not (lo_ok and r <= p.R):
        raise DomainError(f"r={r!r} outside the profile domain of {p.label} (R={p.R!r})")
    return np.array([r])


def ricci_radial(p: WarpProfile, r) -> float:
    """Ricci curvature in the radial direction, ``-(n - 1) phi''/phi``."""
    x = _point(p, r, allow_zero=False)
    return float(-(p.n - 1) * p.d2(x)[0] / p.phi(x)[0])


def boundary_mean_curvature(p: WarpProfile) -> float:
    """Mean curvature of the boundary for the inner normal.

    Disk: ``(n - 1) phi'(R)/phi(R)``. Collar (boundary at ``t = 0``, inner
    normal ``d/dt``): ``-(n - 1) phi'(0)/phi(0)``.
    """
    if p.kind == "disk":
        x = np.array([p.R])
        return float((p.n - 1) * p.d1(x)[0] / p.phi(x)[0])
    x = np.array([0.0])
    return float(-(p.n - 1) * p.d1(x)[0] / p.phi(x)[0])


def laplacian_rho_profile(p: WarpProfile, r) -> float:
    """Laplacian of the distance to the boundary at radius ``r``.

    Disk: ``rho = R - r`` and the value is ``-(n - 1) phi'(r)/phi(r)``.
    Collar: ``rho = t`` and the value is ``(n - 1) phi'(t)/phi(t)``.
    """
    x = _point(p, r, allow_zero=False)
    ratio = p.d1(x)[0] / p.phi(x)[0]
    return float(-(p.n - 1) * ratio if p.kind == "disk" else (p.n - 1) * ratio)


def bochner_residual(p: WarpProfile, r, dr: float = 1e-3) -> float:
    """``d/dr (Lap r) + |Hess r|^2 + Ric(d_r, d_r)`` for the radial distance ``r``.

    ``Lap r = (n - 1) phi'/phi`` is differentiated by a five-point stencil,
    so the residual measures the consistency of the profile's derivatives and
    vanishes up to discretization error for every profile.
    """
    x = _point(p, r, allow_zero=False)[0]
    # Lap r behaves like 1/r near a disk center, so the stencil shrinks with r
    d = min(dr, 5e-4 * x if (x > 0 and p.kind == "disk") else dr, (p.R - x) / 2.5 if x < p.R else dr)
    if not d > 0:
        raise DomainError(f"r={x!r} is too close to the end of the profile")
    m = p.n - 1
    g = lambda y: m * p.d1(y) / p.phi(y)
    pts = x + d * np.array([-2.0, -1.0, 1.0, 2.0])
    gv = g(pts)
    dg = (gv[0] - 8.0 * gv[1] + 8.0 * gv[2] - gv[3]) / (12.0 * d)
    xa = np.array([x])
    ratio = p.d1(xa)[0] / p.phi(xa)[0]
    return float(dg + m * ratio ** 2 + ricci_radial(p, x))


def rho_max_profile(p: WarpProfile, k: float) -> float:
    """Distance bound from the boundary mean curvature ``H = (n - 1) h``.

    Raises :class:`InfimumNotAttained` when ``k <= 0`` and ``h <= sqrt(-k)``,
    where no finite bound exists (the cusp collar is the borderline example).
    """
    h = boundary_mean_curvature(p) / (p.n - 1)
    if k <= 0 and not h > math.sqrt(-k):
        raise InfimumNotAttained(
            f"boundary mean curvature ratio {h!r} does not exceed sqrt(-k) = {math.sqrt(-k)!r}; "
            "the distance to the boundary can be unbounded"
        )
    return arccot(k, h)


class RigidityResult(NamedTuple):
    deficit: float
    metric_gap: float
    verdict: str
    h: float


def rigidity_diagnostic(p: WarpProfile, k: float, tol: float = 1e-9, h: float | None = None,
                        normalization: Literal["radius", "mean"] = "radius") -> RigidityResult:
    """Compare a disk with the model ball that its boundary mean curvature allows.

    ``h`` defaults to the radius with ``H(h) = H_boundary``. An explicit ``h``
    must satisfy ``H_boundary >= (n - 1) ct(k, h)``; with
    ``normalization="mean"`` it is read as ``H >= (n - 1) h`` and converted.
    The verdict is ``Rigid`` (deficit and metric gap within ``tol``),
    ``NonRigid`` (deficit above ``tol``) or ``Inconsistent`` (a model-sized
    disk that is not the model, which rigidity rules out).
    """
    if p.kind != "disk":
        raise DomainError("the rigidity diagnostic needs a disk profile")
    r = p.grid()[1:]
    if np.any(p.d1(r) <= 0):
        raise DomainError("phi' must be positive on (0, R] so that rho = R - r")
    ric = -(p.n - 1) * p.d2(r) / p.phi(r)
    slack = RICCI_SLACK + (p.n - 1) * p.d2_error / p.phi(r)
    if np.any(ric < (p.n - 1) * k - slack):
        worst = float(r[np.argmin(ric - (p.n - 1) * k + slack)])
        raise HypothesisViolated(f"radial Ricci curvature drops below (n-1)k = {(p.n - 1) * k!r} near r={worst:.6g}")
    H = boundary_mean_curvature(p)
    if h is None:
        ratio = H / (p.n - 1)
        if k <= 0 and not ratio > math.sqrt(-k):
            raise HypothesisViolated(f"boundary mean curvature ratio {ratio!r} does not exceed sqrt(-k)")
        h = arccot(k, ratio)
    else:
        if normalization == "mean":
            h = arccot(k, h)
        elif normalization != "radius":
            raise DomainError(f"unknown normalization {normalization!r}")
        if H < model_H(p.n, k, h) - tol:
            raise HypothesisViolated(f"boundary mean curvature {H!r} is below H({h!r}) = {model_H(p.n, k, h)!r}")
    deficit = h - p.R
    rr = p.grid()
    if k > 0:
        rr = rr[rr < period(k)]
    gap = float(np.max(np.abs(p.phi(rr) - sn(k, rr))))
    if deficit <= tol and gap <= tol:
        verdict = "Rigid"
    elif deficit > tol:
        verdict = "NonRigid"
    else:
        verdict = "Inconsistent"
    return RigidityResult(float(deficit), gap, verdict, float(h))


def random_perturbed_disk(n: int, k: float, seed, bumps: int = 3, amplitude: float = 1.0,
                          R_frac=(0.3, 0.9)) -> WarpProfile:
    """Disk whose radial curvature is ``k`` plus a few nonnegative Gaussian bumps.

    ``R`` is drawn as a fraction of the model size (``T_k / 2`` for ``k > 0``,
    otherwise 2) and shrunk if needed so that ``phi' > 0`` on ``(0, R]``.
    """
    rng = np.random.default_rng(seed)
    scale = period(k) / 2 if k > 0 else 2.0
    a = amplitude * rng.uniform(0.0, 1.0, bumps)
    c = rng.uniform(0.0, scale, bumps)
    w = rng.uniform(0.05, 0.5, bumps) * scale

    def K(r):
        r = np.asarray(r, dtype=float)
        return k + np.sum(a[:, None] * np.exp(-(((np.atleast_1d(r)[None, :] - c[:, None]) / w[:, None]) ** 2)),
                          axis=0).reshape(r.shape)

    R = float(rng.uniform(*R_frac)) * scale
    for _ in range(60):
        p = WarpProfile.from_radial_curvature(n, K, R, label="perturbed")
        if np.all(p.d1(p.grid()[1:]) > 0):
            return p
        R *= 0.8
    raise DomainError("could not find a radius with phi' > 0")


@dataclass(frozen=True)
class ComplexModelDisk:
    """Geodesic ball of radius ``R`` in the complex space form of holomorphic curvature ``4k``."""

    n: int
    k: float
    R: float

    def __post_init__(self):
        if self.n < 1:
            raise DomainError(f"complex dimension must be >= 1, got {self.n}")
        if not 0 < self.R < period(4 * self.k):
            raise DomainError(f"radius {self.R!r} must lie in (0, {period(4 * self.k)!r})")

    def hopf_profile(self, r):
        return sn(4 * self.k, r)

    def generic_profile(self, r):
        return sn(self.k, r)

    def volume_density(self, r):
        """``sn(4k, r) sn(k, r)^(2n - 2)``, up to the area of the unit sphere."""
        return sn(4 * self.k, r) * sn(self.k, r) ** (2 * self.n - 2)


def kahler_model_laplacian(d: ComplexModelDisk, r) -> float:
    """Laplacian of the distance from the center of a complex model disk at radius ``r``."""
    if not 0 < r <= d.R:
        raise DomainError(f"r={r!r} outside (0, {d.R!r}]")
    return model_KH(d.n, d.k, r)
