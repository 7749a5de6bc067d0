"""First Dirichlet eigenvalue of rotationally symmetric disks by two independent methods.

For a radial function ``u`` the Laplacian is ``(w u')'/w`` with ``w`` the
radial volume density, so the first Dirichlet eigenvalue solves

    -(w u')' = lambda w u  on (0, R),   w u' -> 0 at 0,   u(R) = 0.

:func:`solve_fd` discretizes this with a staggered finite-volume scheme and
finds the lowest eigenvalue of the symmetric tridiagonal pencil by Sturm
sequence bisection. :func:`solve_shooting` integrates the initial value
problem from the center and bisects on the first zero of ``u``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import solve_banded

from .bounds import eigen_lower_bound, model_KH
from .errors import BracketFailure, DomainError, GridTooCoarse
from .modelfn import period, sn
from .report import VerificationReport, default_tol

MIN_GRID = 64
FD_REL_TOL = 1e-4
SHOOT_STEPS = 10_000
SHOOT_EPS = 1e-6
_GAUSS = np.polynomial.legendre.leggauss(8)


@dataclass(frozen=True)
class SturmLiouvilleProblem:
    """Radial Dirichlet problem on ``(0, R]`` with density ``w``.

    ``dim`` is the dimension of the ball, so that ``w(r) ~ r^(dim - 1)`` at
    the center; the shooting start uses it.
    """

    w: Callable = field(repr=False)
    R: float
    dim: int
    label: str = "custom"

    def __post_init__(self):
        if not self.R > 0:
            raise DomainError(f"R must be positive, got {self.R!r}")
        if self.dim < 1:
            raise DomainError(f"dimension must be >= 1, got {self.dim!r}")
        r = np.linspace(0.0, self.R, 257)[1:]
        if not np.all(self.w(r) > 0):
            raise DomainError("weight must be positive on (0, R]")


def weight_complex_model(n: int, k: float, R: float) -> SturmLiouvilleProblem:
    """Complex space-form ball: ``w = sn(4k, r) sn(k, r)^(2n - 2)``, so ``w'/w = KH(r)``."""
    if n < 1:
        raise DomainError(f"complex dimension must be >= 1, got {n}")
    if not 0 < R < period(4 * k):
        raise DomainError(f"R={R!r} must lie in (0, {period(4 * k)!r})")
    w = lambda r: sn(4 * k, np.asarray(r, float)) * sn(k, np.asarray(r, float)) ** (2 * n - 2)
    return SturmLiouvilleProblem(w, float(R), 2 * n, label=f"complex-model n={n} k={k!r}")


def weight_warped(p) -> SturmLiouvilleProblem:
    """Real warped disk ``dr^2 + phi^2 g_S``: ``w = phi^(n - 1)``."""
    if p.kind != "disk":
        raise DomainError("eigenvalue problems need a disk profile")
    return SturmLiouvilleProblem(lambda r: p.phi(np.asarray(r, float)) ** (p.n - 1), p.R, p.n,
                                 label=f"warped {p.label}")


@dataclass
class EigenResult:
    """First eigenvalue estimate.

    ``lambda1`` is the extrapolated value, ``error`` its estimated error,
    ``raw`` the value on the finer discretization.
    """

    lambda1: float
    method: str
    grid: int
    error: float
    raw: float
    coarse: float
    r: np.ndarray | None = field(default=None, repr=False)
    u: np.ndarray | None = field(default=None, repr=False)
    rayleigh: float | None = None


# ---------------------------------------------------------------- finite volumes

def _cell_integrals(w, edges):
    """``int w`` over consecutive intervals given by ``edges``, by Gauss-Legendre."""
    x, wt = _GAUSS
    a, b = edges[:-1], edges[1:]
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    pts = mid[:, None] + half[:, None] * x[None, :]
    return half * (w(pts.ravel()).reshape(pts.shape) @ wt)


def fd_pencil(prob: SturmLiouvilleProblem, m: int):
    """Stiffness (diagonal, off-diagonal) and lumped masses on ``m`` cells.

    Unknowns sit at ``r_i = i R/m`` for ``i < m``; ``u(R) = 0``. Fluxes use
    ``w`` at the half points, masses integrate ``w`` over the dual cells.
    """
    d = prob.R / m
    nodes = np.arange(m + 1) * d
    w_half = prob.w(nodes[:-1] + 0.5 * d)
    dual = np.concatenate(([0.0], nodes[:-1] + 0.5 * d, [prob.R]))
    mass = _cell_integrals(prob.w, dual)[:m]
    diag = (w_half + np.concatenate(([0.0], w_half[:-1]))) / d
    off = -w_half[:-1] / d
    return diag, off, mass, nodes[:m]


def sturm_count(a, b2, x) -> int:
    """Number of eigenvalues below ``x`` of the symmetric tridiagonal matrix with
    diagonal ``a`` and squared off-diagonal ``b2``."""
    count = 0
    q = a[0] - x
    if q < 0:
        count += 1
    tiny = 1e-300
    for i in range(1, len(a)):
        if q == 0.0:
            q = tiny
        q = a[i] - x - b2[i - 1] / q
        if q < 0:
            count += 1
    return count


def lowest_eigenvalue(a, b, rtol: float = 1e-15) -> float:
    """Smallest eigenvalue of a symmetric tridiagonal matrix by Sturm bisection."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    radius = np.abs(np.concatenate(([0.0], b))) + np.abs(np.concatenate((b, [0.0])))
    lo, hi = float(np.min(a - radius)), float(np.max(a + radius))
    a_l, b2 = a.tolist(), (b * b).tolist()
    while hi - lo > rtol * max(abs(lo), abs(hi), 1e-300):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if sturm_count(a_l, b2, mid) >= 1:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def _fd_single(prob, m):
    diag, off, mass, r = fd_pencil(prob, m)
    s = 1.0 / np.sqrt(mass)
    a = diag * s * s
    b = off * s[:-1] * s[1:]
    lam = lowest_eigenvalue(a, b)
    # inverse iteration for the eigenvector of the symmetric form
    ab = np.zeros((3, m))
    ab[0, 1:] = b
    ab[1] = a - lam * (1 + 1e-10)
    ab[2, :-1] = b
    y = np.ones(m)
    for _ in range(3):
        y = solve_banded((1, 1), ab, y)
        y /= np.linalg.norm(y)
    u = s * y
    u = u / u[np.argmax(np.abs(u))]
    Au = diag * u
    Au[:-1] += off * u[1:]
    Au[1:] += off * u[:-1]
    rayleigh = float(u @ Au / (u @ (mass * u)))
    return lam, r, u, rayleigh


def solve_fd(prob: SturmLiouvilleProblem, m: int = 1024) -> EigenResult:
    """Lowest eigenvalue on ``m`` and ``2m`` cells with Richardson extrapolation (second order)."""
    if m < MIN_GRID:
        raise GridTooCoarse(f"grid of {m} cells is below the minimum of {MIN_GRID}")
    lam_c, *_ = _fd_single(prob, m)
    lam_f, r, u, rayleigh = _fd_single(prob, 2 * m)
    extrap = lam_f + (lam_f - lam_c) / 3.0
    err = abs(lam_f - lam_c) / 3.0
    if err > FD_REL_TOL * abs(extrap):
        raise GridTooCoarse(f"extrapolation error {err:.3e} exceeds {FD_REL_TOL} x lambda on {m} cells")
    return EigenResult(extrap, "finite-difference", m, err, lam_f, lam_c, r, u, rayleigh)


# ---------------------------------------------------------------- shooting

def _shoot_grid(prob: SturmLiouvilleProblem, steps: int):
    """RK4 step coefficients for ``u' = v/w``, ``v' = -lambda w u``.

    Nodes: geometric steps from ``eps`` up to one uniform step, then
    ``steps`` uniform steps to ``R``. With ``a = 1/w`` and ``b = w`` at the
    step start, midpoint and end, the RK4 step matrix is polynomial in
    ``lambda``:

        p11 = 1 + lambda c11 + lambda^2 d11     p12 = c12 + lambda d12
        p21 = lambda c21 + lambda^2 d21         p22 = 1 + lambda c22 + lambda^2 d22
    """
    eps = SHOOT_EPS * prob.R
    h = prob.R / steps
    geo = [eps]
    while geo[-1] * 1.1 < h:
        geo.append(geo[-1] * 1.1)
    nodes = np.concatenate((geo, h * np.arange(1, steps + 1)))
    dt = np.diff(nodes)
    b0, bm, b1 = prob.w(nodes[:-1]), prob.w(0.5 * (nodes[:-1] + nodes[1:])), prob.w(nodes[1:])
    a0, am, a1 = 1.0 / b0, 1.0 / bm, 1.0 / b1
    dt2, dt3, dt4 = dt * dt / 6.0, dt ** 3 / 12.0, dt ** 4 / 24.0
    coeffs = np.stack([
        -dt2 * (am * b0 + 1.0 + a1 * bm), dt4 * a1 * b0,            # p11
        dt / 6.0 * (a0 + 4.0 * am + a1), -dt3 * (a0 + a1),           # p12
        -dt / 6.0 * (b0 + 4.0 * bm + b1), dt3 * (b0 + b1),           # p21
        -dt2 * (bm * a0 + 1.0 + b1 * am), dt4 * b1 * a0,            # p22
    ], axis=1)
    return nodes, coeffs


def _shoot(lams, prob, grid):
    """``u(R)`` and the number of sign changes of ``u`` for each ``lambda``."""
    nodes, coeffs = grid
    lams = np.asarray(lams, dtype=float)
    lam2 = lams * lams
    d = prob.dim
    r0 = nodes[0]
    u = 1.0 - lams * r0 * r0 / (2 * d)
    v = float(prob.w(np.array([r0]))[0]) * (-lams * r0 / d)
    changes = np.zeros(lams.shape, dtype=int)
    # very large trial values oscillate and may overflow; they have crossed zero long before
    with np.errstate(over="ignore", invalid="ignore"):
        for c11, d11, c12, d12, c21, d21, c22, d22 in coeffs.tolist():
            un = (1.0 + c11 * lams + d11 * lam2) * u + (c12 + d12 * lams) * v
            v = (c21 * lams + d21 * lam2) * u + (1.0 + c22 * lams + d22 * lam2) * v
            changes += (un * u < 0)
            u = un
    return u, changes


def _past_first(lams, prob, grid):
    uR, changes = _shoot(lams, prob, grid)
    return (changes >= 1) | (uR <= 0.0)


def _shoot_bisect(prob, grid, lo, hi, rtol=1e-14, width=256):
    while hi - lo > rtol * hi:
        lams = np.linspace(lo, hi, width + 2)[1:-1]
        past = _past_first(lams, prob, grid)
        j = int(np.argmax(past)) if past.any() else width
        new_lo = lams[j - 1] if j > 0 else lo
        new_hi = lams[j] if j < width else hi
        if (new_lo, new_hi) == (lo, hi):
            break
        lo, hi = new_lo, new_hi
    return 0.5 * (lo + hi)


def _bracket(prob, grid):
    lams = 2.0 ** np.arange(-4, 33) / prob.R ** 2
    past = _past_first(lams, prob, grid)
    if not past.any():
        raise BracketFailure(f"no eigenvalue found below {lams[-1]:.3g}")
    j = int(np.argmax(past))
    if j == 0:
        raise BracketFailure(f"u(R) already vanishes at lambda = {lams[0]:.3g}")
    return lams[j - 1], lams[j]


def solve_shooting(prob: SturmLiouvilleProblem, bracket=None, steps: int = SHOOT_STEPS) -> EigenResult:
    """First eigenvalue by shooting from the center.

    The state ``(u, w u')`` is integrated by RK4 from ``eps = 1e-6 R`` (series
    start ``u = 1 - lambda eps^2/(2 dim)``) over a short geometric lead-in and
    then ``steps`` uniform steps. ``lambda`` is bisected on whether ``u``
    has reached its first zero by ``R``. Without a ``bracket`` one is found
    on a doubling ladder. The error estimate compares with half the steps.
    """
    grid = _shoot_grid(prob, steps)
    if bracket is None:
        lo, hi = _bracket(prob, grid)
    else:
        lo, hi = map(float, bracket)
        if not 0 <= lo < hi:
            raise BracketFailure(f"invalid bracket {bracket!r}")
        ends = _past_first([lo, hi], prob, grid)
        if ends[0] or not ends[1]:
            raise BracketFailure(f"no first sign change of u(R; lambda) in [{lo!r}, {hi!r}]")
    lam = _shoot_bisect(prob, grid, lo, hi)
    half = _shoot_grid(prob, steps // 2)
    near = (lam * (1 - 1e-4), lam * (1 + 1e-4))
    ends = _past_first(list(near), prob, half)
    lo_c, hi_c = near if (not ends[0] and ends[1]) else (lo, max(hi, 1.5 * lam))
    lam_c = _shoot_bisect(prob, half, lo_c, hi_c)
    err = abs(lam - lam_c) / 15.0 + 1e-13 * lam
    return EigenResult(lam, "shooting", steps, err, lam, lam_c)


# ---------------------------------------------------------------- verification

def verify_eigen_bound(n: int, k: float, h: float, R_list, grid: int = 1024, tol: float | None = None,
                       scenario_id: str = "eigen") -> VerificationReport:
    """Compare the first eigenvalue of complex model balls of radius ``R <= h``
    with ``(KH(h)/2)^2``.

    Rows per radius: ``lambda-fd`` and ``lambda-shooting`` (value minus its
    error bar against the bound; margin is bound minus that, so negative is
    good) and ``agreement`` (difference of the two methods against the sum of
    their error bars).
    """
    tol = default_tol() if tol is None else tol
    R_list = [float(R) for R in R_list]
    if not R_list:
        raise DomainError("R_list is empty")
    bound = eigen_lower_bound(n, k, h)
    report = VerificationReport(scenario_id, "eigen",
                                {"n": n, "k": k, "h": h, "R": R_list, "grid": grid}, tol)
    details = []
    for t, R in enumerate(R_list):
        if not 0 < R <= h:
            raise DomainError(f"radius {R!r} must lie in (0, h = {h!r}]")
        prob = weight_complex_model(n, k, R)
        fd = solve_fd(prob, grid)
        sh = solve_shooting(prob)
        for res, label in ((fd, "lambda-fd"), (sh, "lambda-shooting")):
            report.add_row(t, label, R, res.lambda1, bound, margin=bound - (res.lambda1 - res.error))
        report.add_row(t, "agreement", R, abs(fd.lambda1 - sh.lambda1), fd.error + sh.error,
                       margin=abs(fd.lambda1 - sh.lambda1) - (fd.error + sh.error))
        u = fd.u
        details.append({
            "R": R, "lambda_fd": fd.lambda1, "error_fd": fd.error, "lambda_shooting": sh.lambda1,
            "error_shooting": sh.error, "slack": min(fd.lambda1, sh.lambda1) - bound,
            "eigenvector_one_sign": bool(np.all(u[:-1] > 0)),
            "rayleigh_rel_error": abs(fd.rayleigh - fd.raw) / fd.raw,
            "KH_R": model_KH(n, k, R),
        })
    slacks = [d["slack"] for d in details]
    order = np.argsort(R_list)
    report.notes = {
        "bound": bound,
        "per_radius": details,
        "slack_decreasing_in_R": bool(np.all(np.diff(np.array(slacks)[order]) < 0)) if len(slacks) > 1 else True,
    }
    report.status = "pass" if all(r["pass"] for r in report.rows) else "theorem-failure"
    return report
