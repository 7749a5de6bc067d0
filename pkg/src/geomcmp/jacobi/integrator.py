"""Fixed-step RK4 for the matrix Jacobi equation ``A'' + K(s) A = 0``.

The columns of ``A`` are the boundary Jacobi fields: ``A(0) = I`` and
``A'(0) = -S`` with ``S`` the second fundamental form of the boundary with
respect to the inner normal. Before the first focal point the Hessian of the
distance to the boundary, restricted to the parallel frame, is
``U = A'(s) A(s)^{-1}`` and its trace is the Laplacian.

Because the system is linear, one RK4 step is a fixed ``2m x 2m`` matrix
acting on the stacked state ``[A; A']``. Those step matrices are built for all
steps at once and then chained, which keeps the Python loop to a handful of
small matrix operations per step and lets many trajectories share it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ..errors import DomainError, NonSymmetricField, StepTooCoarse
from .fields import CurvatureField

SYMMETRY_TOL = 1e-12
RICHARDSON_TOL = 1e-6
#: Hessian values are reported only this many steps before a focal point
FOCAL_GUARD = 10
#: a one-step shrink factor of A below this counts as passing through zero
ZERO_RATIO = 1e-8


def rk4_step_matrices(K_nodes, step):
    """RK4 propagators from curvature sampled at half-step nodes.

    ``K_nodes`` has shape ``(..., 2N + 1, m, m)`` holding ``K`` at
    ``s_0, s_0 + step/2, s_0 + step, ...``; the result has shape
    ``(..., N, 2m, 2m)`` and maps ``[A; A']`` at one node to the next.

    The blocks are the expanded RK4 stages for ``y' = [[0, I], [-K, 0]] y``.
    They are written so that for constant ``K`` the diagonal blocks, and
    ``P12`` against ``-K P21``-type terms, come out of identical floating-point
    operations; the exact Riccati fixed points of constant fields then survive
    rounding.
    """
    K0 = K_nodes[..., 0:-1:2, :, :]
    Kh = K_nodes[..., 1::2, :, :]
    K1 = K_nodes[..., 2::2, :, :]
    m = K_nodes.shape[-1]
    eye = np.eye(m)
    d = step
    a = 0.5 * step
    c2 = 2.0 * a * a
    c3 = d * a
    w = d / 6.0
    KhK0 = Kh @ K0
    K1Kh = K1 @ Kh
    P = np.empty(K0.shape[:-2] + (2 * m, 2 * m))
    P[..., :m, :m] = eye + w * (-2.0 * a * (K0 + Kh) - d * (Kh - a * a * KhK0))
    P[..., :m, m:] = w * ((6.0 * eye - c2 * Kh) - c3 * Kh)
    P[..., m:, :m] = w * ((-(K0 + 2.0 * Kh + 2.0 * Kh + K1) + c2 * KhK0) + c3 * K1Kh)
    P[..., m:, m:] = eye + w * (-2.0 * a * (Kh + Kh) - d * (K1 - a * a * K1Kh))
    return P


def _right_solve(N, M):
    """``N @ inv(M)`` for stacks; singular members use the identity instead."""
    Mt = np.swapaxes(M, -1, -2)
    Nt = np.swapaxes(N, -1, -2)
    try:
        X = np.linalg.solve(Mt, Nt)
    except np.linalg.LinAlgError:
        singular = np.linalg.det(M) == 0.0
        Mt = np.where(singular[..., None, None], np.eye(M.shape[-1]), Mt)
        X = np.linalg.solve(Mt, Nt)
    return np.swapaxes(X, -1, -2)


def _is_diagonal(X) -> bool:
    m = X.shape[-1]
    return not np.any(X[..., ~np.eye(m, dtype=bool)] != 0.0)


def _propagate_diagonal(P, S):
    m = P.shape[-1] // 2
    p11 = np.diagonal(P[..., :m, :m], axis1=-2, axis2=-1)
    p12 = np.diagonal(P[..., :m, m:], axis1=-2, axis2=-1)
    p21 = np.diagonal(P[..., m:, :m], axis1=-2, axis2=-1)
    p22 = np.diagonal(P[..., m:, m:], axis1=-2, axis2=-1)
    N = P.shape[-3]
    batch = P.shape[:-3]
    a = np.empty(batch + (N + 1, m))
    u = np.empty(batch + (N + 1, m))
    mu = np.empty(batch + (N, m))
    a[..., 0, :] = 1.0
    u[..., 0, :] = -np.diagonal(S, axis1=-2, axis2=-1)
    if not batch:
        # a single trajectory: per-component float loops beat per-step array calls
        for j in range(m):
            cols = [c[:, j].tolist() for c in (p11, p12, p21, p22)]
            aj, uj, mj = _scalar_recurrence(*cols, float(u[0, j]))
            a[:, j], u[:, j], mu[:, j] = aj, uj, mj
        return _embed(a, m), _embed(u, m), _embed(mu, m)
    with np.errstate(divide="ignore", invalid="ignore"):
        for i in range(N):
            ui = u[..., i, :]
            mi = p11[..., i, :] + p12[..., i, :] * ui
            mu[..., i, :] = mi
            a[..., i + 1, :] = mi * a[..., i, :]
            # elementwise division keeps exact invariants such as u = -1
            u[..., i + 1, :] = (p21[..., i, :] + p22[..., i, :] * ui) / mi

    return _embed(a, m), _embed(u, m), _embed(mu, m)


def _embed(d, m):
    out = np.zeros(d.shape + (m,))
    idx = np.arange(m)
    out[..., idx, idx] = d
    return out


def _scalar_recurrence(p11, p12, p21, p22, u0):
    a, u, mu = [1.0], [u0], []
    ai, ui = 1.0, u0
    for q11, q12, q21, q22 in zip(p11, p12, p21, p22):
        mi = q11 + q12 * ui
        mu.append(mi)
        ai = mi * ai
        num = q21 + q22 * ui
        if mi != 0.0:
            ui = num / mi
        else:
            ui = math.copysign(math.inf, num) if num != 0.0 else math.nan
        a.append(ai)
        u.append(ui)
    return a, u, mu


def propagate(P, S):
    """Chain RK4 step matrices from ``A(0) = I, A'(0) = -S``.

    The state is kept in the normalized form ``[I; U]`` with ``U = A' A^{-1}``
    and ``A`` is accumulated through the step factors
    ``M_i = P11_i + P12_i U_i`` (``A_{i+1} = M_i A_i``). This is the same RK4
    solution up to rounding, but an invariant ``U`` (e.g. ``U = -I`` for
    ``K = -I``, ``S = I``) is reproduced exactly instead of being swamped by
    the exponentially growing complementary mode. Batch axes lead.

    Returns ``(A, U, M)`` of shapes ``(..., N+1, m, m)``, ``(..., N+1, m, m)``
    and ``(..., N, m, m)``.
    """
    m = P.shape[-1] // 2
    S = np.asarray(S, dtype=float)
    P11, P12 = P[..., :m, :m], P[..., :m, m:]
    P21, P22 = P[..., m:, :m], P[..., m:, m:]
    if all(_is_diagonal(X) for X in (S, P11, P12, P21, P22)):
        return _propagate_diagonal(P, S)
    N = P.shape[-3]
    batch = P.shape[:-3]
    A = np.empty(batch + (N + 1, m, m))
    U = np.empty(batch + (N + 1, m, m))
    M = np.empty(batch + (N, m, m))
    A[..., 0, :, :] = np.eye(m)
    U[..., 0, :, :] = -S
    for i in range(N):
        Ui = U[..., i, :, :]
        Mi = P11[..., i, :, :] + P12[..., i, :, :] @ Ui
        M[..., i, :, :] = Mi
        A[..., i + 1, :, :] = Mi @ A[..., i, :, :]
        U[..., i + 1, :, :] = _right_solve(P21[..., i, :, :] + P22[..., i, :, :] @ Ui, Mi)
    return A, U, M


def check_symmetric(K) -> None:
    asym = np.abs(K - np.swapaxes(K, -1, -2)).max() if K.size else 0.0
    if asym > SYMMETRY_TOL:
        raise NonSymmetricField(f"curvature matrix asymmetry {asym:.3e} exceeds {SYMMETRY_TOL}")


def check_shape_operator(S, m):
    S = np.atleast_2d(np.asarray(S, dtype=float))
    if S.shape != (m, m):
        raise DomainError(f"shape operator must be {m}x{m}, got {S.shape}")
    if np.abs(S - S.T).max() > SYMMETRY_TOL:
        raise NonSymmetricField(f"shape operator asymmetry {np.abs(S - S.T).max():.3e} exceeds {SYMMETRY_TOL}")
    return S


def focal_steps(M):
    """Index of the first step containing a focal point, per trajectory.

    ``A_i^{-1} A_{i+1}`` is similar to the step factor ``M_i``. A step
    contains a focal point when that matrix acquires an eigenvalue with real
    part at most ``ZERO_RATIO``; over a short step it is otherwise close to the
    identity. Unlike the sign of ``det A`` this also catches multiple
    (degenerate) focal points. Returns -1 where none is found.
    """
    M = np.nan_to_num(M, nan=0.0, posinf=1e300, neginf=-1e300)
    crossing = np.linalg.eigvals(M).real.min(axis=-1) <= ZERO_RATIO
    return np.where(crossing.any(axis=-1), crossing.argmax(axis=-1), -1)


def refine_focal(field: CurvatureField, s0: float, U0, step: float, tol: float = 1e-15) -> float:
    """Bisect a sub-step length ``tau`` in ``(0, step]`` for the focal point."""
    m = field.m

    def crossed(tau):
        K = field(np.array([s0, s0 + 0.5 * tau, s0 + tau]))
        P = rk4_step_matrices(K, tau)[0]
        M = P[:m, :m] + P[:m, m:] @ U0
        return np.linalg.eigvals(M).real.min() <= 0.0

    if not crossed(step):
        # A shrank below ZERO_RATIO within the step without changing sign
        return s0 + step
    lo, hi = 0.0, step
    while hi - lo > tol * max(1.0, s0):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if crossed(mid):
            hi = mid
        else:
            lo = mid
    return s0 + 0.5 * (lo + hi)


def grid_for(s_max: float, step: float) -> tuple[int, float]:
    """Number of steps and the actual step so that ``N * step == s_max``."""
    if not step > 0:
        raise DomainError(f"step must be positive, got {step!r}")
    if not s_max > 0:
        raise DomainError(f"s_max must be positive, got {s_max!r}")
    ratio = s_max / step
    N = max(2, round(ratio) if abs(ratio - round(ratio)) < 1e-9 * ratio else math.ceil(ratio))
    return N, s_max / N


def last_reportable(n_steps: int, step: float, focal: float | None) -> int:
    """Index of the last sample at which Hessian values are trusted."""
    if focal is None:
        return n_steps
    return min(n_steps, int(math.floor((focal - FOCAL_GUARD * step) / step + 1e-9)))


@dataclass
class JacobiTrajectory:
    """Sampled boundary Jacobi fields ``A(s)``, ``A'(s)`` on a uniform grid."""

    step: float
    s: np.ndarray
    A: np.ndarray
    dA: np.ndarray
    U: np.ndarray = field(repr=False)
    focal_s: float | None = None
    K: np.ndarray | None = field(default=None, repr=False)

    @property
    def m(self) -> int:
        return self.A.shape[-1]

    @property
    def last_reportable(self) -> int:
        return last_reportable(len(self.s) - 1, self.step, self.focal_s)

    @cached_property
    def hess(self) -> np.ndarray:
        """Hessian of the distance to the boundary; NaN past the reportable range."""
        H = np.full(self.U.shape, np.nan)
        last = self.last_reportable
        if last >= 0:
            H[: last + 1] = self.U[: last + 1]
        return H

    @cached_property
    def laplacian(self) -> np.ndarray:
        return np.trace(self.hess, axis1=-2, axis2=-1)

    def index_of(self, s: float) -> int:
        return int(round(s / self.step))

    def hess_at(self, s: float) -> np.ndarray:
        return self.hess[self.index_of(s)]


def _richardson(U_coarse, U_fine, last, s_last, label=""):
    coarse = np.trace(U_coarse[last])
    fine = np.trace(U_fine[2 * last])
    if abs(coarse - fine) > RICHARDSON_TOL:
        raise StepTooCoarse(
            f"{label}Laplacian at s={s_last:.6g} changed by {abs(coarse - fine):.3e} "
            "under step halving"
        )


def integrate(field: CurvatureField, S, s_max: float, step: float = 1e-3,
              check: bool = True) -> JacobiTrajectory:
    """Integrate the boundary Jacobi fields on ``[0, s_max]``.

    The step is shrunk slightly so that it divides ``s_max``. With ``check``
    the run is repeated at half the step and :class:`StepTooCoarse` is raised
    if the Laplacian at the last reportable sample moves by more than 1e-6.
    """
    m = field.m
    S = check_shape_operator(S, m)
    if s_max > field.s_max:
        raise DomainError(f"field defined up to {field.s_max!r}, asked for {s_max!r}")
    N, step = grid_for(s_max, step)
    s_quarter = np.linspace(0.0, s_max, 4 * N + 1)
    Kq = field(s_quarter)
    check_symmetric(Kq)
    A, U, M = propagate(rk4_step_matrices(Kq[::2], step), S)

    s = np.linspace(0.0, s_max, N + 1)
    focal = None
    i = int(focal_steps(M))
    if i >= 0:
        focal = refine_focal(field, s[i], U[i], step)
    traj = JacobiTrajectory(step, s, A, U @ A, U, focal, K=Kq[::4])

    if check:
        last = traj.last_reportable
        if last >= 0:
            _, U_fine, _ = propagate(rk4_step_matrices(Kq, 0.5 * step), S)
            _richardson(U, U_fine, last, s[last])
    return traj


def first_focal(field: CurvatureField, S, s_limit: float, step: float = 1e-3) -> float | None:
    """First focal point of the boundary along the geodesic in ``(0, s_limit]``."""
    return integrate(field, S, s_limit, step).focal_s


def integrate_batch(fields, shapes, s_max: float, step: float, check: bool = True,
                    check_until: float | None = None):
    """Integrate several fields of equal size on a common grid.

    Returns ``(s, step, U, focal)``: the sample grid, the actual step, the
    Hessians ``U`` of shape ``(T, N + 1, m, m)`` (meaningful only up to
    :func:`last_reportable`) and the list of focal times (``None`` where
    absent). Applies the same step-halving check as :func:`integrate`, at the
    last reportable sample not beyond ``check_until`` when that is given.
    """
    N, step = grid_for(s_max, step)
    m = fields[0].m
    s_quarter = np.linspace(0.0, s_max, 4 * N + 1)
    Kq = np.stack([f(s_quarter) for f in fields])
    check_symmetric(Kq)
    S = np.stack([check_shape_operator(x, m) for x in shapes])
    _, U, M = propagate(rk4_step_matrices(Kq[:, ::2], step), S)
    s = np.linspace(0.0, s_max, N + 1)

    focal = []
    for t, i in enumerate(focal_steps(M)):
        focal.append(None if i < 0 else refine_focal(fields[t], s[i], U[t, i], step))

    if check:
        _, U_fine, _ = propagate(rk4_step_matrices(Kq, 0.5 * step), S)
        for t in range(len(fields)):
            last = last_reportable(N, step, focal[t])
            if check_until is not None:
                last = min(last, int(math.floor(check_until / step + 1e-9)))
            if last >= 0:
                _richardson(U[t], U_fine[t], last, s[last], label=f"trial {t}: ")
    return s, step, U, focal
