"""Index form of the boundary along a geodesic and the minimality of Jacobi fields.

For a variation field ``V`` along a geodesic leaving the boundary at ``s = 0``,

    I(V, V) = -<S V(0), V(0)> + int_0^l (|V'|^2 - <K V, V>) ds

with ``S`` the second fundamental form for the inner normal. Among fields with
prescribed ``V(l)`` the boundary Jacobi field minimizes ``I`` as long as no
focal point occurs on ``(0, l]``, and its value is ``V(l)^T U(l) V(l)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Literal, NamedTuple

import numpy as np
from scipy.integrate import simpson
from scipy.interpolate import CubicSpline

from ..errors import DomainError, FocalPointInRange, QuadratureUnresolved
from ..modelfn import cs, ct, sn
from ..report import VerificationReport, default_tol
from .fields import CurvatureField
from .integrator import check_shape_operator, grid_for, integrate

QUAD_TOL = 1e-7
ProfileKind = Literal["sn-profile", "f-profile", "g-profile", "custom"]


@dataclass(frozen=True)
class Profile:
    """Scalar coefficient of a test field ``V = f(s) E`` along a parallel unit field ``E``."""

    value: Callable[[np.ndarray], np.ndarray]
    deriv: Callable[[np.ndarray], np.ndarray]
    kind: ProfileKind = "custom"

    @classmethod
    def from_samples(cls, s, f) -> "Profile":
        spline = CubicSpline(np.asarray(s, float), np.asarray(f, float))
        return cls(spline, spline.derivative(), "custom")


def _scaled(f, df, scale, kind):
    return Profile(lambda s: f(s) / scale, lambda s: df(s) / scale, kind)


def sn_profile(k: float, ell: float) -> Profile:
    """``sn(k, s) / sn(k, l)``: the model Jacobi field vanishing at ``s = 0``, equal to 1 at ``l``."""
    scale = sn(k, ell)
    if scale == 0:
        raise DomainError("sn(k, l) vanishes; choose a shorter l")
    return _scaled(lambda s: sn(k, s), lambda s: cs(k, s), scale, "sn-profile")


def _boundary_model(kk: float, h: float, ell: float, kind):
    c = ct(kk, h)
    f = lambda s: cs(kk, s) - c * sn(kk, s)
    df = lambda s: -kk * sn(kk, s) - c * cs(kk, s)
    scale = f(ell)
    if not scale > 0:
        raise DomainError(f"model field vanishes before l = {ell!r}; need l < h")
    return _scaled(f, df, scale, kind)


def hopf_profile(k: float, h: float, ell: float) -> Profile:
    """Model Jacobi coefficient in the Hopf direction, normalized to 1 at ``l``.

    ``f = cs(4k, s) - ct(4k, h) sn(4k, s)`` solves ``f'' + 4k f = 0`` with
    ``f(0) = 1`` and ``f'(0) = -ct(4k, h)``.
    """
    return _boundary_model(4.0 * k, h, ell, "f-profile")


def pair_profile(k: float, h: float, ell: float) -> Profile:
    """Model coefficient ``g = cs(k, s) - ct(k, h) sn(k, s)`` for each J-paired direction, normalized at ``l``."""
    return _boundary_model(k, h, ell, "g-profile")


class IndexFormResult(NamedTuple):
    value: float
    field_kind: str


def _simpson_refined(integrand, ell, step):
    n = max(64, 2 * math.ceil(ell / (2.0 * step)))
    prev = None
    while n <= 2 ** 22:
        s = np.linspace(0.0, ell, n + 1)
        cur = float(simpson(integrand(s), x=s))
        if prev is not None:
            if abs(cur - prev) <= QUAD_TOL * max(1.0, abs(cur)):
                return cur + (cur - prev) / 15.0
        prev = cur
        n *= 2
    raise QuadratureUnresolved(f"Simpson refinement did not settle below {QUAD_TOL} on [0, {ell}]")


def index_form(profile: Profile, K_diag, II_val: float, ell: float,
               boundary: Literal["start", "end"] = "start", step: float = 1e-3) -> IndexFormResult:
    """Index form of ``V = f E`` on ``[0, l]`` with curvature ``K(s) = <R(E, g') g', E>``.

    ``boundary="start"`` puts the boundary at ``s = 0`` (geodesic leaving the
    boundary); ``"end"`` puts it at ``s = l`` (geodesic arriving at the
    boundary), in which case the boundary term is ``-II f(l)^2``.
    ``K_diag`` is a constant or a vectorized function of ``s``.
    """
    if not ell > 0:
        raise DomainError(f"l must be positive, got {ell!r}")
    if boundary not in ("start", "end"):
        raise DomainError(f"boundary must be 'start' or 'end', got {boundary!r}")
    Kf = K_diag if callable(K_diag) else (lambda s: np.full_like(s, float(K_diag)))

    def integrand(s):
        f = profile.value(s)
        return profile.deriv(s) ** 2 - Kf(s) * f ** 2

    integral = _simpson_refined(integrand, ell, step)
    foot = 0.0 if boundary == "start" else ell
    f0 = float(profile.value(np.array([foot]))[0])
    return IndexFormResult(integral - II_val * f0 ** 2, profile.kind)


def pair_index_form(profile: Profile, K_diags, II_vals, ell: float, step: float = 1e-3) -> IndexFormResult:
    """Sum of the index forms of ``f E_a`` and ``f E_b`` over a J-pair ``(a, b)``."""
    total = sum(index_form(profile, K, II, ell, step=step).value for K, II in zip(K_diags, II_vals))
    return IndexFormResult(total, profile.kind)


def _vector_index_form(V, dV, K, S, step):
    """Index form of sampled vector fields; ``V, dV`` have shape ``(N + 1, m)``."""
    density = np.einsum("ni,ni->n", dV, dV) - np.einsum("ni,nij,nj->n", V, K, V)
    return simpson(density, dx=step) - V[0] @ S @ V[0], simpson(density[::2], dx=2 * step) - V[0] @ S @ V[0]


def verify_basic_inequality(field: CurvatureField, S, ell: float, trials: int = 200, seed: int = 0,
                            step: float = 5e-4, knots: int = 5, amplitude: float = 1.0,
                            tol: float | None = None, scenario_id: str = "index-form") -> VerificationReport:
    """Check that boundary Jacobi fields minimize the index form.

    Trial 0 uses ``V = J``, the Jacobi field with ``J(l) = e`` for a random
    unit vector ``e``. The other trials use ``V = J + W`` where ``W`` is a
    random vector cubic spline with ``W(l) = 0`` (``W(0)`` is free, since the
    whole frame is tangent to the boundary). Each row records ``I(J) - I(V)``
    as its margin, so rows pass when ``I(V) >= I(J) - tol``.
    """
    if knots < 2:
        raise DomainError(f"need at least 2 spline knots, got {knots!r}")
    tol = default_tol() if tol is None else tol
    S = check_shape_operator(S, field.m)
    N, _ = grid_for(ell, step)
    # spline knots on Simpson panel boundaries of both the full and the halved grid
    unit = 4 * (knots - 1)
    N = unit * math.ceil(N / unit)
    step = ell / N
    traj = integrate(field, S, ell, step)
    if traj.focal_s is not None:
        raise FocalPointInRange(f"focal point at s={traj.focal_s:.9g} lies in (0, {ell}]")

    rng = np.random.default_rng(seed)
    m = field.m
    e = rng.standard_normal(m)
    e /= np.linalg.norm(e)
    c = np.linalg.solve(traj.A[-1], e)
    J = traj.A @ c
    dJ = traj.dA @ c
    K = traj.K
    IJ, IJ_half = _vector_index_form(J, dJ, K, S, step)
    exact = float(e @ traj.U[-1] @ e)
    if abs(IJ - IJ_half) > QUAD_TOL * max(1.0, abs(IJ)):
        raise QuadratureUnresolved(f"index form of J changed by {abs(IJ - IJ_half):.3e} under grid halving")

    report = VerificationReport(scenario_id, "index-form",
                                {"m": m, "ell": ell, "trials": trials, "seed": seed, "step": step},
                                tol, seed=seed)
    knot_s = np.linspace(0.0, ell, knots)
    gaps = []
    for t in range(trials):
        if t == 0:
            W = np.zeros_like(J)
            dW = np.zeros_like(J)
        else:
            vals = amplitude * rng.standard_normal((knots, m))
            vals[-1] = 0.0
            spline = CubicSpline(knot_s, vals, axis=0)
            W = spline(traj.s)
            dW = spline(traj.s, 1)
        IV, IV_half = _vector_index_form(J + W, dJ + dW, K, S, step)
        if abs(IV - IV_half) > QUAD_TOL * max(1.0, abs(IV)):
            raise QuadratureUnresolved(f"trial {t}: index form changed by {abs(IV - IV_half):.3e}")
        gaps.append(IV - IJ)
        report.add_row(t, "minimality", ell, IV, IJ, margin=IJ - IV)
    report.notes = {
        "jacobi_index_form": IJ,
        "jacobi_closed_form": exact,
        "closed_form_error": abs(IJ - exact),
        "min_gap_perturbed": min(gaps[1:]) if trials > 1 else None,
        "equality_gap": gaps[0],
    }
    return report
