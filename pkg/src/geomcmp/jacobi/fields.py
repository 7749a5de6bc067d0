"""Curvature fields along a unit-speed geodesic leaving the boundary.

A field assigns to each arclength ``s`` the symmetric matrix of curvatures
``K(s)_{ij} = R(gamma', E_i, gamma', E_j)`` in a parallel orthonormal frame
``E_1, ..., E_m`` of the normal space of ``gamma'``.

Real flavor uses ``m = n - 1`` and the model matrix ``k I``. Kähler flavor uses
``m = 2n - 1``; the last index is the Hopf direction (parallel transport of
``J nu``) with model curvature ``4k`` and the pairs ``(0, 1), (2, 3), ...``
are ``J``-related, each with model curvature ``k``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np

from ..errors import DomainError

Flavor = Literal["real", "kahler"]


def model_matrix(m: int, k: float, flavor: Flavor) -> np.ndarray:
    diag = np.full(m, float(k))
    if flavor == "kahler":
        diag[-1] = 4.0 * k
    elif flavor != "real":
        raise DomainError(f"unknown flavor {flavor!r}")
    return np.diag(diag)


def kahler_dim(m: int) -> int:
    """Complex dimension ``n`` for a Kähler field of size ``m = 2n - 1``."""
    if m < 1 or m % 2 == 0:
        raise DomainError(f"Kähler fields need odd size m = 2n - 1, got {m}")
    return (m + 1) // 2


@dataclass(frozen=True)
class CurvatureField:
    """Matrix-valued curvature along a geodesic.

    ``func`` maps a 1-d array of arclengths of length ``N`` to an array of
    shape ``(N, m, m)``.
    """

    m: int
    k: float
    flavor: Flavor
    func: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    s_max: float = math.inf
    label: str = "custom"

    def __post_init__(self):
        if self.flavor == "kahler":
            kahler_dim(self.m)

    def __call__(self, s):
        scalar = np.ndim(s) == 0
        values = self.func(np.atleast_1d(np.asarray(s, dtype=float)))
        return values[0] if scalar else values

    @property
    def model(self) -> np.ndarray:
        return model_matrix(self.m, self.k, self.flavor)

    def min_excess(self, s) -> float:
        """Smallest eigenvalue of ``K(s) - K_model`` over the samples ``s``."""
        K = self(np.atleast_1d(s)) - self.model
        K = 0.5 * (K + np.swapaxes(K, -1, -2))
        return float(np.linalg.eigvalsh(K).min())


def constant_field(K, k: float, flavor: Flavor = "real", label: str = "constant") -> CurvatureField:
    K = np.atleast_2d(np.asarray(K, dtype=float))
    m = K.shape[0]

    def func(s):
        return np.broadcast_to(K, (len(s), m, m)).copy()

    return CurvatureField(m, float(k), flavor, func, label=label)


def model_field(m: int, k: float, flavor: Flavor = "real") -> CurvatureField:
    """Constant model curvature: the space form (real) or complex space form (Kähler)."""
    return constant_field(model_matrix(m, k, flavor), k, flavor, label="model")


def cusp_field(m: int) -> CurvatureField:
    """``K = -I``: the warped product ``[0, inf) x_{exp(-t)} S^{n-1}`` seen from its boundary."""
    return constant_field(-np.eye(m), -1.0, "real", label="cusp")


def dip_field(m: int, k: float, start: float, stop: float, depth: float = 1.0,
              flavor: Flavor = "real") -> CurvatureField:
    """Model field lowered by a smooth bump of height ``depth`` supported on ``[start, stop]``.

    Violates the curvature hypothesis on purpose; used as a negative control.
    The bump is ``exp(1 - 1 / (1 - x^2))`` in the rescaled variable
    ``x in (-1, 1)``, so the field stays smooth and RK4 keeps its order.
    """
    if not stop > start:
        raise DomainError(f"need start < stop, got [{start!r}, {stop!r}]")
    R = model_matrix(m, k, flavor)
    eye = np.eye(m)
    mid, half = 0.5 * (start + stop), 0.5 * (stop - start)

    def func(s):
        x = (s - mid) / half
        bump = np.zeros_like(s)
        inside = np.abs(x) < 1.0
        bump[inside] = np.exp(1.0 - 1.0 / (1.0 - x[inside] ** 2))
        return R[None] - depth * bump[:, None, None] * eye[None]

    return CurvatureField(m, float(k), flavor, func, label="dip")


def _cosine_modes(rng, count, amplitude, max_freq):
    amps = rng.uniform(0.0, amplitude, size=count)
    freqs = rng.uniform(0.0, max_freq, size=count)
    phases = rng.uniform(0.0, 2 * math.pi, size=count)
    return amps, freqs, phases


def random_admissible_field(m: int, k: float, flavor: Flavor = "real", seed=0,
                            s_max: float = 10.0, roughness: float = 0.5,
                            amplitude: float = 1.0, max_freq: float = 3.0) -> CurvatureField:
    """Smooth random field with ``K(s) - K_model`` positive semidefinite.

    ``K(s) = K_model + Q(s)^T D(s) Q(s)`` where ``D`` is diagonal with entries
    ``roughness * sum_l a_l (1 + cos(w_l s + p_l))`` (at most five modes, so
    never negative) and ``Q(s)`` is the Cayley transform of a smooth skew
    matrix. The same ``seed`` always gives the same field.
    """
    if not 0.0 <= roughness <= 1.0:
        raise DomainError(f"roughness must lie in [0, 1], got {roughness!r}")
    rng = np.random.default_rng(seed)
    R = model_matrix(m, k, flavor)

    diag_modes = []
    for _ in range(m):
        count = int(rng.integers(1, 6))
        diag_modes.append(_cosine_modes(rng, count, amplitude, max_freq))
    iu = np.triu_indices(m, 1)
    skew_modes = []
    for _ in range(len(iu[0])):
        count = int(rng.integers(1, 4))
        a, w, p = _cosine_modes(rng, count, 1.0, max_freq)
        signs = rng.choice([-1.0, 1.0], size=count)
        skew_modes.append((a * signs, w, p))

    eye = np.eye(m)

    def func(s):
        N = len(s)
        if roughness == 0.0:
            return np.broadcast_to(R, (N, m, m)).copy()
        D = np.empty((N, m))
        for j, (a, w, p) in enumerate(diag_modes):
            D[:, j] = roughness * (a * (1.0 + np.cos(np.outer(s, w) + p))).sum(axis=1)
        X = np.zeros((N, m, m))
        for idx, (a, w, p) in enumerate(skew_modes):
            x = (a * np.cos(np.outer(s, w) + p)).sum(axis=1)
            X[:, iu[0][idx], iu[1][idx]] = x
            X[:, iu[1][idx], iu[0][idx]] = -x
        Q = np.linalg.solve(eye - X, eye + X)
        P = np.einsum("nji,nj,njk->nik", Q, D, Q)
        P = 0.5 * (P + np.swapaxes(P, 1, 2))
        return R[None] + P

    return CurvatureField(m, float(k), flavor, func, s_max=s_max, label="random")
