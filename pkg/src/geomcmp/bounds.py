"""Closed-form comparison bounds for manifolds with mean convex boundary.

Two normalizations of the boundary mean-curvature parameter ``h`` are in use:

``"mean"``
    ``H >= (n - 1) h``: ``h`` is a lower bound on the averaged principal
    curvature. The distance bound is then ``arccot(k, h)``.
``"radius"``
    ``H >= H_model(h)``: ``h`` is the radius of the model ball whose boundary
    has the same mean curvature. The distance bound is ``h`` itself.

:class:`RealBoundarySpec` forces the caller to say which one is meant.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, NamedTuple

from .errors import DomainError, InfimumNotAttained
from .modelfn import arccot, ct, period

Normalization = Literal["mean", "radius"]


@dataclass(frozen=True)
class RealBoundarySpec:
    n: int
    k: float
    h: float
    normalization: Normalization

    def __post_init__(self):
        if self.n < 2:
            raise DomainError(f"real dimension must be >= 2, got {self.n}")
        if self.normalization not in ("mean", "radius"):
            raise DomainError(f"unknown normalization {self.normalization!r}")
        if self.normalization == "mean" and self.k <= 0 and not self.h > math.sqrt(-self.k):
            raise DomainError(
                f"h must exceed sqrt(-k) = {math.sqrt(-self.k)!r} when k <= 0"
            )
        if self.normalization == "radius" and not 0 < self.h < period(self.k):
            raise DomainError(f"radius h={self.h!r} outside (0, {period(self.k)!r})")

    def as_radius(self) -> "RealBoundarySpec":
        if self.normalization == "radius":
            return self
        return RealBoundarySpec(self.n, self.k, mean_to_radius(self.k, self.h), "radius")

    def as_mean(self) -> "RealBoundarySpec":
        if self.normalization == "mean":
            return self
        return RealBoundarySpec(self.n, self.k, radius_to_mean(self.k, self.h), "mean")

    def rho_max(self) -> float:
        return self.as_radius().h


@dataclass(frozen=True)
class KahlerBoundarySpec:
    """Boundary data of a Kähler manifold of complex dimension ``n``.

    ``k`` is the bisectional-curvature normalization (``bisec >= 2k``), ``h``
    the model radius with ``H >= KH(h)`` and ``Hb`` an optional measured lower
    bound for the boundary mean curvature.
    """

    n: int
    k: float
    h: float | None = None
    Hb: float | None = None

    def __post_init__(self):
        if self.n < 1:
            raise DomainError(f"complex dimension must be >= 1, got {self.n}")
        if self.h is not None and not 0 < self.h < period(4 * self.k):
            raise DomainError(
                f"Kähler radius h={self.h!r} outside (0, {period(4 * self.k)!r})"
            )

    def rho_max(self) -> float:
        if self.h is not None:
            return self.h
        if self.Hb is None:
            raise DomainError("either h or Hb is required")
        return invert_KH(self.n, self.k, self.Hb)


def mean_to_radius(k: float, h_mean: float) -> float:
    return arccot(k, h_mean)


def radius_to_mean(k: float, h_radius: float) -> float:
    return ct(k, h_radius)


def rho_max_real(n: int, k: float, h: float) -> float:
    """Sharp upper bound for the distance to the boundary when ``H >= (n-1) h``
    and ``Ric >= (n-1) k``."""
    if n < 2:
        raise DomainError(f"real dimension must be >= 2, got {n}")
    return arccot(k, h)


def model_H(n: int, k: float, r: float) -> float:
    """Mean curvature of the geodesic sphere of radius ``r`` in the real space form."""
    return (n - 1) * ct(k, r)


def model_KH(n: int, k: float, r: float) -> float:
    """Mean curvature of the geodesic sphere of radius ``r`` in the complex space
    form of holomorphic sectional curvature ``4k`` (complex dimension ``n``)."""
    if not 0 < r < period(4 * k):
        raise DomainError(f"KH needs 0 < r < {period(4 * k)!r}, got r={r!r}")
    return ct(4 * k, r) + (2 * n - 2) * ct(k, r)


def _check_rho(h: float, rho: float) -> None:
    if not 0 <= rho < h:
        raise DomainError(f"need 0 <= rho < h, got rho={rho!r}, h={h!r}")


def laplace_bound_real(n: int, k: float, h: float, rho: float) -> float:
    """Upper bound ``-H_model(h - rho)`` for the Laplacian of the distance to
    the boundary (radius normalization)."""
    _check_rho(h, rho)
    return -model_H(n, k, h - rho)


class KahlerLaplaceBound(NamedTuple):
    value: float
    uniform: float


def laplace_bound_kahler(n: int, k: float, h: float, rho: float) -> KahlerLaplaceBound:
    """Pointwise bound ``-KH(h - rho)`` together with the weaker ``-KH(h)``."""
    _check_rho(h, rho)
    return KahlerLaplaceBound(-model_KH(n, k, h - rho), -model_KH(n, k, h))


def hessian_bounds_kahler(n: int, k: float, h: float, rho: float) -> tuple[float, float]:
    """Return ``(hopf, pair)``.

    ``hopf`` bounds ``Hess rho(J nu, J nu)`` and ``pair`` bounds
    ``Hess rho(V, V) + Hess rho(JV, JV)`` for ``V`` orthogonal to ``J nu``.
    Their combination ``hopf + (n - 1) pair`` is the Laplacian bound.
    """
    _check_rho(h, rho)
    if not h < period(4 * k):
        raise DomainError(f"h={h!r} outside the Kähler model domain")
    t = h - rho
    return -ct(4 * k, t), -2.0 * ct(k, t)


def KH_infimum(n: int, k: float) -> float:
    """Limit of ``KH(r)`` as ``r`` grows without bound (``k <= 0`` only)."""
    if k > 0:
        return -math.inf
    return 2 * n * math.sqrt(-k)


def invert_KH(n: int, k: float, Hb: float, *, rtol: float = 1e-10) -> float:
    """Solve ``model_KH(n, k, h) = Hb`` for ``h`` by bisection.

    Raises
    ------
    InfimumNotAttained
        If ``k <= 0`` and ``Hb`` does not exceed ``2 n sqrt(-k)``.
    """
    if n < 1:
        raise DomainError(f"complex dimension must be >= 1, got {n}")
    if k <= 0 and not Hb > KH_infimum(n, k):
        raise InfimumNotAttained(
            f"Hb={Hb!r} does not exceed the infimum 2n*sqrt(-k) = {KH_infimum(n, k)!r}; "
            "the distance to the boundary may be unbounded"
        )

    def KH(r):
        return model_KH(n, k, r)

    T = period(4 * k)
    lo = 1e-3 * min(1.0, T)
    while KH(lo) < Hb:
        lo *= 0.5
        if lo < 1e-300:
            raise DomainError(f"cannot bracket Hb={Hb!r}")
    hi = min(1.0, 0.5 * T)
    while KH(hi) >= Hb:
        if k > 0:
            nxt = min(2.0 * hi, 0.5 * (hi + T))
            if nxt >= T:
                break
            hi = nxt
        else:
            hi *= 2.0
            if hi > 1e6:
                raise InfimumNotAttained(
                    f"Hb={Hb!r} is too close to the infimum {KH_infimum(n, k)!r}"
                )

    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if KH(mid) > Hb:
            lo = mid
        else:
            hi = mid
    h = 0.5 * (lo + hi)
    if abs(KH(h) - Hb) > rtol * max(1.0, abs(Hb)):
        # closest endpoint, the bracket has collapsed to adjacent floats
        h = min((lo, hi), key=lambda r: abs(KH(r) - Hb))
    return h


def rho_max_kahler(n: int, k: float, Hb: float) -> float:
    """Sharp Kähler distance bound for boundary mean curvature ``H >= Hb``."""
    return invert_KH(n, k, Hb)


def eigen_lower_bound(n: int, k: float, h: float) -> float:
    """Lower bound ``(KH(h)/2)^2`` for the first Dirichlet eigenvalue."""
    kh = model_KH(n, k, h)
    if kh < 0:
        raise DomainError(f"KH(h) = {kh!r} < 0; the eigenvalue bound needs KH(h) >= 0")
    return (kh / 2.0) ** 2
