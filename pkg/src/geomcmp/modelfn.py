"""Generalized trigonometric functions of a curvature constant ``k``.

``sn(k, t)`` solves ``phi'' + k phi = 0`` with ``phi(0) = 0, phi'(0) = 1`` and
``cs(k, t)`` is its derivative. For ``k > 0`` they are scaled sine/cosine, for
``k < 0`` scaled hyperbolic sine/cosine and for ``k = 0`` the functions ``t``
and ``1``. Near ``k t^2 = 0`` a short Taylor series is used so that the
functions are smooth in ``k`` across zero.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import DomainError

#: below this value of ``|k| t^2`` the Taylor branch is used
TAYLOR_SWITCH = 1e-6


def period(k: float) -> float:
    """First positive zero ``T_k`` of ``sn(k, .)``; ``inf`` for ``k <= 0``."""
    if k > 0:
        return math.pi / math.sqrt(k)
    return math.inf


def sn(k: float, t):
    """Generalized sine; ``t`` may be a float or an array."""
    if np.ndim(t):
        return _sn_array(k, np.asarray(t, dtype=float))
    x = k * t * t
    if abs(x) < TAYLOR_SWITCH:
        return t * (1.0 - x / 6.0 + x * x / 120.0 - x * x * x / 5040.0)
    if k > 0:
        rk = math.sqrt(k)
        return math.sin(rk * t) / rk
    rk = math.sqrt(-k)
    return math.sinh(rk * t) / rk


def cs(k: float, t):
    """Generalized cosine, the derivative of :func:`sn`."""
    if np.ndim(t):
        return _cs_array(k, np.asarray(t, dtype=float))
    x = k * t * t
    if abs(x) < TAYLOR_SWITCH:
        return 1.0 - x / 2.0 + x * x / 24.0 - x * x * x / 720.0
    if k > 0:
        return math.cos(math.sqrt(k) * t)
    return math.cosh(math.sqrt(-k) * t)


def _ct_array(k, t):
    x = k * t * t
    small = np.abs(x) < TAYLOR_SWITCH
    if k > 0:
        rk = math.sqrt(k)
        with np.errstate(divide="ignore"):
            closed = rk / np.tan(rk * t)
    elif k < 0:
        rk = math.sqrt(-k)
        with np.errstate(divide="ignore"):
            closed = rk / np.tanh(rk * t)
    else:
        return 1.0 / t
    if small.any():
        ts = t[small]
        closed[small] = _cs_array(k, ts) / _sn_array(k, ts)
    return closed


def _sn_array(k, t):
    x = k * t * t
    taylor = t * (1.0 - x / 6.0 + x * x / 120.0 - x * x * x / 5040.0)
    if k > 0:
        rk = math.sqrt(k)
        closed = np.sin(rk * t) / rk
    elif k < 0:
        rk = math.sqrt(-k)
        closed = np.sinh(rk * t) / rk
    else:
        return t.copy()
    return np.where(np.abs(x) < TAYLOR_SWITCH, taylor, closed)


def _cs_array(k, t):
    x = k * t * t
    taylor = 1.0 - x / 2.0 + x * x / 24.0 - x * x * x / 720.0
    if k > 0:
        closed = np.cos(math.sqrt(k) * t)
    elif k < 0:
        closed = np.cosh(math.sqrt(-k) * t)
    else:
        return np.ones_like(t)
    return np.where(np.abs(x) < TAYLOR_SWITCH, taylor, closed)


def ct(k: float, t: float) -> float:
    """Ratio ``cs(k, t) / sn(k, t)`` on ``(0, T_k)``.

    This is the principal curvature of a geodesic sphere of radius ``t`` in the
    space form of curvature ``k``.
    """
    if np.ndim(t):
        t = np.asarray(t, dtype=float)
        if not np.all((t > 0) & (t < period(k))):
            raise DomainError(f"ct(k={k!r}, .) requires 0 < t < {period(k)!r}")
        return _ct_array(k, t)
    if not 0.0 < t < period(k):
        raise DomainError(f"ct(k={k!r}, t={t!r}) requires 0 < t < {period(k)!r}")
    x = k * t * t
    if abs(x) < TAYLOR_SWITCH:
        return cs(k, t) / sn(k, t)
    if k > 0:
        rk = math.sqrt(k)
        return rk / math.tan(rk * t)
    rk = math.sqrt(-k)
    return rk / math.tanh(rk * t)


def arccot(k: float, h: float) -> float:
    """Inverse of :func:`ct`: the unique ``t`` in ``(0, T_k)`` with ``ct(k, t) = h``.

    For ``k > 0`` every real ``h`` is accepted (negative values give
    ``t > T_k / 2``). For ``k <= 0`` the range of ``ct`` is ``(sqrt(-k), inf)``.
    """
    if k > 0:
        rk = math.sqrt(k)
        return math.atan2(rk, h) / rk
    rk = math.sqrt(-k)
    if not h > rk:
        raise DomainError(
            f"h must exceed sqrt(-k) = {rk!r} when k <= 0 (got k={k!r}, h={h!r})"
        )
    if k == 0:
        return 1.0 / h
    return math.atanh(rk / h) / rk
