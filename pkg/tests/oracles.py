"""Independent reference computations used only by the tests."""
import numpy as np


def rk4_model(k, t, y0, dy0, steps=20000):
    """Integrate y'' + k y = 0 to time t with classical RK4; returns (y, y')."""
    h = t / steps
    y, v = float(y0), float(dy0)
    for _ in range(steps):
        k1y, k1v = v, -k * y
        k2y, k2v = v + 0.5 * h * k1v, -k * (y + 0.5 * h * k1y)
        k3y, k3v = v + 0.5 * h * k2v, -k * (y + 0.5 * h * k2y)
        k4y, k4v = v + h * k3v, -k * (y + h * k3y)
        y += h * (k1y + 2 * k2y + 2 * k3y + k4y) / 6
        v += h * (k1v + 2 * k2v + 2 * k3v + k4v) / 6
    return y, v


def legal_t(k, frac, cap=3.0):
    """A point of (0, T_k) scaled by frac in (0, 1)."""
    T = np.pi / np.sqrt(k) if k > 0 else np.inf
    return frac * min(0.9 * T, cap)
