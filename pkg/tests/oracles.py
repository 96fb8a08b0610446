"""Reference implementations used as test oracles.

Everything here is written from the shape definitions directly (profiles,
piecewise densities, linear normalization solve) and integrated with
scipy/mpmath; none of it calls the library's closed forms.
"""

import math

import mpmath
import numpy as np
from scipy import integrate


def profile(kind, s):
    s = np.asarray(s, dtype=float)
    inside = (s >= 0) & (s < 1)
    if kind == "A1":
        v = np.ones_like(s)
    elif kind == "A2":
        v = np.sin(np.pi * s)
    elif kind == "A3":
        v = 1.0 - np.abs(2.0 * s - 1.0)
    else:
        raise ValueError(kind)
    return np.where(inside, v, 0.0)


def profile_moments(kind):
    """(int p, int s p, int s^2 p) over [0, 1] by mpmath quadrature."""
    f = {"A1": lambda s: 1,
         "A2": lambda s: mpmath.sin(mpmath.pi * s),
         "A3": lambda s: 1 - abs(2 * s - 1)}[kind]
    pts = [0, 0.5, 1]
    return tuple(float(mpmath.quad(lambda s: s ** j * f(s), pts)) for j in range(3))


MOMENTS = {k: profile_moments(k) for k in ("A1", "A2", "A3")}


def base_height(act, base, k, m, L, eps):
    """(y, t) from normalization, solved as a linear equation in y."""
    s1 = k * m * MOMENTS[act][0]
    if base == "B1":
        y = (1.0 - s1) / (2.0 * L)
        return y, y
    # S2 = 2Ly - (2L/5)(y - t), t = (y + k) e^-eps
    q = math.exp(-eps)
    y = (1.0 - s1 - 0.4 * L * k * q) / (2.0 * L - 0.4 * L + 0.4 * L * q)
    return y, (y + k) * q


def density(act, base, k, m, y, t, L, a, x):
    x = np.asarray(x, dtype=float)
    if base == "B1":
        g = np.full_like(x, y)
    else:
        g = y - (y - t) * (x / L) ** 4
    h = k * profile(act, (x - a) / m) if m > 0 else np.zeros_like(x)
    return np.where(np.abs(x) <= L, g + h, 0.0)


def integrate_density(act, base, k, m, y, t, L, a, power=0, lo=None, hi=None):
    lo = -L if lo is None else lo
    hi = L if hi is None else hi
    pts = sorted({lo, hi} | {p for p in (a, a + m / 2, a + m) if lo < p < hi})
    total = 0.0
    for u, v in zip(pts, pts[1:]):
        total += integrate.quad(
            lambda x: x ** power * float(density(act, base, k, m, y, t, L, a, x)),
            u, v, epsabs=1e-14, epsrel=1e-12, limit=200)[0]
    return total


def feasible(base, k, m, y, t, L, eps):
    if not (0 <= k < 1 and 0 <= m <= 2 * L and y > 0 and t > 0 and y + k <= 1 + 1e-12):
        return False
    if base == "B1":
        return (y + k) / y <= math.exp(eps) * (1 + 1e-12)
    return t <= y * (1 + 1e-12)


def grid_variance(act, base, eps, k, m, L=1.0):
    """Vectorised real-space variance (unit sensitivity) at Cp = 0.

    Returns NaN where (k, m) is infeasible or the input range is empty.
    """
    i0, i1, i2 = MOMENTS[act]
    k, m = np.broadcast_arrays(np.asarray(k, float), np.asarray(m, float))
    s1 = k * m * i0
    q = math.exp(-eps)
    if base == "B1":
        y = (1 - s1) / (2 * L)
        t = y
        ok = (y + k) <= math.exp(eps) * y * (1 + 1e-12)
        base_m2 = 2 * y * L ** 3 / 3
    else:
        y = (1 - s1 - 0.4 * L * k * q) / (1.6 * L + 0.4 * L * q)
        t = (y + k) * q
        ok = t <= y * (1 + 1e-12)
        base_m2 = 2 * L ** 3 * (y / 3 - (y - t) / 7)
    ok &= (y > 0) & (t > 0) & (y + k <= 1 + 1e-12) & (m <= 2 * L) & (k < 1)
    a = -m / 2
    act_m2 = k * m * (a * a * i0 + 2 * a * m * i1 + m * m * i2)
    width = 2 * s1 * (L - m / 2)  # Cp_max - Cp_min for symmetric profiles
    ok &= width > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        var = (base_m2 + act_m2) / width ** 2
    return np.where(ok, var, np.nan)


def ks_critical(n, alpha=0.001):
    """Asymptotic one-sample KS critical value."""
    return math.sqrt(-0.5 * math.log(alpha / 2)) / math.sqrt(n)
