"""Adaptive quadrature over piecewise-smooth integrands.

Thin wrapper around :func:`scipy.integrate.quad` that integrates each smooth
piece separately, so kinks and jumps of the composite densities never land
inside an integration interval.
"""

from __future__ import annotations

import numpy as np
from scipy import integrate


def integrate_pieces(f, points, epsabs: float = 1e-13, epsrel: float = 1e-13) -> float:
    pts = np.unique(np.asarray(points, dtype=float))
    total = 0.0
    for lo, hi in zip(pts[:-1], pts[1:]):
        if hi - lo <= 0:
            continue
        val, _ = integrate.quad(f, lo, hi, epsabs=epsabs, epsrel=epsrel, limit=200)
        total += val
    return total


def spec_integral(spec, a: float, power: int = 0, lower=None, upper=None) -> float:
    """int x^power P(x) dx over [lower, upper] (default the whole domain)."""
    from .shapes import breakpoints, density

    L = spec.params.L
    lower = -L if lower is None else max(lower, -L)
    upper = L if upper is None else min(upper, L)
    if upper <= lower:
        return 0.0
    pts = [p for p in breakpoints(spec, a) if lower < p < upper]
    if power == 0:
        f = lambda x: float(density(spec, a, x))
    else:
        f = lambda x: float(density(spec, a, x)) * x ** power
    return integrate_pieces(f, [lower, *pts, upper])
