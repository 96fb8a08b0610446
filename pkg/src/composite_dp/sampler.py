"""Exact inverse-CDF sampling from a composite density.

The library never owns a random generator: callers pass either a seeded
``numpy.random.Generator`` or an explicit array of uniforms in [0, 1).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from . import shapes
from .errors import NumericNonconvergence
from .shapes import PerturbationSpec

CDF_TOL = 1e-12
MAX_STEPS = 200

UniformSource = Union[np.random.Generator, np.ndarray, list, float]


@dataclass(frozen=True)
class PiecewiseCdf:
    """CDF of one density (fixed spec and activation offset).

    ``breakpoints`` split [-L, L] into pieces on which the density is smooth;
    ``masses[i]`` is the CDF at ``breakpoints[i]``.
    """

    spec: PerturbationSpec
    a: float
    breakpoints: np.ndarray
    masses: np.ndarray

    @property
    def L(self) -> float:
        return self.spec.params.L

    def cdf(self, x):
        return shapes.cumulative(self.spec, self.a, x)

    def pdf(self, x):
        return shapes.density(self.spec, self.a, x)

    def ppf(self, u):
        """Inverse CDF, vectorised."""
        u = np.asarray(u, dtype=float)
        scalar = u.ndim == 0
        u = np.atleast_1d(u)
        x = _invert(self, u)
        return float(x[0]) if scalar else x


def build_cdf(spec: PerturbationSpec, a: float) -> PiecewiseCdf:
    pts = shapes.breakpoints(spec, a)
    masses = np.asarray(shapes.cumulative(spec, a, pts), dtype=float)
    masses[0] = 0.0
    return PiecewiseCdf(spec, float(a), pts, masses)


def _closed_form_start(cdf: PiecewiseCdf, u, lo, hi, f_lo):
    # affine density on each piece: p(x) = alpha + beta (x - lo), so the CDF
    # is quadratic in d = x - lo; use the cancellation-free root
    q1 = lo + 0.25 * (hi - lo)
    q3 = lo + 0.75 * (hi - lo)
    p1, p3 = cdf.pdf(q1), cdf.pdf(q3)
    beta = (p3 - p1) / np.where(q3 > q1, q3 - q1, 1.0)
    alpha = p1 - beta * (q1 - lo)
    r = np.maximum(u - f_lo, 0.0)
    disc = np.maximum(alpha * alpha + 2.0 * beta * r, 0.0)
    return lo + 2.0 * r / (alpha + np.sqrt(disc))


def _invert(cdf: PiecewiseCdf, u: np.ndarray) -> np.ndarray:
    pts, masses = cdf.breakpoints, cdf.masses
    idx = np.clip(np.searchsorted(masses, u, side="right") - 1, 0, len(pts) - 2)
    lo = pts[idx].astype(float)
    hi = pts[idx + 1].astype(float)
    f_lo = masses[idx]
    f_hi = masses[idx + 1]

    spec = cdf.spec
    if spec.base.constant and (spec.activation.piecewise_affine or spec.s1 == 0.0):
        x = _closed_form_start(cdf, u, lo, hi, f_lo)
    else:
        frac = (u - f_lo) / np.where(f_hi > f_lo, f_hi - f_lo, 1.0)
        x = lo + frac * (hi - lo)
    x = np.clip(x, lo, hi)

    # safeguarded Newton: keep a bracket, bisect whenever Newton leaves it
    active = np.ones(u.shape, dtype=bool)
    for _ in range(MAX_STEPS):
        xa = x[active]
        resid = cdf.cdf(xa) - u[active]
        done = (np.abs(resid) <= CDF_TOL) | (hi[active] - lo[active] <= 4e-16 * max(cdf.L, 1.0))
        idx_active = np.flatnonzero(active)
        active[idx_active[done]] = False
        if not active.any():
            return x
        keep = ~done
        ia = idx_active[keep]
        r = resid[keep]
        xk = xa[keep]
        lo[ia] = np.where(r < 0, xk, lo[ia])
        hi[ia] = np.where(r > 0, xk, hi[ia])
        p = cdf.pdf(xk)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = xk - r / p
        bad = ~np.isfinite(step) | (step <= lo[ia]) | (step >= hi[ia])
        x[ia] = np.where(bad, 0.5 * (lo[ia] + hi[ia]), step)
    raise NumericNonconvergence(
        f"inverse CDF did not reach |F(x) - u| <= {CDF_TOL} in {MAX_STEPS} steps")


def _uniforms(source: UniformSource, size) -> np.ndarray:
    if isinstance(source, np.random.Generator):
        return source.random(size)
    u = np.asarray(source, dtype=float)
    if np.any((u < 0) | (u > 1)):
        raise ValueError("uniforms must lie in [0, 1]")
    return u


def sample(cdf: PiecewiseCdf, source: UniformSource, size=None):
    """Draw from ``cdf``.

    ``source`` is a seeded ``numpy.random.Generator`` (``size`` draws are
    taken from it) or an explicit uniform value/array, which is transformed
    one-to-one so the output is monotone in the input.
    """
    u = _uniforms(source, size)
    x = cdf.ppf(u)
    return np.clip(x, -cdf.L, cdf.L) if np.ndim(x) else min(max(x, -cdf.L), cdf.L)
