"""Utility and privacy analysis of composite densities."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import shapes
from .errors import CertificationFailed, ZeroActivationMass
from .quadrature import spec_integral
from .sampler import build_cdf, sample
from .shapes import ConstantBase, PerturbationSpec, QuarticBase

CERTIFY_RTOL = 1e-9


@dataclass(frozen=True)
class UtilityReport:
    variance_canonical: float
    variance_real: float
    h1_rate: float
    h2_rate: float
    dp_ratio: float
    bias_abs: float


def theoretical_variance(spec: PerturbationSpec, a: float, cp: float,
                         C: float) -> tuple[float, float]:
    """Canonical variance E[x^2] - Cp^2 and its real-space counterpart / C^2.

    Assumes ``a`` was obtained from :func:`shapes.solve_activation_offset`
    for ``cp``, so that E[x] = Cp.
    """
    var_c = shapes.second_moment(spec, a) - cp * cp
    return var_c, var_c / (C * C)


def scale_for(spec: PerturbationSpec, sensitivity: float = 1.0) -> float:
    lo, hi = shapes.cp_bounds(spec)
    return (hi - lo) / sensitivity


def h1_rate(spec: PerturbationSpec) -> float:
    """Base mass over activation mass."""
    if spec.s1 <= 0:
        raise ZeroActivationMass("activation has zero mass (k = 0 or m = 0)")
    return spec.s2 / spec.s1


def h2_rate(spec: PerturbationSpec, a: float, cp: float,
            n1: float = 0.25, n2: float = 0.75) -> float:
    """Ratio of density mass near Cp to mass farther out, toward the far edge.

    For ``cp >= 0`` the segments run left from ``cp`` to ``cp - n*(L + cp)``;
    for ``cp < 0`` they run right to ``cp + n*(L - cp)``.
    """
    L = spec.params.L
    if cp >= 0:
        q1, q2 = cp - n1 * (L + cp), cp - n2 * (L + cp)
    else:
        q1, q2 = cp + n1 * (L - cp), cp + n2 * (L - cp)
    f_cp = shapes.cumulative(spec, a, cp)
    near = abs(f_cp - shapes.cumulative(spec, a, q1))
    far = abs(f_cp - shapes.cumulative(spec, a, q2))
    return near / far


def _grid_extrema(spec: PerturbationSpec, n_offsets: int = 201, n_points: int = 2001):
    p = spec.params
    offsets = np.linspace(-p.L, p.L - p.m, n_offsets) if spec.s1 > 0 else np.array([-p.m / 2])
    xs = np.linspace(-p.L, p.L, n_points)
    best_sup = (-math.inf, None)
    best_inf = (math.inf, None)
    for a in offsets:
        grid = np.union1d(xs, np.clip(shapes.breakpoints(spec, a), -p.L, p.L))
        # include points just inside each half-open piece
        grid = np.union1d(grid, np.clip(grid - 1e-12, -p.L, p.L))
        vals = shapes.density(spec, a, grid)
        i, j = int(np.argmax(vals)), int(np.argmin(vals))
        if vals[i] > best_sup[0]:
            best_sup = (float(vals[i]), (float(a), float(grid[i])))
        if vals[j] < best_inf[0]:
            best_inf = (float(vals[j]), (float(a), float(grid[j])))
    return best_sup, best_inf


def dp_ratio(spec: PerturbationSpec) -> tuple[float, Optional[tuple]]:
    """sup P / inf P' over all admissible offsets, with a witness when searched."""
    p = spec.params
    builtin_act = spec.activation.name in shapes.ACTIVATIONS and \
        shapes.ACTIVATIONS[spec.activation.name] is spec.activation
    if builtin_act and isinstance(spec.base, (ConstantBase, QuarticBase)):
        return (p.y + p.k) / spec.base.floor(p.y, p.t, p.L), None
    (sup, w_sup), (inf, w_inf) = _grid_extrema(spec)
    if inf <= 0:
        return math.inf, (w_sup, w_inf)
    return sup / inf, (w_sup, w_inf)


def certify_dp(spec: PerturbationSpec) -> float:
    """Return the density ratio; raise :class:`CertificationFailed` above e^eps."""
    ratio, witness = dp_ratio(spec)
    bound = math.exp(spec.epsilon)
    if not ratio <= bound * (1.0 + CERTIFY_RTOL):
        if witness is None:
            p = spec.params
            witness = ((-p.m / 2, 0.0), (-p.L, p.L))
        raise CertificationFailed(ratio, bound, witness)
    return ratio


def utility_report(spec: PerturbationSpec, cp: Optional[float] = None,
                   sensitivity: float = 1.0) -> UtilityReport:
    """Bundle variance, rates, privacy ratio and quadrature bias at one input.

    ``cp`` defaults to half of Cp_max.
    """
    lo, hi = shapes.cp_bounds(spec)
    if cp is None:
        cp = 0.5 * hi
    a = shapes.solve_activation_offset(spec, cp)
    var_c, var_r = theoretical_variance(spec, a, cp, scale_for(spec, sensitivity))
    return UtilityReport(
        variance_canonical=var_c,
        variance_real=var_r,
        h1_rate=h1_rate(spec),
        h2_rate=h2_rate(spec, a, cp),
        dp_ratio=dp_ratio(spec)[0],
        bias_abs=abs(spec_integral(spec, a, power=1) - cp),
    )


# ---------------------------------------------------------------------------
# empirical probe
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EpsilonEstimate:
    """Histogram-based privacy-loss estimate.

    ``estimate`` is the largest absolute log-ratio of smoothed bin
    probabilities; ``band`` is ``z`` standard errors of that log-ratio.
    """

    estimate: float
    band: float
    bin_index: int
    n_samples: int
    bins: int


def histogram_epsilon(counts1, counts2, z: float = 3.0) -> EpsilonEstimate:
    c1 = np.asarray(counts1, dtype=float) + 1.0
    c2 = np.asarray(counts2, dtype=float) + 1.0
    p1, p2 = c1 / c1.sum(), c2 / c2.sum()
    logr = np.abs(np.log(p1 / p2))
    i = int(np.argmax(logr))
    se = math.sqrt(1.0 / c1[i] + 1.0 / c2[i])
    return EpsilonEstimate(float(logr[i]), z * se, i,
                           int(c1.sum() - len(c1)), len(c1))


def empirical_epsilon(samples1, samples2, lower: float, upper: float,
                      bins: int = 64, z: float = 3.0) -> EpsilonEstimate:
    """Privacy-loss estimate from two output samples, binned on [lower, upper].

    Samples outside the range are ignored, which makes the probe usable for
    unbounded baselines too.
    """
    edges = np.linspace(lower, upper, bins + 1)
    h1, _ = np.histogram(samples1, edges)
    h2, _ = np.histogram(samples2, edges)
    return histogram_epsilon(h1, h2, z)


def empirical_epsilon_probe(spec: PerturbationSpec, cp1: float, cp2: float,
                            bins: int = 64, n_samples: int = 10 ** 6, seed: int = 0,
                            batches: int = 1, workers: int = 1,
                            z: float = 3.0) -> EpsilonEstimate:
    """Estimate epsilon from samples of the densities at two mapped inputs.

    Each batch draws from its own stream spawned from ``seed``; histograms
    are summed, so the estimate does not depend on ``workers``.
    """
    lo, hi = shapes.cp_bounds(spec)
    if abs(cp1 - cp2) > (hi - lo) * (1.0 + 1e-12):
        raise ValueError("inputs are farther apart than one unit of sensitivity")
    cdf1 = build_cdf(spec, shapes.solve_activation_offset(spec, cp1))
    cdf2 = build_cdf(spec, shapes.solve_activation_offset(spec, cp2))
    L = spec.params.L
    edges = np.linspace(-L, L, bins + 1)
    sizes = [n_samples // batches + (1 if i < n_samples % batches else 0)
             for i in range(batches)]
    streams = np.random.SeedSequence(seed).spawn(batches)

    def run(args):
        n, ss = args
        g1, g2 = (np.random.default_rng(s) for s in ss.spawn(2))
        return (np.histogram(sample(cdf1, g1, n), edges)[0],
                np.histogram(sample(cdf2, g2, n), edges)[0])

    jobs = list(zip(sizes, streams))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(run, jobs))
    else:
        parts = [run(j) for j in jobs]
    h1 = sum(p[0] for p in parts)
    h2 = sum(p[1] for p in parts)
    return histogram_epsilon(h1, h2, z)
