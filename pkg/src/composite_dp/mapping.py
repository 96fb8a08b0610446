"""Affine maps between the real output range [l, u] and the canonical [-L, L]."""

from __future__ import annotations

import numpy as np

from .domain import CanonicalDomain, OutputBounds
from .errors import DegenerateInputRange, NonPositiveSensitivity, OutOfBounds

# Values this close (relative to the interval width) outside a closed
# interval are treated as float noise and snapped onto the boundary.
SNAP_TOLERANCE = 1e-9


def scale_factor(cp_min: float, cp_max: float, sensitivity: float) -> float:
    """C = (Cp_max - Cp_min) / sensitivity."""
    if not cp_max > cp_min:
        raise DegenerateInputRange(f"Cp range [{cp_min}, {cp_max}] is empty")
    if not sensitivity > 0:
        raise NonPositiveSensitivity("sensitivity must be > 0")
    return (cp_max - cp_min) / sensitivity


def link_upper_bound(lower: float, L: float, cp_min: float, cp_max: float,
                     sensitivity: float) -> float:
    """Upper bound u such that one unit of sensitivity spans Cp_max - Cp_min."""
    if not cp_max > cp_min:
        raise DegenerateInputRange(f"Cp range [{cp_min}, {cp_max}] is empty")
    return lower + 2.0 * L * sensitivity / (cp_max - cp_min)


def linked_bounds(lower: float, L: float, cp_min: float, cp_max: float,
                  sensitivity: float) -> tuple[OutputBounds, CanonicalDomain]:
    upper = link_upper_bound(lower, L, cp_min, cp_max, sensitivity)
    return (OutputBounds(lower, upper),
            CanonicalDomain(L, scale_factor(cp_min, cp_max, sensitivity)))


def _snap(values, lo: float, hi: float, what: str):
    arr = np.asarray(values, dtype=float)
    slack = SNAP_TOLERANCE * (hi - lo)
    if np.any(arr < lo - slack) or np.any(arr > hi + slack) or np.any(np.isnan(arr)):
        bad = arr[(arr < lo - slack) | (arr > hi + slack) | np.isnan(arr)]
        raise OutOfBounds(f"{what} {bad.flat[0]!r} outside [{lo}, {hi}]")
    return np.clip(arr, lo, hi)


def _tidy(values, lo: float, hi: float):
    # absorbs rounding at the edges only; bounds that are not linked to the
    # domain legitimately map outside and are left untouched
    slack = SNAP_TOLERANCE * (hi - lo)
    snapped = np.clip(values, lo, hi)
    return np.where(np.abs(snapped - values) <= slack, snapped, values)


def map_to_canonical(c, bounds: OutputBounds, dom: CanonicalDomain):
    """gamma(c) = (c - l) C - L.

    Accepts scalars or arrays. Values outside ``[l, u]`` raise
    :class:`OutOfBounds` unless within the snapping tolerance.
    """
    c = _snap(c, bounds.lower, bounds.upper, "value")
    x = _tidy((c - bounds.lower) * dom.C - dom.L, -dom.L, dom.L)
    return float(x) if x.ndim == 0 else x


def map_from_canonical(x, bounds: OutputBounds, dom: CanonicalDomain):
    """gamma^-1(x) = (x + L) / C + l."""
    x = _snap(x, -dom.L, dom.L, "canonical value")
    c = _tidy((x + dom.L) / dom.C + bounds.lower, bounds.lower, bounds.upper)
    return float(c) if c.ndim == 0 else c


def map_to_canonical_from_upper(c, bounds: OutputBounds, dom: CanonicalDomain):
    """Equivalent form anchored on the upper bound: (c - u) C + L."""
    c = _snap(c, bounds.lower, bounds.upper, "value")
    x = (c - bounds.upper) * dom.C + dom.L
    return float(x) if np.ndim(x) == 0 else x


def map_from_canonical_from_upper(x, bounds: OutputBounds, dom: CanonicalDomain):
    """Equivalent form anchored on the upper bound: (x - L) / C + u."""
    x = _snap(x, -dom.L, dom.L, "canonical value")
    c = (x - dom.L) / dom.C + bounds.upper
    return float(c) if np.ndim(c) == 0 else c
