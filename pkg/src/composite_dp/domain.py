"""Core value types shared by every module.

All types are frozen dataclasses that validate in ``__post_init__``, so an
instance that exists is an instance that satisfies its invariants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .errors import (
    DeltaOutOfRange,
    InvalidParameter,
    InvalidShape,
    NonPositiveEpsilon,
    NonPositiveSensitivity,
)


def _finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise InvalidParameter(f"{name} must be finite, got {value}")
    return value


@dataclass(frozen=True)
class PrivacyParams:
    """Privacy budget, l1-sensitivity and (Gaussian baseline only) delta."""

    epsilon: float
    sensitivity: float = 1.0
    delta: Optional[float] = None

    def __post_init__(self):
        eps = float(self.epsilon)
        if not eps > 0 or math.isnan(eps):
            raise NonPositiveEpsilon(f"epsilon must be > 0, got {self.epsilon}")
        _finite("epsilon", eps)
        sens = float(self.sensitivity)
        if not sens > 0 or not math.isfinite(sens):
            raise NonPositiveSensitivity(f"sensitivity must be > 0, got {self.sensitivity}")
        if self.delta is not None and not 0.0 < float(self.delta) < 1.0:
            raise DeltaOutOfRange(f"delta must lie in (0, 1), got {self.delta}")
        object.__setattr__(self, "epsilon", eps)
        object.__setattr__(self, "sensitivity", sens)


def validate_privacy_params(p: PrivacyParams) -> PrivacyParams:
    """Re-check ``p`` and return it unchanged.

    Construction already validates, but callers that receive a params object
    through a duck-typed path (e.g. ``dataclasses.replace`` on a subclass)
    can use this as an explicit gate.
    """
    PrivacyParams(p.epsilon, p.sensitivity, p.delta)
    return p


@dataclass(frozen=True)
class OutputBounds:
    lower: float
    upper: float

    def __post_init__(self):
        lo = _finite("lower", self.lower)
        hi = _finite("upper", self.upper)
        if not lo < hi:
            raise InvalidParameter(f"lower bound must be < upper bound, got [{lo}, {hi}]")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def width(self) -> float:
        return self.upper - self.lower


@dataclass(frozen=True)
class CanonicalDomain:
    """Canonical interval [-L, L] and the real-to-canonical scale factor C."""

    L: float
    C: float

    def __post_init__(self):
        if not _finite("L", self.L) > 0:
            raise InvalidParameter(f"L must be > 0, got {self.L}")
        if not _finite("C", self.C) > 0:
            raise InvalidParameter(f"C must be > 0, got {self.C}")
        object.__setattr__(self, "L", float(self.L))
        object.__setattr__(self, "C", float(self.C))


@dataclass(frozen=True)
class ShapeParams:
    """Hyper-parameters of one perturbation density.

    ``t`` is the edge value of the quartic base; for a constant base it is
    equal to ``y``. The activation offset ``a`` depends on the input and is
    therefore not stored here (see :func:`composite_dp.shapes.solve_activation_offset`).
    """

    k: float
    m: float
    y: float
    L: float = 1.0
    t: Optional[float] = None

    def __post_init__(self):
        k, m, y, L = (_finite(n, v) for n, v in
                      (("k", self.k), ("m", self.m), ("y", self.y), ("L", self.L)))
        if not L > 0:
            raise InvalidShape(f"L must be > 0, got {L}")
        if not 0.0 <= k < 1.0:
            raise InvalidShape(f"k must lie in [0, 1), got {k}")
        if not 0.0 <= m <= 2.0 * L:
            raise InvalidShape(f"m must lie in [0, 2L] = [0, {2 * L}], got {m}")
        if not y > 0:
            raise InvalidShape(f"y must be > 0, got {y}")
        t = y if self.t is None else _finite("t", self.t)
        if not 0.0 < t <= y * (1.0 + 1e-12):
            raise InvalidShape(f"t must lie in (0, y], got t={t}, y={y}")
        for name, value in (("k", k), ("m", m), ("y", y), ("L", L), ("t", t)):
            object.__setattr__(self, name, value)


@dataclass(frozen=True)
class MappedInput:
    cp: float
    cp_min: float
    cp_max: float

    def __post_init__(self):
        if not self.cp_min <= self.cp <= self.cp_max:
            raise InvalidParameter(
                f"Cp={self.cp} outside [{self.cp_min}, {self.cp_max}]")
