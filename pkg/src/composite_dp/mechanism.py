"""The composite mechanism end to end: configure, optimise, map, perturb, map back."""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import mapping, shapes
from .analysis import certify_dp, theoretical_variance
from .domain import CanonicalDomain, OutputBounds, PrivacyParams
from .errors import InvalidParameter, OutOfBounds
from .optimizer import OptimizerConfig, optimize_enumeration
from .quadrature import spec_integral
from .sampler import UniformSource, build_cdf, sample
from .shapes import ActivationLike, BaseLike, PerturbationSpec


@dataclass(frozen=True)
class CompositeMechanism:
    spec: PerturbationSpec
    bounds: OutputBounds
    domain: CanonicalDomain
    privacy: PrivacyParams

    @property
    def name(self) -> str:
        return self.spec.name

    @property
    def input_range(self) -> tuple[float, float]:
        """Raw results the mechanism accepts: the preimage of [Cp_min, Cp_max].

        It is exactly one sensitivity wide and sits inside [l, u].
        """
        lo, hi = shapes.cp_bounds(self.spec)
        return (float(mapping.map_from_canonical(lo, self.bounds, self.domain)),
                float(mapping.map_from_canonical(hi, self.bounds, self.domain)))

    def to_canonical(self, value):
        return mapping.map_to_canonical(value, self.bounds, self.domain)

    def offset_for(self, value: float) -> float:
        cp = self.to_canonical(value)
        lo, hi = shapes.cp_bounds(self.spec)
        slack = mapping.SNAP_TOLERANCE * self.spec.params.L
        if not lo - slack <= cp <= hi + slack:
            i_lo, i_hi = self.input_range
            raise OutOfBounds(f"raw result {value!r} outside the accepted window "
                              f"[{i_lo!r}, {i_hi!r}] of output range "
                              f"[{self.bounds.lower!r}, {self.bounds.upper!r}]")
        return shapes.solve_activation_offset(self.spec, min(max(cp, lo), hi))

    def variance(self, value: float) -> float:
        """Real-space output variance at a given raw query result."""
        a = self.offset_for(value)
        cp = self.to_canonical(value)
        return theoretical_variance(self.spec, a, cp, self.domain.C)[1]

    def expected_output(self, value: float) -> float:
        """E[output] by quadrature of the density, mapped back to real space."""
        a = self.offset_for(value)
        mean = spec_integral(self.spec, a, power=1)
        return mapping.map_from_canonical(mean, self.bounds, self.domain)


@functools.lru_cache(maxsize=256)
def _optimized_spec(activation, base, epsilon: float, L: float,
                    cfg: OptimizerConfig) -> PerturbationSpec:
    return optimize_enumeration(activation, base, epsilon, L, cfg).spec


def linked_width(spec: PerturbationSpec, sensitivity: float) -> float:
    """Width u - l of the real output range for this spec and sensitivity."""
    lo, hi = shapes.cp_bounds(spec)
    return mapping.link_upper_bound(0.0, spec.params.L, lo, hi, sensitivity)


def from_spec(spec: PerturbationSpec, privacy: PrivacyParams, lower: Optional[float] = None,
              upper: Optional[float] = None, center: Optional[float] = None
              ) -> CompositeMechanism:
    """Wrap an existing spec; exactly one of ``lower``, ``upper``, ``center`` anchors the range."""
    if sum(v is not None for v in (lower, upper, center)) != 1:
        raise InvalidParameter("give exactly one of lower, upper, center")
    if abs(spec.epsilon - privacy.epsilon) > 1e-12 * privacy.epsilon:
        raise InvalidParameter(f"spec built for eps={spec.epsilon}, privacy says {privacy.epsilon}")
    certify_dp(spec)
    lo, hi = shapes.cp_bounds(spec)
    width = linked_width(spec, privacy.sensitivity)
    if lower is None:
        lower = upper - width if upper is not None else center - 0.5 * width
    bounds, dom = mapping.linked_bounds(lower, spec.params.L, lo, hi, privacy.sensitivity)
    return CompositeMechanism(spec, bounds, dom, privacy)


def build(privacy: PrivacyParams, activation: ActivationLike, base: BaseLike,
          lower: Optional[float] = None, L: float = 1.0,
          cfg: OptimizerConfig = OptimizerConfig(), *, upper: Optional[float] = None,
          center: Optional[float] = None) -> CompositeMechanism:
    """Optimise the shape for ``privacy.epsilon`` and link the output range.

    The optimiser result is cached per (kinds, epsilon, L, config); it does
    not depend on data or on the sensitivity, which only rescales the range.
    """
    if lower is None and upper is None and center is None:
        lower = 0.0
    act, bas = shapes.get_activation(activation), shapes.get_base(base)
    spec = _optimized_spec(act, bas, float(privacy.epsilon), float(L), cfg)
    return from_spec(spec, privacy, lower=lower, upper=upper, center=center)


def publish(mech: CompositeMechanism, raw_value: float, source: UniformSource, size=None):
    """Perturb one raw query result; returns ``size`` draws (or a scalar)."""
    a = mech.offset_for(raw_value)
    v = sample(build_cdf(mech.spec, a), source, size)
    out = mapping.map_from_canonical(v, mech.bounds, mech.domain)
    return out if np.ndim(out) else float(out)
