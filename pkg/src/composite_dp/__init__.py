"""Bounded, unbiased composite noise mechanism for differential privacy.

A perturbation density on [-L, L] is the sum of an activation bump, which
is shifted so the density's mean equals the mapped input, and a strictly
positive base floor that bounds the sup/inf density ratio by e^epsilon.
"""

from .analysis import (certify_dp, dp_ratio, empirical_epsilon, empirical_epsilon_probe,
                       h1_rate, h2_rate, theoretical_variance, utility_report)
from .domain import CanonicalDomain, OutputBounds, PrivacyParams, ShapeParams
from .errors import (CertificationFailed, CompositeDPError, CpOutOfRange, DataError,
                     Infeasible, InfeasibleRegion, InvalidParameter, NumericNonconvergence,
                     OutOfBounds, TargetUnreachable)
from .mapping import link_upper_bound, map_from_canonical, map_to_canonical, scale_factor
from .mechanism import CompositeMechanism, build, from_spec, publish
from .optimizer import OptimizerConfig, OptimizerResult, optimize_enumeration, optimize_search
from .sampler import PiecewiseCdf, build_cdf, sample
from .shapes import (A1, A2, A3, B1, B2, BUILTIN_PAIRS, CustomActivation, CustomBase,
                     PerturbationSpec, cp_bounds, density, solve_activation_offset,
                     solve_normalization)

__version__ = "0.1.0"

__all__ = [
    "certify_dp", "dp_ratio", "empirical_epsilon", "empirical_epsilon_probe", "h1_rate",
    "h2_rate", "theoretical_variance", "utility_report", "CanonicalDomain", "OutputBounds",
    "PrivacyParams", "ShapeParams", "CertificationFailed", "CompositeDPError",
    "CpOutOfRange", "DataError", "Infeasible", "InfeasibleRegion", "InvalidParameter",
    "NumericNonconvergence", "OutOfBounds", "TargetUnreachable", "link_upper_bound",
    "map_from_canonical", "map_to_canonical", "scale_factor", "CompositeMechanism", "build",
    "from_spec", "publish", "OptimizerConfig", "OptimizerResult", "optimize_enumeration",
    "optimize_search", "PiecewiseCdf", "build_cdf", "sample", "A1", "A2", "A3", "B1", "B2",
    "BUILTIN_PAIRS", "CustomActivation", "CustomBase", "PerturbationSpec", "cp_bounds",
    "density", "solve_activation_offset", "solve_normalization",
]
