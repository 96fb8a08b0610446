"""Reference noise mechanisms used by the benchmark.

All samplers transform uniforms from an injected source, so they replay
exactly under a fixed seed. The discrete samplers use inverse-CDF lookup on
a probability table; they are reference implementations for benchmarking
and are not hardened against floating-point side channels.
"""

from __future__ import annotations

import enum
import math

import numpy as np

from .domain import PrivacyParams
from .errors import MissingDelta
from .sampler import UniformSource, _uniforms

# mass beyond this many standard deviations is below 1e-30 and is dropped
# from the discrete Gaussian table
_DG_TAIL_SIGMAS = 12.0


class BaselineKind(str, enum.Enum):
    LAPLACE = "Laplace"
    GAUSSIAN = "Gaussian"
    DISCRETE_LAPLACE = "DiscreteLaplace"
    DISCRETE_GAUSSIAN = "DiscreteGaussian"
    TRUNCATED_DISCRETE_LAPLACE = "TruncatedDiscreteLaplace"

    @classmethod
    def parse(cls, name: str) -> "BaselineKind":
        key = name.replace("_", "").replace("-", "").lower()
        for kind in cls:
            if kind.value.lower() == key:
                return kind
        raise ValueError(f"unknown baseline {name!r}")

    @property
    def needs_delta(self) -> bool:
        return self in (BaselineKind.GAUSSIAN, BaselineKind.DISCRETE_GAUSSIAN)


def laplace_scale(p: PrivacyParams) -> float:
    return p.sensitivity / p.epsilon


def gaussian_sigma(p: PrivacyParams) -> float:
    """sqrt(2 ln(1.25/delta)) * sensitivity / epsilon.

    The scalar query's l1 sensitivity doubles as its l2 sensitivity.
    """
    if p.delta is None:
        raise MissingDelta("the Gaussian mechanism needs delta")
    return math.sqrt(2.0 * math.log(1.25 / p.delta)) * p.sensitivity / p.epsilon


def _open_unit(u: np.ndarray) -> np.ndarray:
    # keep logs finite at the closed end of [0, 1)
    return np.clip(u, np.finfo(float).tiny, 1.0 - np.finfo(float).epsneg)


def laplace_noise(p: PrivacyParams, source: UniformSource, size=None):
    b = laplace_scale(p)
    u = np.asarray(_uniforms(source, size), dtype=float)
    v = _open_unit(u) - 0.5
    x = -b * np.sign(v) * np.log1p(-2.0 * np.abs(v))
    return float(x) if x.ndim == 0 else x


def gaussian_noise(p: PrivacyParams, source: UniformSource, size=None):
    """Box-Muller on pairs of uniforms.

    With a generator, ``2 * size`` uniforms are drawn; with an explicit array
    of uniforms its length must be even and half as many normals come back.
    """
    sigma = gaussian_sigma(p)
    if isinstance(source, np.random.Generator):
        n = 1 if size is None else int(np.prod(size))
        u = source.random(2 * n)
    else:
        u = np.asarray(_uniforms(source, None), dtype=float).ravel()
        n = len(u) // 2
    u1, u2 = _open_unit(u[:n]), u[n:2 * n]
    z = np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * math.pi * u2)
    x = sigma * z
    if size is None and isinstance(source, np.random.Generator):
        return float(x[0])
    return x.reshape(size) if size is not None else x


def discrete_laplace_pmf(z, p: PrivacyParams):
    """Pr[X = z] proportional to exp(-eps |z| / sensitivity) on the integers."""
    q = math.exp(-p.epsilon / p.sensitivity)
    z = np.asarray(z)
    return (1.0 - q) / (1.0 + q) * q ** np.abs(z)


def discrete_laplace_noise(p: PrivacyParams, source: UniformSource, size=None):
    """Difference of two i.i.d. geometric variables."""
    q = math.exp(-p.epsilon / p.sensitivity)
    if isinstance(source, np.random.Generator):
        n = 1 if size is None else int(np.prod(size))
        u = source.random(2 * n)
    else:
        u = np.asarray(_uniforms(source, None), dtype=float).ravel()
        n = len(u) // 2
    log_q = math.log(q)
    g1 = np.floor(np.log(_open_unit(1.0 - u[:n])) / log_q)
    g2 = np.floor(np.log(_open_unit(1.0 - u[n:2 * n])) / log_q)
    x = (g1 - g2).astype(np.int64)
    if size is None and isinstance(source, np.random.Generator):
        return int(x[0])
    return x.reshape(size) if size is not None else x


def _table_sample(support: np.ndarray, weights: np.ndarray, u: np.ndarray) -> np.ndarray:
    cdf = np.cumsum(weights)
    cdf /= cdf[-1]
    idx = np.searchsorted(cdf, u, side="right")
    return support[np.minimum(idx, len(support) - 1)]


def discrete_gaussian_pmf_table(p: PrivacyParams):
    sigma = gaussian_sigma(p)
    K = int(math.ceil(_DG_TAIL_SIGMAS * sigma)) + 1
    support = np.arange(-K, K + 1, dtype=np.int64)
    w = np.exp(-(support.astype(float) ** 2) / (2.0 * sigma * sigma))
    return support, w / w.sum()


def discrete_gaussian_noise(p: PrivacyParams, source: UniformSource, size=None):
    support, w = discrete_gaussian_pmf_table(p)
    u = np.asarray(_uniforms(source, size), dtype=float)
    x = _table_sample(support, w, np.atleast_1d(u)).reshape(u.shape)
    return int(x) if x.ndim == 0 else x


def truncation_bound(lower: float, upper: float) -> int:
    """Half-width B of the truncated support, in query units."""
    return int(math.ceil((upper - lower) / 2.0))


def truncated_discrete_laplace_pmf_table(p: PrivacyParams, bound: int):
    support = np.arange(-bound, bound + 1, dtype=np.int64)
    w = discrete_laplace_pmf(support, p)
    return support, w / w.sum()


def truncated_discrete_laplace_noise(p: PrivacyParams, bound: int,
                                     source: UniformSource, size=None):
    """Discrete Laplace conditioned on [-bound, bound]."""
    support, w = truncated_discrete_laplace_pmf_table(p, bound)
    u = np.asarray(_uniforms(source, size), dtype=float)
    x = _table_sample(support, w, np.atleast_1d(u)).reshape(u.shape)
    return int(x) if x.ndim == 0 else x


def noise_variance(kind: BaselineKind, p: PrivacyParams, bound: int | None = None) -> float:
    """Analytic variance of the additive noise."""
    if kind is BaselineKind.LAPLACE:
        return 2.0 * laplace_scale(p) ** 2
    if kind is BaselineKind.GAUSSIAN:
        return gaussian_sigma(p) ** 2
    if kind is BaselineKind.DISCRETE_LAPLACE:
        q = math.exp(-p.epsilon / p.sensitivity)
        return 2.0 * q / (1.0 - q) ** 2
    if kind is BaselineKind.DISCRETE_GAUSSIAN:
        support, w = discrete_gaussian_pmf_table(p)
    else:
        support, w = truncated_discrete_laplace_pmf_table(p, bound)
    s = support.astype(float)
    return float(np.sum(w * s * s) - np.sum(w * s) ** 2)


def add_noise(kind: BaselineKind, value: float, p: PrivacyParams, source: UniformSource,
              size=None, bound: int | None = None):
    """value + noise of the given kind."""
    if kind is BaselineKind.LAPLACE:
        noise = laplace_noise(p, source, size)
    elif kind is BaselineKind.GAUSSIAN:
        noise = gaussian_noise(p, source, size)
    elif kind is BaselineKind.DISCRETE_LAPLACE:
        noise = discrete_laplace_noise(p, source, size)
    elif kind is BaselineKind.DISCRETE_GAUSSIAN:
        noise = discrete_gaussian_noise(p, source, size)
    else:
        if bound is None:
            raise ValueError("truncated discrete Laplace needs a truncation bound")
        noise = truncated_discrete_laplace_noise(p, bound, source, size)
    return value + noise
