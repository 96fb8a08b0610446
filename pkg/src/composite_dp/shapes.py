"""Activation and base functions and the composite perturbation density.

An activation is a bump ``H(x) = k * p((x - a) / m)`` supported on
``[a, a + m)``, where the *profile* ``p`` lives on ``[0, 1]`` and peaks at 1.
Everything the rest of the package needs from an activation (mass, first
and second moments, cumulative mass) follows from the profile integrals

    I0 = int p(s) ds,  I1 = int s p(s) ds,  I2 = int s^2 p(s) ds

so the three built-ins only differ in their profiles:

======  ===================  =======  =======  ===============
kind    profile              I0       I1       I2
======  ===================  =======  =======  ===============
A1      1                    1        1/2      1/3
A2      sin(pi s)            2/pi     1/pi     (pi^2 - 4)/pi^3
A3      1 - |2s - 1|         1/2      1/4      7/48
======  ===================  =======  =======  ===============

A base is an even, strictly positive floor density on ``[-L, L]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np
from scipy import integrate

from .domain import ShapeParams
from .errors import CpOutOfRange, Infeasible, InvalidParameter, InvalidShape, NonPositiveEpsilon

NORMALIZATION_TOL = 1e-9
_GRID = 2001


# ---------------------------------------------------------------------------
# activations
# ---------------------------------------------------------------------------

class Activation:
    """Base class for activation kinds."""

    name: str = "activation"
    I0: float
    I1: float
    I2: float
    # profile is affine between kinks, so densities over a constant base are
    # affine per piece and the CDF inverts in closed form
    piecewise_affine: bool = False
    kinks: tuple = ()

    @property
    def symmetric(self) -> bool:
        return abs(self.I1 - 0.5 * self.I0) <= 1e-12

    def profile(self, s):
        raise NotImplementedError

    def profile_cumulative(self, s):
        """int_0^s p, with ``s`` clipped to [0, 1]."""
        raise NotImplementedError

    # -- scaled quantities ---------------------------------------------------

    def integral(self, k: float, m: float) -> float:
        return k * m * self.I0

    def first_moment(self, k: float, m: float, a: float) -> float:
        return k * m * (a * self.I0 + m * self.I1)

    def second_moment(self, k: float, m: float, a: float) -> float:
        return k * m * (a * a * self.I0 + 2.0 * a * m * self.I1 + m * m * self.I2)

    def value(self, x, k: float, m: float, a: float):
        x = np.asarray(x, dtype=float)
        if m <= 0 or k == 0:
            return np.zeros_like(x)
        s = (x - a) / m
        inside = (s >= 0.0) & (s < 1.0)
        return np.where(inside, k * self.profile(np.clip(s, 0.0, 1.0)), 0.0)

    def cumulative(self, x, k: float, m: float, a: float):
        """int_{-inf}^x H."""
        x = np.asarray(x, dtype=float)
        if m <= 0 or k == 0:
            return np.zeros_like(x)
        return k * m * self.profile_cumulative(np.clip((x - a) / m, 0.0, 1.0))

    def breakpoints(self, m: float, a: float) -> list[float]:
        return [a] + [a + m * s for s in self.kinks] + [a + m]

    def __repr__(self):
        return self.name


class RectangleActivation(Activation):
    name = "A1"
    I0, I1, I2 = 1.0, 0.5, 1.0 / 3.0
    piecewise_affine = True

    def profile(self, s):
        return np.ones_like(np.asarray(s, dtype=float))

    def profile_cumulative(self, s):
        return np.clip(s, 0.0, 1.0)


class HalfSineActivation(Activation):
    name = "A2"
    I0 = 2.0 / math.pi
    I1 = 1.0 / math.pi
    I2 = (math.pi ** 2 - 4.0) / math.pi ** 3
    kinks = (0.5,)

    def profile(self, s):
        return np.sin(math.pi * np.asarray(s, dtype=float))

    def profile_cumulative(self, s):
        s = np.clip(s, 0.0, 1.0)
        return (1.0 - np.cos(math.pi * s)) / math.pi


class TriangleActivation(Activation):
    name = "A3"
    I0, I1, I2 = 0.5, 0.25, 7.0 / 48.0
    piecewise_affine = True
    kinks = (0.5,)

    def profile(self, s):
        s = np.asarray(s, dtype=float)
        return 1.0 - np.abs(2.0 * s - 1.0)

    def profile_cumulative(self, s):
        s = np.clip(s, 0.0, 1.0)
        return np.where(s <= 0.5, s * s, 2.0 * s - s * s - 0.5)


class CustomActivation(Activation):
    """User-defined activation from a profile on [0, 1].

    The profile must be nonnegative with maximum 1 (so the activation's
    supremum is ``k``). Its moments are computed once by adaptive quadrature.
    ``kinks`` lists interior points of the profile where it is not smooth;
    they are used as quadrature split points.
    """

    def __init__(self, profile: Callable, name: str = "custom", kinks=()):
        self._profile = profile
        self.name = name
        self.kinks = tuple(sorted(float(s) for s in kinks))
        grid = np.linspace(0.0, 1.0, _GRID)
        vals = np.asarray([profile(s) for s in grid], dtype=float)
        if np.any(vals < 0) or not np.all(np.isfinite(vals)):
            raise InvalidShape("activation profile must be finite and nonnegative")
        if abs(vals.max() - 1.0) > 1e-6:
            raise InvalidShape(f"activation profile must peak at 1, got {vals.max():.6g}")
        pts = (0.0,) + self.kinks + (1.0,)
        self.I0, self.I1, self.I2 = (
            sum(integrate.quad(lambda s, j=j: s ** j * profile(s), lo, hi,
                               epsabs=1e-13, epsrel=1e-13, limit=200)[0]
                for lo, hi in zip(pts[:-1], pts[1:]))
            for j in range(3))

    def profile(self, s):
        s = np.asarray(s, dtype=float)
        return np.vectorize(self._profile, otypes=[float])(s)

    def profile_cumulative(self, s):
        s = np.clip(np.asarray(s, dtype=float), 0.0, 1.0)
        pts = (0.0,) + self.kinks + (1.0,)

        def one(v):
            total = 0.0
            for lo, hi in zip(pts[:-1], pts[1:]):
                if v <= lo:
                    break
                total += integrate.quad(self._profile, lo, min(v, hi),
                                        epsabs=1e-13, epsrel=1e-13)[0]
            return total
        return np.vectorize(one, otypes=[float])(s)


# ---------------------------------------------------------------------------
# bases
# ---------------------------------------------------------------------------

class Base:
    name: str = "base"
    constant: bool = False

    def value(self, x, y, t, L):
        raise NotImplementedError

    def cumulative(self, x, y, t, L):
        """int_{-L}^x G, for x in [-L, L]."""
        raise NotImplementedError

    def integral(self, y, t, L) -> float:
        raise NotImplementedError

    def second_moment(self, y, t, L) -> float:
        raise NotImplementedError

    def floor(self, y, t, L) -> float:
        raise NotImplementedError

    def peak(self, y, t, L) -> float:
        raise NotImplementedError

    def solve_height(self, s1: float, k: float, L: float, epsilon: float):
        """Return ``(y, t)`` such that ``s1 + integral(y, t, L) == 1``."""
        raise NotImplementedError

    def dp_check(self, y, t, k, epsilon) -> Optional[str]:
        """Name of the violated privacy constraint, or ``None``."""
        raise NotImplementedError

    def __repr__(self):
        return self.name


class ConstantBase(Base):
    name = "B1"
    constant = True

    def value(self, x, y, t, L):
        return np.full_like(np.asarray(x, dtype=float), y)

    def cumulative(self, x, y, t, L):
        return y * (np.asarray(x, dtype=float) + L)

    def integral(self, y, t, L):
        return 2.0 * y * L

    def second_moment(self, y, t, L):
        return 2.0 * y * L ** 3 / 3.0

    def floor(self, y, t, L):
        return y

    def peak(self, y, t, L):
        return y

    def solve_height(self, s1, k, L, epsilon):
        y = (1.0 - s1) / (2.0 * L)
        return y, y

    def dp_check(self, y, t, k, epsilon):
        if (y + k) / y > math.exp(epsilon) * (1.0 + 1e-12):
            return "dp_ratio"
        return None


class QuarticBase(Base):
    """G(x) = y - (y - t) (x / L)^4, with t pinned to (y + k) e^-eps."""

    name = "B2"

    def value(self, x, y, t, L):
        x = np.asarray(x, dtype=float)
        return y - (y - t) * (x / L) ** 4

    def cumulative(self, x, y, t, L):
        x = np.asarray(x, dtype=float)
        return y * (x + L) - (y - t) * (x ** 5 + L ** 5) / (5.0 * L ** 4)

    def integral(self, y, t, L):
        return 2.0 * L * (t - y) / 5.0 + 2.0 * L * y

    def second_moment(self, y, t, L):
        return 2.0 * L ** 3 * (y / 3.0 - (y - t) / 7.0)

    def floor(self, y, t, L):
        return t

    def peak(self, y, t, L):
        return y

    def solve_height(self, s1, k, L, epsilon):
        # s1 + 2Ly - (2L/5)(y - (y + k) e^-eps) = 1 is linear in y
        q = math.exp(-epsilon)
        y = (1.0 - s1 - 0.4 * L * k * q) / (1.6 * L + 0.4 * L * q)
        return y, (y + k) * q

    def dp_check(self, y, t, k, epsilon):
        if t > y * (1.0 + 1e-12):
            return "edge_value"
        return None


class CustomBase(Base):
    """Base ``G(x) = y * g(x / L)`` from an even profile ``g`` on [-1, 1] peaking at 1.

    Privacy requires ``min g > 0``; a profile touching zero is accepted here
    and rejected by :func:`composite_dp.analysis.certify_dp`.
    """

    def __init__(self, profile: Callable, name: str = "custom"):
        self._profile = profile
        self.name = name
        grid = np.linspace(-1.0, 1.0, _GRID)
        vals = np.asarray([profile(s) for s in grid], dtype=float)
        if np.any(vals < 0) or not np.all(np.isfinite(vals)):
            raise InvalidShape("base profile must be finite and nonnegative")
        if np.max(np.abs(vals - vals[::-1])) > 1e-9:
            raise InvalidShape("base profile must be even")
        if abs(vals.max() - 1.0) > 1e-6:
            raise InvalidShape(f"base profile must peak at 1, got {vals.max():.6g}")
        self._min = float(vals.min())
        self.J0 = integrate.quad(profile, -1.0, 1.0, epsabs=1e-13, epsrel=1e-13, limit=200)[0]
        self.J2 = integrate.quad(lambda s: s * s * profile(s), -1.0, 1.0,
                                 epsabs=1e-13, epsrel=1e-13, limit=200)[0]

    def value(self, x, y, t, L):
        x = np.asarray(x, dtype=float)
        return y * np.vectorize(self._profile, otypes=[float])(x / L)

    def cumulative(self, x, y, t, L):
        def one(v):
            return integrate.quad(self._profile, -1.0, min(max(v / L, -1.0), 1.0),
                                  epsabs=1e-13, epsrel=1e-13, limit=200)[0]
        return y * L * np.vectorize(one, otypes=[float])(np.asarray(x, dtype=float))

    def integral(self, y, t, L):
        return y * L * self.J0

    def second_moment(self, y, t, L):
        return y * L ** 3 * self.J2

    def floor(self, y, t, L):
        return y * self._min

    def peak(self, y, t, L):
        return y

    def solve_height(self, s1, k, L, epsilon):
        y = (1.0 - s1) / (L * self.J0)
        return y, y

    def dp_check(self, y, t, k, epsilon):
        floor = self.floor(y, t, L=1.0)
        if floor <= 0 or (y + k) / floor > math.exp(epsilon) * (1.0 + 1e-12):
            return "dp_ratio"
        return None


A1 = RectangleActivation()
A2 = HalfSineActivation()
A3 = TriangleActivation()
B1 = ConstantBase()
B2 = QuarticBase()

ACTIVATIONS = {"A1": A1, "A2": A2, "A3": A3}
BASES = {"B1": B1, "B2": B2}
BUILTIN_PAIRS = ("A1B1", "A1B2", "A2B1", "A2B2", "A3B1", "A3B2")

ActivationLike = Union[str, Activation]
BaseLike = Union[str, Base]


def get_activation(kind: ActivationLike) -> Activation:
    if isinstance(kind, Activation):
        return kind
    try:
        return ACTIVATIONS[str(kind).upper()]
    except KeyError:
        raise InvalidShape(f"unknown activation {kind!r}; expected one of {sorted(ACTIVATIONS)}")


def get_base(kind: BaseLike) -> Base:
    if isinstance(kind, Base):
        return kind
    try:
        return BASES[str(kind).upper()]
    except KeyError:
        raise InvalidShape(f"unknown base {kind!r}; expected one of {sorted(BASES)}")


def parse_pair(pair: str) -> tuple[Activation, Base]:
    """'A1B2' -> (A1, B2)."""
    pair = pair.strip().upper()
    if len(pair) != 4:
        raise InvalidShape(f"expected a pair like 'A1B1', got {pair!r}")
    return get_activation(pair[:2]), get_base(pair[2:])


# ---------------------------------------------------------------------------
# the composite density
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PerturbationSpec:
    """An activation + base + shape parameters at a given privacy budget.

    Construction checks normalization and the height cap. The privacy ratio
    is deliberately *not* enforced here: :func:`solve_normalization` refuses
    to produce violating specs, and :func:`composite_dp.analysis.certify_dp`
    rejects hand-built ones with a witness.
    """

    activation: Activation
    base: Base
    params: ShapeParams
    epsilon: float
    s1: float = field(init=False, repr=False)
    s2: float = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "activation", get_activation(self.activation))
        object.__setattr__(self, "base", get_base(self.base))
        if not self.epsilon > 0:
            raise InvalidShape(f"epsilon must be > 0, got {self.epsilon}")
        p = self.params
        s1 = self.activation.integral(p.k, p.m)
        s2 = self.base.integral(p.y, p.t, p.L)
        object.__setattr__(self, "s1", s1)
        object.__setattr__(self, "s2", s2)
        if abs(s1 + s2 - 1.0) > NORMALIZATION_TOL:
            raise Infeasible("normalization", f"S1 + S2 = {s1 + s2!r} != 1")
        if self.base.peak(p.y, p.t, p.L) + p.k > 1.0 + 1e-12:
            raise Infeasible("height", f"y + k = {p.y + p.k!r} exceeds 1")
        if isinstance(self.base, QuarticBase):
            pinned = (p.y + p.k) * math.exp(-self.epsilon)
            if abs(p.t - pinned) > 1e-12 * max(1.0, pinned):
                raise InvalidShape(f"B2 edge value t={p.t} must equal (y+k)e^-eps = {pinned}")

    @property
    def name(self) -> str:
        return f"{self.activation.name}{self.base.name}"

    @property
    def L(self) -> float:
        return self.params.L

    def with_epsilon(self, epsilon: float) -> "PerturbationSpec":
        return solve_normalization(self.activation, self.base, self.params.k,
                                   self.params.m, self.params.L, epsilon)


def activation_integral(kind: ActivationLike, k: float, m: float) -> float:
    """Mass S1 of the activation."""
    return get_activation(kind).integral(k, m)


def base_integral(kind: BaseLike, y: float, t: Optional[float], L: float) -> float:
    """Mass S2 of the base over [-L, L]."""
    return get_base(kind).integral(y, y if t is None else t, L)


def check_budget(epsilon: float, L: float) -> None:
    if not (epsilon > 0 and math.isfinite(epsilon)):
        raise NonPositiveEpsilon(f"epsilon must be finite and > 0, got {epsilon}")
    if not (L > 0 and math.isfinite(L)):
        raise InvalidParameter(f"L must be finite and > 0, got {L}")


def solve_normalization(activation: ActivationLike, base: BaseLike, k: float, m: float,
                        L: float, epsilon: float) -> PerturbationSpec:
    """Derive the base height from ``(k, m)`` and return a feasible spec.

    Raises :class:`Infeasible` naming the first violated constraint.
    """
    check_budget(epsilon, L)
    act, bas = get_activation(activation), get_base(base)
    if not 0.0 <= k < 1.0:
        raise Infeasible("height", f"k must lie in [0, 1), got {k}")
    if not 0.0 <= m <= 2.0 * L:
        raise Infeasible("width", f"m must lie in [0, 2L], got {m}")
    s1 = act.integral(k, m)
    y, t = bas.solve_height(s1, k, L, epsilon)
    if not y > 0 or not t > 0:
        raise Infeasible("positivity", f"base height y={y:.6g} is not positive")
    if bas.peak(y, t, L) + k > 1.0 + 1e-12:
        raise Infeasible("height", f"y + k = {y + k:.6g} exceeds 1")
    failed = bas.dp_check(y, t, k, epsilon)
    if failed:
        raise Infeasible(failed, f"{act.name}{bas.name} with k={k}, m={m} violates "
                                 f"the e^eps ratio at eps={epsilon}")
    return PerturbationSpec(act, bas, ShapeParams(k=k, m=m, y=y, L=L, t=t), epsilon)


def is_feasible(activation, base, k, m, L, epsilon) -> bool:
    try:
        solve_normalization(activation, base, k, m, L, epsilon)
    except Infeasible:
        return False
    return True


def cp_bounds(spec: PerturbationSpec) -> tuple[float, float]:
    """Range of representable mapped inputs, from keeping the bump inside [-L, L]."""
    p, act = spec.params, spec.activation
    if spec.s1 == 0.0:
        return 0.0, 0.0
    return (act.first_moment(p.k, p.m, -p.L),
            act.first_moment(p.k, p.m, p.L - p.m))


def solve_activation_offset(spec: PerturbationSpec, cp: float) -> float:
    """Left edge ``a`` of the bump such that the density's mean equals ``cp``.

    The base is even, so only the activation contributes to the first
    moment, and that contribution is affine in ``a`` with slope S1.
    """
    p, act = spec.params, spec.activation
    lo, hi = cp_bounds(spec)
    slack = 1e-12 * p.L
    if not lo - slack <= cp <= hi + slack:
        raise CpOutOfRange(f"Cp={cp!r} outside [{lo!r}, {hi!r}]")
    if spec.s1 == 0.0:
        return -0.5 * p.m
    a = (cp - p.k * p.m * p.m * act.I1) / spec.s1
    return min(max(a, -p.L), p.L - p.m)


def density(spec: PerturbationSpec, a: float, x):
    """P(x) = H(x) + G(x) on [-L, L], zero outside."""
    p = spec.params
    x = np.asarray(x, dtype=float)
    val = spec.base.value(x, p.y, p.t, p.L) + spec.activation.value(x, p.k, p.m, a)
    out = np.where((x >= -p.L) & (x <= p.L), val, 0.0)
    return float(out) if out.ndim == 0 else out


def cumulative(spec: PerturbationSpec, a: float, x):
    """CDF of the composite density."""
    p = spec.params
    x = np.clip(np.asarray(x, dtype=float), -p.L, p.L)
    out = (spec.base.cumulative(x, p.y, p.t, p.L)
           + spec.activation.cumulative(x, p.k, p.m, a))
    return float(out) if out.ndim == 0 else out


def breakpoints(spec: PerturbationSpec, a: float) -> np.ndarray:
    """Sorted points in [-L, L] where the density is not smooth, endpoints included."""
    L = spec.params.L
    pts = [-L, L]
    if spec.s1 > 0:
        pts += spec.activation.breakpoints(spec.params.m, a)
    pts = np.unique(np.clip(pts, -L, L))
    return pts


def first_moment(spec: PerturbationSpec, a: float) -> float:
    p = spec.params
    return spec.activation.first_moment(p.k, p.m, a)


def second_moment(spec: PerturbationSpec, a: float) -> float:
    p = spec.params
    return (spec.base.second_moment(p.y, p.t, p.L)
            + spec.activation.second_moment(p.k, p.m, a))
