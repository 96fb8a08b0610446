"""Variance-driven hyper-parameter search.

Both searches only evaluate the analytic variance of candidate densities at
a hypothetical input; they never touch data, so running them costs no
privacy budget. The base height ``y`` is not searched: it is determined by
``(k, m)`` through normalization, so the search space is two-dimensional.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import shapes
from .analysis import theoretical_variance
from .errors import Infeasible, InfeasibleRegion, InvalidParameter, TargetUnreachable
from .shapes import ActivationLike, BaseLike, PerturbationSpec


@dataclass(frozen=True)
class OptimizerConfig:
    steps: tuple = (0.1, 0.01, 0.001)
    max_iterations_per_step: int = 10_000
    variance_target: Optional[float] = None
    hypothetical_cp: float = 0.0
    # evaluate at Cp = Cp_max of each candidate instead of hypothetical_cp
    worst_case: bool = False
    keep_trace: bool = False

    def __post_init__(self):
        steps = tuple(float(s) for s in self.steps)
        if not steps or any(s <= 0 for s in steps):
            raise InvalidParameter("steps must be positive")
        if any(b >= a for a, b in zip(steps, steps[1:])):
            raise InvalidParameter("steps must be strictly decreasing")
        if self.max_iterations_per_step < 1:
            raise InvalidParameter("max_iterations_per_step must be >= 1")
        object.__setattr__(self, "steps", steps)


@dataclass
class OptimizerResult:
    best_k: float
    best_m: float
    best_y: float
    best_variance: float
    evaluations: int
    spec: PerturbationSpec
    trace: list = field(default_factory=list)


def evaluate(activation, base, k: float, m: float, L: float, epsilon: float,
             cp: float = 0.0, worst_case: bool = False):
    """Real-space variance (unit sensitivity) of ``(k, m)``, or ``None`` if infeasible."""
    try:
        spec = shapes.solve_normalization(activation, base, k, m, L, epsilon)
    except Infeasible:
        return None
    lo, hi = shapes.cp_bounds(spec)
    if not hi > lo:
        return None
    point = hi if worst_case else cp
    if not lo <= point <= hi:
        return None
    a = shapes.solve_activation_offset(spec, point)
    return theoretical_variance(spec, a, point, hi - lo)[1], spec


def _axis(center: float, step: float, radius: float, lo: float, hi: float) -> np.ndarray:
    n = int(round(radius / step))
    pts = center + step * np.arange(-n, n + 1)
    # snap onto the step lattice to keep the scan free of float drift
    pts = np.round(pts / step) * step
    return pts[(pts >= lo) & (pts <= hi)]


def optimize_enumeration(activation: ActivationLike, base: BaseLike, epsilon: float,
                         L: float = 1.0, cfg: OptimizerConfig = OptimizerConfig()
                         ) -> OptimizerResult:
    """Coarse-to-fine grid search over (k, m).

    The first step scans the full range ``k in [0, 1)``, ``m in [0, 2L]``.
    Every finer step scans a window of half-width equal to the previous step
    around the incumbent, re-centering while the incumbent keeps moving,
    until the step's evaluation budget is spent. Scan order is k ascending
    then m ascending; the first minimum found wins ties.
    """
    shapes.check_budget(epsilon, L)
    act, bas = shapes.get_activation(activation), shapes.get_base(base)
    best = (math.inf, None, None, None)  # variance, k, m, spec
    evaluations = 0
    trace = []
    k_hi = math.nextafter(1.0, 0.0)

    def scan(ks, ms, budget):
        nonlocal best, evaluations
        used = 0
        improved = False
        for k in ks:
            for m in ms:
                if used >= budget:
                    return used, improved
                used += 1
                res = evaluate(act, bas, float(k), float(m), L, epsilon,
                               cfg.hypothetical_cp, cfg.worst_case)
                if res is None:
                    continue
                var, spec = res
                if var < best[0]:
                    best = (var, float(k), float(m), spec)
                    improved = True
                    if cfg.keep_trace:
                        trace.append(((float(k), float(m), spec.params.y), var))
        return used, improved

    prev = None
    for step in cfg.steps:
        budget = cfg.max_iterations_per_step
        if prev is None or best[3] is None:
            ks = _axis(0.5, step, 0.5, 0.0, k_hi)
            ms = _axis(L, step, L, 0.0, 2.0 * L)
            used, _ = scan(ks, ms, budget)
            evaluations += used
        else:
            while budget > 0:
                ks = _axis(best[1], step, prev, 0.0, k_hi)
                ms = _axis(best[2], step, prev, 0.0, 2.0 * L)
                used, improved = scan(ks, ms, budget)
                evaluations += used
                budget -= used
                if not improved:
                    break
        prev = step
    if best[3] is None:
        raise InfeasibleRegion(f"no feasible (k, m) for {act.name}{bas.name} at eps={epsilon}, L={L}")
    var, k, m, spec = best
    return OptimizerResult(k, m, spec.params.y, var, evaluations, spec, trace)


def optimize_search(activation: ActivationLike, base: BaseLike, epsilon: float,
                    L: float = 1.0, step: float = 0.01, variance_target: float = 1.0,
                    seed: int = 0, max_iterations: int = 10 ** 6,
                    cp: float = 0.0) -> OptimizerResult:
    """Randomised local search that stops at the first variance below the target.

    Starts from a random feasible point and repeatedly perturbs one
    coordinate by ``+-step``, keeping improvements.
    """
    shapes.check_budget(epsilon, L)
    act, bas = shapes.get_activation(activation), shapes.get_base(base)
    if not variance_target > 0:
        # variance is strictly positive at any finite epsilon
        raise TargetUnreachable("variance target must be > 0")
    rng = np.random.default_rng(seed)
    current = None
    for _ in range(100_000):
        k, m = rng.uniform(0.0, 1.0), rng.uniform(0.0, 2.0 * L)
        current = evaluate(act, bas, k, m, L, epsilon, cp)
        if current is not None:
            break
    if current is None:
        raise InfeasibleRegion(f"no feasible start found for {act.name}{bas.name} at eps={epsilon}")
    best_var, best_spec = current
    best_k, best_m = k, m
    evaluations = 1
    trace = [((k, m, best_spec.params.y), best_var)]
    while best_var >= variance_target:
        if evaluations >= max_iterations:
            raise TargetUnreachable(
                f"variance {best_var:.6g} still >= target {variance_target:.6g} "
                f"after {evaluations} evaluations")
        dk, dm = (step, 0.0) if rng.random() < 0.5 else (0.0, step * L)
        sign = 1.0 if rng.random() < 0.5 else -1.0
        k, m = best_k + sign * dk, best_m + sign * dm
        evaluations += 1
        res = evaluate(act, bas, k, m, L, epsilon, cp)
        if res is not None and res[0] < best_var:
            best_var, best_spec = res
            best_k, best_m = k, m
            trace.append(((k, m, best_spec.params.y), best_var))
    return OptimizerResult(best_k, best_m, best_spec.params.y, best_var,
                           evaluations, best_spec, trace)
