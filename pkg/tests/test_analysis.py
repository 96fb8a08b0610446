import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

import oracles
from composite_dp import analysis, shapes
from composite_dp.domain import ShapeParams
from composite_dp.errors import CertificationFailed, Infeasible, ZeroActivationMass
from composite_dp.optimizer import optimize_enumeration


def test_variance_example():
    spec = shapes.solve_normalization("A1", "B1", 0.4, 0.5, 1.0, 1.0)
    var_c, var_r = analysis.theoretical_variance(spec, -0.25, 0.0, 2.0)
    expected = 2 * 0.4 / 3 + 0.4 * 0.5 ** 3 / 12
    assert var_c == pytest.approx(expected, abs=1e-15)
    assert var_c == pytest.approx(0.2708333333333, abs=1e-12)
    quad = oracles.integrate_density("A1", "B1", 0.4, 0.5, 0.4, 0.4, 1.0, -0.25, power=2)
    assert var_c == pytest.approx(quad, abs=1e-10)
    assert var_r == var_c / 4.0


def test_pure_base_variance():
    spec = shapes.PerturbationSpec("A1", "B1", ShapeParams(0.0, 0.5, 0.5), 1.0)
    assert analysis.theoretical_variance(spec, -0.25, 0.0, 1.0)[0] == pytest.approx(1 / 3)


spec_args = st.tuples(st.sampled_from(shapes.BUILTIN_PAIRS), st.floats(0.01, 0.99),
                      st.floats(0.01, 1.99), st.floats(0.1, 6.0), st.floats(0, 1))


@settings(max_examples=200, deadline=None)
@given(spec_args)
def test_second_moment_matches_quadrature(args):
    pair, k, m, eps, frac = args
    try:
        spec = shapes.solve_normalization(pair[:2], pair[2:], k, m, 1.0, eps)
    except Infeasible:
        assume(False)
    lo, hi = shapes.cp_bounds(spec)
    cp = lo + frac * (hi - lo)
    a = shapes.solve_activation_offset(spec, cp)
    p = spec.params
    quad = oracles.integrate_density(pair[:2], pair[2:], p.k, p.m, p.y, p.t, 1.0, a, power=2)
    assert shapes.second_moment(spec, a) == pytest.approx(quad, abs=1e-9)


@pytest.mark.parametrize("pair", shapes.BUILTIN_PAIRS)
def test_real_variance_invariant_in_L(pair):
    # the construction is scale-covariant: (k / L, m L, y / L) at half-width L
    # is the L = 1 density stretched by L
    act, base = pair[:2], pair[2:]
    k, m, eps, frac = 0.3, 0.6, 1.0, 0.4
    out = []
    for L in (1.0, 2.0):
        spec = shapes.solve_normalization(act, base, k / L, m * L, L, eps)
        lo, hi = shapes.cp_bounds(spec)
        cp = lo + frac * (hi - lo)
        a = shapes.solve_activation_offset(spec, cp)
        out.append(analysis.theoretical_variance(spec, a, cp, analysis.scale_for(spec, 3.0))[1])
    assert out[0] == pytest.approx(out[1], abs=1e-6)


def test_h1_rate():
    spec = shapes.solve_normalization("A1", "B1", 0.4, 0.5, 1.0, 1.0)
    assert analysis.h1_rate(spec) == pytest.approx(4.0)
    flat = shapes.solve_normalization("A1", "B1", 0.0, 0.5, 1.0, 1.0)
    with pytest.raises(ZeroActivationMass):
        analysis.h1_rate(flat)


def test_optimized_h1_rate_near_reference():
    res = optimize_enumeration("A1", "B1", 1.0)
    assert analysis.h1_rate(res.spec) == pytest.approx(1.466, rel=0.10)


@pytest.mark.parametrize("act", ["A1", "A2", "A3"])
@pytest.mark.parametrize("sign", [1, -1])
def test_h2_rate_one_third_when_disjoint(act, sign):
    spec = shapes.solve_normalization(act, "B1", 0.3, 0.2, 1.0, 1.0)
    cp = sign * 0.7 * shapes.cp_bounds(spec)[1]
    a = shapes.solve_activation_offset(spec, cp)
    # the bump sits on the far side of cp from the measured segment
    assert (a >= cp) if sign > 0 else (a + 0.2 <= cp)
    assert analysis.h2_rate(spec, a, cp) == pytest.approx(1 / 3, abs=1e-12)


@pytest.mark.parametrize("act", ["A1", "A2", "A3"])
def test_h2_rate_b2_above_one_third(act):
    spec = shapes.solve_normalization(act, "B2", 0.3, 0.2, 1.0, 1.0)
    a = shapes.solve_activation_offset(spec, 0.0)
    # cp = 0: the segment includes the left half of the bump, so compare
    # against the same density with the bump removed from the oracle instead
    p = spec.params
    near = oracles.integrate_density(act, "B2", 0, 0, p.y, p.t, 1.0, a, lo=-0.25, hi=0.0)
    far = oracles.integrate_density(act, "B2", 0, 0, p.y, p.t, 1.0, a, lo=-0.75, hi=0.0)
    assert near / far > 1 / 3
    h2 = analysis.h2_rate(spec, a, 0.0)
    ref_near = oracles.integrate_density(act, "B2", p.k, p.m, p.y, p.t, 1.0, a, lo=-0.25, hi=0)
    ref_far = oracles.integrate_density(act, "B2", p.k, p.m, p.y, p.t, 1.0, a, lo=-0.75, hi=0)
    assert h2 == pytest.approx(ref_near / ref_far, abs=1e-12)


def test_h2_rate_truncates_at_edge():
    spec = shapes.solve_normalization("A1", "B1", 0.3, 0.2, 1.0, 1.0)
    a = shapes.solve_activation_offset(spec, 0.0)
    r = analysis.h2_rate(spec, a, 0.0, n1=0.5, n2=1.5)
    p = spec.params
    near = oracles.integrate_density("A1", "B1", p.k, p.m, p.y, p.t, 1.0, a, lo=-0.5, hi=0.0)
    far = oracles.integrate_density("A1", "B1", p.k, p.m, p.y, p.t, 1.0, a, lo=-1.0, hi=0.0)
    assert r == pytest.approx(near / far, abs=1e-12)


def test_certify_examples():
    spec = shapes.solve_normalization("A1", "B1", 0.4, 0.5, 1.0, 1.0)
    assert analysis.certify_dp(spec) == pytest.approx(2.0)
    for pair in ("A1B2", "A2B2", "A3B2"):
        s = shapes.solve_normalization(pair[:2], pair[2:], 0.3, 0.6, 1.0, 0.8)
        assert analysis.certify_dp(s) == pytest.approx(math.exp(0.8), rel=1e-12)


def test_certify_rejects_violation_with_witness():
    spec = shapes.PerturbationSpec("A1", "B1", ShapeParams(0.9, 1.0, 0.05), 1.0)
    with pytest.raises(CertificationFailed) as err:
        analysis.certify_dp(spec)
    assert err.value.ratio == pytest.approx(19.0)
    assert err.value.witness is not None


def test_grid_ratio_for_custom_matches_analytic():
    tri = shapes.CustomActivation(lambda s: 1 - abs(2 * s - 1), "tri", kinks=(0.5,))
    spec = shapes.solve_normalization(tri, "B1", 0.3, 0.6, 1.0, 1.0)
    ratio, witness = analysis.dp_ratio(spec)
    p = spec.params
    assert ratio == pytest.approx((p.y + p.k) / p.y, rel=1e-9)
    assert witness is not None


def test_probe_identical_inputs():
    spec = shapes.solve_normalization("A1", "B1", 0.4, 0.5, 1.0, 1.0)
    est = analysis.empirical_epsilon_probe(spec, 0.05, 0.05, n_samples=200_000, seed=1)
    assert est.estimate <= est.band


def test_probe_tight_b1():
    eps = 1.0
    k = 0.4
    # (y + k) / y = e^eps exactly with y = (1 - k m) / 2
    y = k / (math.e - 1)
    m = (1 - 2 * y) / k
    spec = shapes.solve_normalization("A1", "B1", k, m, 1.0, eps * (1 + 1e-12))
    lo, hi = shapes.cp_bounds(spec)
    est = analysis.empirical_epsilon_probe(spec, lo, hi, bins=64, n_samples=10 ** 7,
                                           seed=2, batches=4, workers=2)
    assert 0.8 * eps <= est.estimate <= eps + est.band


def test_probe_slack_spec_below_epsilon():
    spec = shapes.solve_normalization("A1", "B1", 0.2, 0.5, 1.0, 1.0)
    ratio = analysis.certify_dp(spec)
    lo, hi = shapes.cp_bounds(spec)
    est = analysis.empirical_epsilon_probe(spec, lo, hi, n_samples=10 ** 6, seed=3)
    assert math.log(ratio) < 1.0
    assert est.estimate < 1.0


def test_probe_independent_of_workers():
    spec = shapes.solve_normalization("A2", "B2", 0.3, 0.6, 1.0, 1.0)
    lo, hi = shapes.cp_bounds(spec)
    a = analysis.empirical_epsilon_probe(spec, lo, hi, n_samples=100_000, batches=4, workers=1)
    b = analysis.empirical_epsilon_probe(spec, lo, hi, n_samples=100_000, batches=4, workers=4)
    assert a == b


def test_probe_rejects_far_inputs():
    spec = shapes.solve_normalization("A1", "B1", 0.4, 0.5, 1.0, 1.0)
    with pytest.raises(ValueError):
        analysis.empirical_epsilon_probe(spec, -0.15, 0.2)


def test_utility_report():
    spec = shapes.solve_normalization("A1", "B1", 0.4, 0.5, 1.0, 1.0)
    rep = analysis.utility_report(spec)
    assert rep.dp_ratio == pytest.approx(2.0)
    assert rep.h1_rate == pytest.approx(4.0)
    assert abs(rep.bias_abs) < 1e-10
    assert rep.variance_real == pytest.approx(rep.variance_canonical / 0.3 ** 2)


def test_empirical_epsilon_histogram():
    rng = np.random.default_rng(0)
    x1, x2 = rng.random(100_000), rng.random(100_000)
    est = analysis.empirical_epsilon(x1, x2, 0.0, 1.0, bins=16)
    assert est.estimate < est.band and est.bins == 16
