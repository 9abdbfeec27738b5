import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from realent.bifurcation import BifurcationConfig, detect_cycles
from realent.bones import orbit_residuals, trace_bones
from realent.entropy import EntropyConfig, entropy
from realent.kneading import compare_itineraries, tent_itineraries
from realent.qmap import (
    LOG2,
    ModuliPoint,
    NormalFormMap,
    ParameterPoint,
    f_deriv,
    f_eval,
    moduli_fiber,
    moduli_project,
    per1_plus1,
)
from realent.regions import Region, classify, inside_parabola

mag = st.floats(0.05, 20.0)
xs = st.floats(-50.0, 50.0)


@st.composite
def params(draw):
    sign = draw(st.sampled_from([1.0, -1.0]))
    mu = sign * draw(mag)
    t = sign * draw(st.floats(0.0, 20.0))
    return ParameterPoint(mu, t)


@given(params(), xs)
def test_real_line_maps_into_unit_interval(p, x):
    y = f_eval(p.mu, p.t, x)
    assert math.isfinite(y)
    assert abs(y) <= 1.0 + 1e-12


@given(params())
def test_critical_values_are_plus_minus_one(p):
    c = NormalFormMap.from_params(p.mu, p.t).critical_points()
    assert abs(f_eval(p.mu, p.t, c.c_minus) + 1.0) < 1e-12
    if math.isfinite(c.c_plus):
        assert abs(f_eval(p.mu, p.t, c.c_plus) - 1.0) < 1e-12


def _sigma_tol(want, q):
    # sigma depends on (mu, t) through 1/mu terms, so rounding is amplified by ~1/mu^2
    return 1e-9 * (1.0 + abs(want)) + 1e-14 / (q.mu * q.mu)


@given(params())
def test_fiber_contains_the_point(p):
    m = moduli_project(p)
    fiber = moduli_fiber(m)
    # near the triple roots at (1, 0) and (-2, 0) the cubic only pins mu to ~eps^(1/3);
    # t comes back through sqrt(t^2), so compare t^2
    near_triple = min(math.hypot(p.mu - 1.0, p.t), math.hypot(p.mu + 2.0, p.t)) < 1e-2
    tol = 1e-4 if near_triple else 1e-6
    assert any(abs(q.mu - p.mu) <= tol * (1 + abs(p.mu)) and abs(q.t**2 - p.t**2) <= tol * (1 + p.t**2) for q in fiber)
    for q in fiber:
        m2 = moduli_project(q)
        assert abs(m2.sigma1 - m.sigma1) <= _sigma_tol(m.sigma1, q)
        assert abs(m2.sigma2 - m.sigma2) <= _sigma_tol(m.sigma2, q)


@given(params(), st.floats(-5.0, 5.0))
def test_schwarzian_is_negative(p, x):
    f = NormalFormMap.from_params(p.mu, p.t)
    assume(abs(f_deriv(p.mu, p.t, x)) > 1e-6)
    assert f.schwarzian(x) < 0.0


@given(params(), st.floats(-5.0, 5.0))
def test_derivative_matches_finite_difference(p, x):
    h = 1e-6
    fd = (f_eval(p.mu, p.t, x + h) - f_eval(p.mu, p.t, x - h)) / (2 * h)
    d = f_deriv(p.mu, p.t, x)
    assert abs(fd - d) <= 1e-4 * (1.0 + abs(d))


@given(st.floats(1.0, 2.0), st.floats(1.0, 2.0))
def test_tent_kneading_is_monotone_in_slope(a, b):
    assume(a != b)
    lo, hi = min(a, b), max(a, b)
    r = compare_itineraries(tent_itineraries(np.array([lo]), 256), tent_itineraries(np.array([hi]), 256))[0]
    assert r in (-1, 0, 2)


@settings(max_examples=15, deadline=None)
@given(st.floats(0.3, 7.5), st.floats(0.0, 1.95))
def test_converged_entropy_in_range(mu, t):
    e = entropy(ParameterPoint(mu, t), EntropyConfig(n_max=256, max_points=1 << 14))
    if e.converged:
        assert -1e-12 <= e.value <= LOG2 + e.error_bound + 1e-12


@given(st.floats(-10.0, 10.0), st.floats(-10.0, 10.0))
def test_fiber_points_project_back(s1, s2):
    m = ModuliPoint(s1, s2)
    for q in moduli_fiber(m):
        back = moduli_project(q)
        assert abs(back.sigma1 - s1) <= _sigma_tol(s1, q)
        assert abs(back.sigma2 - s2) <= _sigma_tol(s2, q)


@given(params())
def test_origin_is_fixed_with_multiplier_mu(p):
    assert f_eval(p.mu, p.t, 0.0) == 0.0
    assert abs(f_deriv(p.mu, p.t, 0.0) - p.mu) <= 1e-12 * abs(p.mu)


@given(params())
def test_fixed_point_formula_and_symmetric_functions(p):
    fp = NormalFormMap.from_params(p.mu, p.t).fixed_points()
    assume(not fp.degenerate)
    assume(all(abs(1.0 - m) > 1e-3 for m in fp.multipliers))
    assert fp.formula_residual() <= 1e-9 * max(1.0, max(abs(1.0 / (1.0 - m)) for m in fp.multipliers))
    s1, s2, s3 = fp.symmetric_functions()
    m = moduli_project(p)
    for got, want in ((s1, m.sigma1), (s2, m.sigma2), (s3, m.sigma1 - 2.0)):
        assert abs(got - want) <= 1e-9 * (1.0 + abs(want))


@given(st.floats(-0.95, 0.95).filter(lambda tt: abs(tt) > 1e-3) | st.floats(2.05, 6.0) | st.floats(-6.0, -2.05))
def test_parabola_maps_to_per1_line(t):
    mu = 1.0 - t * t / 4.0
    assume(mu * t >= 0.0 and abs(mu) > 1e-6)
    m = moduli_project(ParameterPoint(mu, t))
    assert abs(per1_plus1(m)) <= 1e-9 * (1.0 + abs(m.sigma2))
    assert abs(m.sigma1 - (mu + 2.0)) <= 1e-9 * (1.0 + abs(mu))


@given(params())
def test_fiber_member_multiplier_at_zero_is_mu(p):
    for q in moduli_fiber(moduli_project(p)):
        assert abs(f_deriv(q.mu, q.t, 0.0) - q.mu) <= 1e-12 * abs(q.mu)


@given(params())
def test_every_point_gets_one_label(p):
    label = classify(p, tol=0.0)
    c = NormalFormMap.from_params(p.mu, p.t).critical_points()
    if label.kind is Region.BOUNDARY:
        # only a critical point exactly at an endpoint is ambiguous
        assert 1.0 in (abs(c.c_plus), abs(c.c_minus))
        return
    inside = sum(1 for x in (c.c_plus, c.c_minus) if math.isfinite(x) and abs(x) < 1.0)
    want = {0: (Region.MONOTONE_INCREASING, Region.MONOTONE_DECREASING), 1: (Region.UNIMODAL,)}
    assert label.kind in want.get(inside, (Region.BIMODAL_PMP, Region.BIMODAL_MPM))


@given(params())
def test_parabola_test_matches_fixed_point_count(p):
    assume(abs(p.mu - (1.0 - p.t * p.t / 4.0)) > 1e-6)
    fp = NormalFormMap.from_params(p.mu, p.t).fixed_points()
    assert inside_parabola(p) == (len(fp.real_fixed_points) == 1)


@settings(max_examples=30, deadline=None)
@given(st.floats(-50.0, -0.1), st.floats(-20.0, 0.0))
def test_detected_cycles_are_attracting_and_minimal(mu, t):
    cfg = BifurcationConfig(burn_in=2000, window=400, max_period=32)
    for start in (1.0, -1.0):
        per, lam, _ = detect_cycles(np.array([mu]), np.array([t]), start, cfg)
        q = int(per[0])
        if q == 0:
            continue
        assert lam[0] < 1.0 + 1e-3
        # no proper divisor also repeats the tail of the orbit
        x = np.array([start])
        for _ in range(cfg.burn_in + cfg.window - 2 * q):
            x = f_eval(mu, t, x)
        orbit = [float(x[0])]
        for _ in range(2 * q):
            orbit.append(float(f_eval(mu, t, orbit[-1])))
        for d in range(1, q):
            if q % d == 0:
                assert max(abs(orbit[k + d] - orbit[k]) for k in range(q)) > cfg.tol


@pytest.mark.parametrize("n", [2, 3])
def test_bone_residual_divisibility(n):
    # on a period-n bone every multiple m*n also returns to the critical point
    curve = trace_bones(n, grid=(200, 200))
    for poly in curve.polylines:
        inner = poly[1:-1]
        r = orbit_residuals(inner[:, 0], inner[:, 1], 2 * n)
        tol = np.abs(r[n - 1]).max()
        assert np.abs(r[2 * n - 1]).max() <= 10 * max(tol, 1e-12)
