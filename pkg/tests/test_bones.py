import numpy as np
import pytest

from conftest import BASILICA
from realent.bones import (
    CRIT_LINE,
    POLY_LINE,
    critical_orbit_residual,
    divisors,
    moebius,
    orbit_residuals,
    primitive_residual,
    trace_bones,
    trace_bones_many,
)
from realent.exceptions import ConfigurationError, DomainError
from realent.qmap import ParameterPoint


@pytest.mark.parametrize("n,mu", [(1, 1), (2, -1), (3, -1), (4, 0), (6, 1), (12, 0), (30, -1)])
def test_moebius(n, mu):
    assert moebius(n) == mu


def test_divisors():
    assert divisors(12) == [1, 2, 3, 4, 6, 12]


def test_basilica_is_a_period_two_centre():
    assert abs(critical_orbit_residual(BASILICA, 2)) < 1e-12
    assert abs(critical_orbit_residual(BASILICA, 1)) > 0.1


def test_residual_needs_a_turning_point():
    with pytest.raises(DomainError):
        critical_orbit_residual(ParameterPoint(0.5, 0.5), 2)


def test_primitive_residual_removes_lower_periods():
    # at the basilica g_2 vanishes but g_4 / g_2 does not
    r = orbit_residuals(np.array([BASILICA.mu]), np.array([BASILICA.t]), 4)
    assert abs(primitive_residual(r, 2)[0]) < 1e-12
    assert abs(primitive_residual(r, 4)[0]) > 1e-6


def test_period_two_bone_passes_through_basilica():
    curve = trace_bones(2, grid=(200, 200))
    assert len(curve) == 1
    poly = curve.polylines[0]
    dist = np.hypot(poly[:, 0] - BASILICA.mu, poly[:, 1] - BASILICA.t).min()
    assert dist < curve.cell
    assert POLY_LINE in curve.endpoints_on[0]


def test_refined_vertices_are_on_the_bone():
    curve = trace_bones(3, grid=(200, 200))
    assert curve.endpoints_on == [(POLY_LINE, CRIT_LINE)]
    poly = curve.polylines[0]
    r = orbit_residuals(poly[:, 0], poly[:, 1], 3)
    # the two ends are linear edge crossings, the interior is Newton-refined
    assert np.abs(primitive_residual(r, 3))[1:-1].max() < 1e-9


def test_bones_stay_in_the_family_domain():
    for curve in trace_bones_many([2, 3, 4], grid=(150, 150)):
        for poly in curve.polylines:
            mu, t = poly[:, 0], poly[:, 1]
            assert np.all(mu - t <= 2 + 1e-9)
            assert np.all(mu - t >= -2 - 1e-9)
            assert np.all(mu + t <= -2 + 1e-9)


def test_many_is_ordered_and_thread_independent():
    a = trace_bones_many([4, 2, 3], grid=(120, 120))
    b = trace_bones_many([4, 2, 3], threads=3, grid=(120, 120))
    assert [c.period for c in a] == [4, 2, 3]
    for x, y in zip(a, b):
        assert x.endpoints_on == y.endpoints_on
        assert all(np.array_equal(p, q) for p, q in zip(x.polylines, y.polylines))


def test_invalid_arguments():
    with pytest.raises(ConfigurationError):
        trace_bones(0)
    with pytest.raises(ConfigurationError):
        trace_bones(2, family="U9")
    with pytest.raises(ConfigurationError):
        trace_bones(2, window=(0.0, -1.0, -2.0, -1.0))
