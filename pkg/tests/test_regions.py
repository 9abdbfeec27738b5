import math

import numpy as np
import pytest

from realent.exceptions import DomainError
from realent.qmap import LOG2, NormalFormMap, ParameterPoint
from realent.regions import (
    REGION_CODES,
    FamilyDomain,
    Region,
    classify,
    classify_codes,
    family_domain,
    family_masks,
    inside_parabola,
    open_region,
    trivial_entropy,
    unimodal_domain,
    unimodal_restriction,
)


@pytest.mark.parametrize(
    "mu,t,want",
    [
        (1, 2.5, Region.UNIMODAL),
        (3, 0.5, Region.BIMODAL_MPM),
        (-10, -5, Region.BIMODAL_PMP),
        (0.5, 0.5, Region.MONOTONE_INCREASING),
        (-0.5, -0.5, Region.MONOTONE_DECREASING),
    ],
)
def test_classify_examples(mu, t, want):
    assert classify(ParameterPoint(mu, t)).kind is want


def test_mpm_also_occurs_in_third_quadrant():
    # mu - t > 2 with both turning points inside: the minimum sits left of the maximum
    assert classify(ParameterPoint(-1.0, -3.5)).kind is Region.BIMODAL_MPM


def test_boundary_carries_both_neighbours():
    lab = classify(ParameterPoint(1.0, 1.0))  # c_minus = -1 exactly
    assert lab.kind is Region.BOUNDARY
    assert lab.adjacent == (Region.MONOTONE_INCREASING, Region.UNIMODAL)
    assert open_region(lab) is Region.MONOTONE_INCREASING


def test_boundary_tolerance():
    p = ParameterPoint(1.0, 1.0 + 1e-11)
    assert classify(p).kind is Region.BOUNDARY
    assert classify(p, tol=0.0).kind is Region.UNIMODAL


@pytest.mark.parametrize("mu,t,want", [(-3, 0, True), (3, 0, False), (1, 0, False)])
def test_inside_parabola(mu, t, want):
    assert inside_parabola(ParameterPoint(mu, t)) is want


@pytest.mark.parametrize(
    "mu,t,want",
    [
        (1, 1.5, FamilyDomain.U1),
        (-2, -4, FamilyDomain.U2),
        (-10, -5, FamilyDomain.U3),
        (0.5, 0.5, FamilyDomain.NONE),
        (1, 3, FamilyDomain.NONE),
    ],
)
def test_family_domain(mu, t, want):
    assert family_domain(ParameterPoint(mu, t)) is want


def test_u2_closed_on_polynomial_line():
    assert family_domain(ParameterPoint(-1.5, -3.5)) is FamilyDomain.U2


@pytest.mark.parametrize("mu,t,want", [(1, 3, LOG2), (0.5, 0.5, 0.0), (-20, -10, LOG2), (1, 1.5, None), (-10, -5, None)])
def test_trivial_entropy(mu, t, want):
    assert trivial_entropy(ParameterPoint(mu, t)) == want


@pytest.mark.parametrize("mu,t,c", [(1, 1.5, -0.8), (1.9, 0.2, -2 / 2.1), (0.5, 1.6, -2 / 2.1)])
def test_unimodal_restriction_examples(mu, t, c):
    r = unimodal_restriction(ParameterPoint(mu, t))
    assert (r.lo, r.hi) == (-1.0, 0.0)
    assert r.turning_point == pytest.approx(c)


def test_unimodal_restriction_outside_u1():
    with pytest.raises(DomainError):
        unimodal_restriction(ParameterPoint(-2, -4))


def test_positive_fixed_point_multiplier_formula():
    p = ParameterPoint(3.0, 1.5)
    r = unimodal_restriction(p)
    assert -1 < r.positive_fixed_multiplier < 1
    assert r.positive_fixed_multiplier == pytest.approx(NormalFormMap(p).derivative(r.positive_fixed_point), abs=1e-9)
    assert unimodal_restriction(ParameterPoint(0.8, 1.5)).positive_fixed_point is None


def test_unimodal_domain():
    assert unimodal_domain(ParameterPoint(1, 1.5)).hi == 0.0
    d = unimodal_domain(ParameterPoint(-2, -4))
    assert (d.lo, d.hi, d.family) == (-1.0, 1.0, FamilyDomain.U2)
    assert unimodal_domain(ParameterPoint(-10, -5)) is None


def test_vectorised_classification_matches_scalar():
    rng = np.random.default_rng(0)
    mu = np.concatenate([rng.uniform(0.01, 8, 300), rng.uniform(-30, -0.01, 300), [1.0, -1.0, 2.0]])
    t = np.concatenate([rng.uniform(0, 4, 300), rng.uniform(-20, 0, 300), [1.0, -3.0, 0.0]])
    codes = classify_codes(mu, t)
    for m, tt, c in zip(mu, t, codes):
        assert REGION_CODES[c] is classify(ParameterPoint(m, tt)).kind
    masks = family_masks(mu, t)
    for i, (m, tt) in enumerate(zip(mu, t)):
        fam = family_domain(ParameterPoint(m, tt))
        for key, mask in masks.items():
            assert mask[i] == (fam is key)


def test_u1_interval_is_invariant():
    rng = np.random.default_rng(3)
    for _ in range(100):
        mu = rng.uniform(0.05, 8)
        t = rng.uniform(max(2 - mu, 0) + 1e-6, 2 - 1e-6)
        p = ParameterPoint(mu, t)
        f = NormalFormMap(p)
        c = unimodal_restriction(p).turning_point
        for x in (-1.0, 0.0, c):
            assert -1.0 - 1e-12 <= f(x) <= 1e-12
        assert not math.isnan(c)
