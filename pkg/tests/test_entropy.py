import math

import numpy as np
import pytest

from conftest import AIRPLANE, BASILICA, CHEBYSHEV
from realent.entropy import COVERING_FAMILY_ENTROPY, EntropyConfig, entropy, entropy_batch, entropy_fpnf
from realent.exceptions import ConfigurationError, DegenerateMapError, DomainError
from realent.qmap import LOG2, ModuliPoint, ParameterPoint, moduli_fiber, moduli_project
from realent.regions import FamilyDomain, family_domain, unimodal_domain
from realent.results import EntropyEstimate, Method, Status


def test_shortcut_examples():
    for p in (ParameterPoint(1, 3), ParameterPoint(-20, -10)):
        e = entropy(p)
        assert e.method is Method.SHORTCUT and e.value == LOG2 and e.error_bound == 0.0


def test_chebyshev_via_kneading_and_oracle():
    e = entropy(CHEBYSHEV, EntropyConfig(method="both"))
    assert e.method is Method.KNEADING_BISECTION
    assert e.value == pytest.approx(LOG2, abs=2e-3)
    assert e.discrepancy is not None and e.discrepancy <= 5e-3


def test_u3_goes_to_oracle():
    e = entropy(ParameterPoint(-10, -5))
    assert e.method is Method.PREIMAGE_ORACLE
    assert e.converged
    assert 0.55 < e.value < 0.66


def test_third_quadrant_mpm_uses_a_sibling():
    p = ParameterPoint(-1.0, -3.5)
    e = entropy(p)
    assert e.method is not Method.PREIMAGE_ORACLE
    sibs = moduli_fiber(moduli_project(p))
    assert any(abs(entropy(q).value - e.value) < 1e-9 for q in sibs if abs(q.mu - p.mu) > 1e-6)


def test_kneading_only_mode_fails_off_unimodal():
    e = entropy(ParameterPoint(-10, -5), EntropyConfig(method="kneading"))
    assert e.status is Status.FAILED and math.isnan(e.value)


def test_invalid_cells_fail_in_batch():
    b = entropy_batch([1.0, 0.0, 1.0], [3.0, 1.0, -1.0])
    assert b.status.tolist() == [0, 2, 2]


def test_config_validation():
    with pytest.raises(ConfigurationError):
        EntropyConfig(method="magic")
    with pytest.raises(ConfigurationError):
        EntropyConfig(n_max=2)
    with pytest.raises(ConfigurationError):
        EntropyConfig(y_panel=(0.0,))
    assert EntropyConfig().with_(tol=1e-3).tol == 1e-3


def test_seeded_panel_changes_only_the_probes():
    cfg = EntropyConfig(method="oracle", y_panel=(0.25, -0.4))
    e = entropy(AIRPLANE, cfg)
    assert e.value == pytest.approx(math.log((1 + math.sqrt(5)) / 2), abs=2e-3)


def test_fpnf_examples():
    assert entropy_fpnf(0.0, 4.0).value == pytest.approx(LOG2, abs=2e-3)
    assert entropy_fpnf(0.0, 1.0).value == pytest.approx(0.0, abs=2e-3)
    assert entropy_fpnf(0.0, 1.0 + math.sqrt(5)).value == pytest.approx(0.0, abs=2e-3)


def test_fpnf_errors():
    with pytest.raises(DomainError):
        entropy_fpnf(1.0, 0.0)
    with pytest.raises(DegenerateMapError):
        entropy_fpnf(0.5, 2.0)


@pytest.mark.parametrize("mu", np.linspace(1.0, 4.0, 20))
def test_fpnf_agrees_with_polynomial_line(mu):
    # z^2 + mu z has multipliers 0 (at infinity), mu and 2 - mu
    fib = [q for q in moduli_fiber(ModuliPoint(2.0, mu * (2.0 - mu))) if family_domain(q) is not FamilyDomain.NONE or unimodal_domain(q)]
    assert fib
    a = entropy_fpnf(0.0, mu)
    assert abs(a.value - entropy(fib[0]).value) <= 5e-3


def test_failed_estimate_record():
    f = EntropyEstimate.failed(Method.PREIMAGE_ORACLE)
    assert math.isnan(f.value) and f.status is Status.FAILED and not f.converged


def test_covering_family_constant():
    assert COVERING_FAMILY_ENTROPY == LOG2


def test_basilica_zero():
    assert entropy(BASILICA).value == pytest.approx(0.0, abs=1e-3)
