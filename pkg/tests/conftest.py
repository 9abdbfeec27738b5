import math

import pytest

from realent.qmap import ParameterPoint

SQRT5 = math.sqrt(5.0)
BASILICA = ParameterPoint(1.0 - SQRT5, -1.0 - SQRT5)
CHEBYSHEV = ParameterPoint(-2.0, -4.0)
AIRPLANE_C = -1.7548776662466927
_mu_air = 1.0 - math.sqrt(1.0 - 4.0 * AIRPLANE_C)
AIRPLANE = ParameterPoint(_mu_air, _mu_air - 2.0)
GOLDEN_LOG = math.log((1.0 + SQRT5) / 2.0)

# acceptance lines collected during the run, printed in the terminal summary
ACCEPTANCE: dict[int, str] = {}


@pytest.fixture
def criterion():
    def record(number: int, passed: bool, detail: str) -> bool:
        ACCEPTANCE[number] = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
        print(ACCEPTANCE[number])
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])
