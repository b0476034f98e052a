from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow, HealthCheck.large_base_example]
)
settings.load_profile("default")

# five forms in three variables with an eleven-cell chamber complex
PENTAGON_L = ((1, 1, 1, 1, 1), (0, 1, 2, 1, 0), (0, 0, 1, 2, 1))
# four binary forms 3x1, 2x1+x2, x1+2x2, 3x2
BINARY_L = ((3, 2, 1, 0), (0, 1, 2, 3))


@pytest.fixture
def pentagon_L():
    return [list(r) for r in PENTAGON_L]


@pytest.fixture
def binary_L():
    return [list(r) for r in BINARY_L]


def F(*vals):
    return tuple(Fraction(v) for v in vals)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.report_line(n))
