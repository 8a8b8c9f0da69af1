import pytest

from seeleyext import PrecisionContext, fixed_point_coefficients, seeley_one_sided_coefficients
from seeleyext.operator import ExtensionPlan


@pytest.fixture(scope="session")
def family6():
    """Two-sided family validated on ``|k| <= 6`` at the default precision."""
    return fixed_point_coefficients(PrecisionContext(), 6)


@pytest.fixture(scope="session")
def plan6(family6):
    return ExtensionPlan(family6)


@pytest.fixture(scope="session")
def seeley3():
    return seeley_one_sided_coefficients(PrecisionContext(), 3)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("tests.test_acceptance")
    if mod is not None and mod.LINES:
        terminalreporter.section("acceptance criteria")
        for line in mod.LINES:
            terminalreporter.write_line(line)
