import numpy as np
import pytest
from scipy.stats import unitary_group


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def haar(dim, rng):
    return unitary_group.rvs(dim, random_state=rng)


_CRITERIA = {}


def pytest_runtest_logreport(report):
    for key, value in report.user_properties:
        if key == "criterion" and report.when == "call":
            _CRITERIA[value] = "PASS" if report.passed else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        terminalreporter.write_line(f"criterion {num:2d}: {_CRITERIA[num]}")
