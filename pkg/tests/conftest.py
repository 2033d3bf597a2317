import sys
import numpy as np
import pytest

from mtmlab import product_laplace, product_normal


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def normal1():
    return product_normal(1)


@pytest.fixture
def laplace1():
    return product_laplace(1)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
