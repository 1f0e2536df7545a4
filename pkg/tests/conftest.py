import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from paraproducts import Box

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def unit1():
    return Box.unit(1)


@pytest.fixture
def unit2():
    return Box.unit(2)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion")[1].split()[0])):
            terminalreporter.write_line(line)
