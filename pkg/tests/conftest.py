import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from vbgeo import base_geometry as bg
from vbgeo import weights as wt
from vbgeo.scenario import preset
from vbgeo.total_space import TotalSpace

settings.register_profile(
    "vbgeo", max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow], derandomize=True
)
settings.load_profile("vbgeo")

# lines appended by tests/test_acceptance.py, echoed at the end of the run
ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture(scope="session")
def bs_s4():
    return preset("bs_s4").space


@pytest.fixture(scope="session")
def bs_h4():
    return preset("bs_h4_plus").space


@pytest.fixture(scope="session")
def generic_space():
    """Non-flat bundle with generic polynomial weights."""
    chart = bg.model_chart("sphere", 4, 1.0)
    w = wt.from_expressions("0.2*r - 0.1*r**2", "-0.15*r + 0.05*r**2")
    return TotalSpace(chart, bg.lambda2_bundle(chart, "minus"), w)
