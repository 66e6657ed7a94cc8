import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def design():
    from carhhmm.simulate import design_params
    return design_params()


@pytest.fixture(scope="session")
def sim100(design):
    from carhhmm.simulate import SimConfig, simulate
    return simulate(SimConfig(100, design, seed=1))


def pytest_terminal_summary(terminalreporter):
    from acceptance_report import summary_lines
    lines = summary_lines()
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
