import os

import pytest
from hypothesis import HealthCheck, settings

from qpgstreak.config import ScenarioConfig

settings.register_profile(
    "default", deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# acceptance lines collected by tests/test_acceptance.py
ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def matched_cfg():
    return ScenarioConfig.load("paper_type2")


@pytest.fixture(scope="session")
def matched_process(matched_cfg):
    return matched_cfg.process()


@pytest.fixture(scope="session")
def matched_spectra(matched_cfg):
    return matched_cfg.spectra()


@pytest.fixture(scope="session")
def angled_cfg():
    return ScenarioConfig.load("type0_17deg")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES
