import pytest

from passivesim.building import typical_house
from passivesim.weather import SiteInfo, synth_weather

DESIGN_WEEK = dict(days=7, t_min=5.6, t_max=20.6, clearness=0.7, rh=80.0, wind=2.0)


@pytest.fixture(scope="session")
def site():
    return SiteInfo()


@pytest.fixture(scope="session")
def house():
    return typical_house()


@pytest.fixture(scope="session")
def design_week(site):
    return synth_weather(site, **DESIGN_WEEK)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import VERDICTS
    except ImportError:
        return
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in VERDICTS:
            terminalreporter.write_line(line)
