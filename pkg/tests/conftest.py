from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from umthresh import load_pgm

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def lena():
    return load_pgm(DATA / "lena256.pgm")


def pytest_terminal_summary(terminalreporter):
    from .test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
