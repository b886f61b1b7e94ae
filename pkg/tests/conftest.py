from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings

from translab.operators import BackwardShift, Differentiation, WeightSequence, example21_shift, rolewicz

settings.register_profile(
    "translab", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("translab")

ACCEPTANCE: dict[int, tuple[str, str]] = {}


@pytest.fixture
def T2():
    return rolewicz(2)


@pytest.fixture
def Thalf():
    return rolewicz(Fraction(1, 2))


@pytest.fixture
def B():
    return BackwardShift(WeightSequence.constant(1))


@pytest.fixture
def Bw():
    return example21_shift()


@pytest.fixture
def D():
    return Differentiation()


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): one of the acceptance criteria")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    number, title = marker.args
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        ACCEPTANCE[number] = ("PASS" if rep.outcome == "passed" else "FAIL", title)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        status, title = ACCEPTANCE[number]
        terminalreporter.write_line(f"[{status}] {number:>2}. {title}")
