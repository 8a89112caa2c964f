import numpy as np
import pytest

from manev_isosceles.params import P0

ACCEPTANCE_TITLES = {}


@pytest.fixture
def p0():
    return P0


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_collection_modifyitems(items):
    for item in items:
        marker = item.get_closest_marker("acceptance")
        if marker:
            ACCEPTANCE_TITLES[item.nodeid] = marker.args[0]


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_TITLES:
        return
    outcomes = {}
    for key in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(key, []):
            if rep.nodeid in ACCEPTANCE_TITLES and (rep.when == "call" or key == "error"):
                outcomes[rep.nodeid] = "PASS" if key == "passed" else "FAIL"
    terminalreporter.section("acceptance criteria")
    for nodeid, title in ACCEPTANCE_TITLES.items():
        terminalreporter.write_line(f"{outcomes.get(nodeid, 'NOT RUN'):7s} {title}")
