import numpy as np
import pytest

from fibrate.grid import build_grid
from fibrate.problems import build_problem

_CRITERIA = {}


@pytest.fixture
def criterion():
    """Record one pass/fail line per acceptance criterion."""

    def report(number, passed, message):
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'} ({message})"
        _CRITERIA[number] = line
        print(line)
        return passed

    return report


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for k in sorted(_CRITERIA):
            terminalreporter.write_line(_CRITERIA[k])


PROBLEMS = {
    "concave_convex": ({"kind": "concave_convex", "p": 2, "q": 1.5, "r": 3}, ("interval", 1.0, 256)),
    "kirchhoff": ({"kind": "kirchhoff", "a": 1, "r": 3}, ("interval", 1.0, 256)),
    "semilinear": ({"kind": "semilinear", "q": 3, "r": 4}, ("interval", 1.0, 256)),
    "pq_laplacian": ({"kind": "pq_laplacian", "p": 3, "q": 2, "r": 4}, ("interval", 1.0, 256)),
    "schrodinger_poisson": ({"kind": "schrodinger_poisson", "omega": 1, "a": 1, "p": 2.5}, ("radial", 15.0, 1000)),
}


def make_problem(name, **override):
    params, grid = PROBLEMS[name]
    return build_problem({**params, **override}, build_grid(*grid))


@pytest.fixture(scope="session")
def interval64():
    return build_grid("interval", 1.0, 64)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
