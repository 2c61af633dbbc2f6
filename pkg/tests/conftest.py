from collections import OrderedDict

import pytest
from gmpy2 import mpq

from polybound.polytope import HRep
from polybound.ratpoly import Polynomial

_CRITERIA = OrderedDict()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, text): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or (rep.when != "call" and rep.passed):
        return
    number, text = mark.args
    ok = rep.passed and not rep.skipped
    prev = _CRITERIA.get(number, (True, text))[0]
    _CRITERIA[number] = (prev and ok, text)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number in sorted(_CRITERIA):
        ok, text = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {text}")


@pytest.fixture(scope="session")
def triangle():
    return HRep([[-1, 0], [0, -1], [1, 1]], [-1, -1, 3])


@pytest.fixture(scope="session")
def quartic():
    x, y = Polynomial.variable(2, 0), Polynomial.variable(2, 1)
    return -5 * (x * x - 2) ** 2 - 7 * (y * y - 2) ** 2 + 20


@pytest.fixture(scope="session")
def quarter_interval():
    return HRep([[1], [-1]], [mpq(1, 4), mpq(1, 4)])


@pytest.fixture(scope="session")
def parabola():
    return Polynomial(1, {(2,): -10, (0,): 2})


@pytest.fixture(scope="session")
def sym_interval():
    """[-1, 1] with g1 = x + 1 and g2 = 1 - x."""
    return HRep([[-1], [1]], [1, 1])
