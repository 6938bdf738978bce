import numpy as np
import pytest

from suslov_hk import Inertia3

FIG1 = Inertia3(4.0, 1.0, -0.5, -0.3)
FIG1_EPS = 0.2

_criteria = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def report():
    """Record one acceptance criterion; printed in the terminal summary."""

    def _report(label, ok, detail=""):
        _criteria.append((label, bool(ok), detail))
        return ok

    return _report


def random_inertia(rng):
    while True:
        I13, I23 = rng.uniform(-1, 1, size=2)
        if abs(I13) + abs(I23) > 1e-3:
            return Inertia3(*rng.uniform(0.1, 10, size=2), I13, I23)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok, detail in _criteria:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {label}  {detail}")
