import pytest

from rabi_het.asymptotics import (STRONG_EPS_LADDER, STRONG_LADDER, WEAK_EPS_LADDER, WEAK_LADDER,
                                  strong_ladder, weak_ladder)
from rabi_het.bvp import SolveOptions, solve_params
from rabi_het.params import make_params

C0 = 0.25
LADDER_OPTS = SolveOptions(n=2049)

# acceptance lines collected by tests/test_acceptance.py
ACCEPTANCE = []


@pytest.fixture(scope="session")
def strong_profiles():
    return strong_ladder(C0, STRONG_LADDER, LADDER_OPTS)


@pytest.fixture(scope="session")
def weak_profiles():
    return weak_ladder(C0, WEAK_LADDER, LADDER_OPTS)


@pytest.fixture(scope="session")
def strong_eps_profiles():
    return strong_ladder(C0, [1.0 + 1.0 / e ** 2 for e in STRONG_EPS_LADDER], LADDER_OPTS)


@pytest.fixture(scope="session")
def weak_eps_profiles():
    return weak_ladder(C0, [1.0 + e ** 2 for e in WEAK_EPS_LADDER], LADDER_OPTS)


@pytest.fixture(scope="session")
def profile_101():
    return solve_params(make_params(101.0, C0), SolveOptions(n=1025))


@pytest.fixture(scope="session")
def profile_100():
    return solve_params(make_params(100.0, C0), SolveOptions(n=2049))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for cid, ok, detail in sorted(ACCEPTANCE, key=lambda t: int(t[0][1:])):
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {cid}: {detail}")
