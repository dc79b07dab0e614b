import itertools

import pytest

from shiftsets.natset import NatSet, set_global_horizon


def shifted(A, t):
    return {a + t for a in A}


def brute_intersection(A, T):
    """Common elements of A + t over t in T, by plain set arithmetic."""
    common = shifted(A, T[0])
    for t in T[1:]:
        common &= shifted(A, t)
    return common


def brute_distances(A):
    return {y - x for x, y in itertools.combinations(sorted(A), 2)}


@pytest.fixture(autouse=True)
def _reset_horizon():
    yield
    set_global_horizon(None)


@pytest.fixture
def example_A():
    return NatSet.of([1, 2, 3, 5, 8])


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    setattr(item, "rep_" + rep.when, rep)
