import itertools

import pytest

from permdecode.codes import CodeFamily, enumerate_code


def all_perms(n):
    return list(itertools.permutations(range(1, n + 1)))


@pytest.fixture(scope="session")
def c6e():
    return enumerate_code(CodeFamily("tenengolts_even", 6))


@pytest.fixture(scope="session")
def il9():
    return enumerate_code(CodeFamily("interleaved", 9))


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
