from functools import lru_cache

import pytest

from qtoda.pipeline import Context


@lru_cache(maxsize=None)
def context(letter, rank):
    ctx = Context(letter, rank)
    return ctx


@pytest.fixture
def ctx_of():
    return context


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
