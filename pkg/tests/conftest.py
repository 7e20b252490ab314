import numpy as np
import pytest

from helegraph.interface import make_interface

TWO_PI = 2 * np.pi


def grid(n, period=TWO_PI):
    return np.arange(n) * period / n


@pytest.fixture(scope="session")
def flat():
    def build(c=1.0, n=64, L=2.0, period=TWO_PI):
        return make_interface(np.full(n, c), period, L)

    return build


@pytest.fixture(scope="session")
def cosine():
    def build(base=1.0, amp=0.2, n=64, L=2.0, phase=0.0, mode=1):
        x = grid(n)
        return make_interface(base + amp * np.cos(mode * x + phase), TWO_PI, L)

    return build


def pytest_collection_modifyitems(session, config, items):
    # acceptance runs last so its maximum-principle criterion sees every solve of the session
    items.sort(key=lambda it: it.path.name == "test_acceptance.py")


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(autouse=True)
def _maximum_principle_guard():
    from helegraph.elliptic import MAX_PRINCIPLE_RECORD

    before = MAX_PRINCIPLE_RECORD["worst"]
    yield
    worst = MAX_PRINCIPLE_RECORD["worst"]
    assert worst <= max(before, 1e-12), f"discrete maximum principle violated by {worst:.3e}"
