import numpy as np
import pytest

from mmot.fixtures import counterexample
from mmot.measures import make_instance


@pytest.fixture(scope="session")
def example1():
    return counterexample()


def random_instance(rng, N, m, d, scale=3.0):
    return make_instance(scale * rng.standard_normal((N, m, d)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
