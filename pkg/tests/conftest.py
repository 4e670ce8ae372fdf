import numpy as np
import pytest

from vdb_channel import IndependentChannel, InputDistribution, WordDependentChannel


def random_input(rng, width, sparse=False):
    pmf = rng.random(1 << width)
    if sparse:
        pmf[rng.random(pmf.size) < 0.5] = 0.0
        pmf[rng.integers(pmf.size)] += 0.1
    return InputDistribution(pmf / pmf.sum())


def random_channel(rng, width, word_dependent=False):
    if word_dependent:
        shape = (1 << width, width)
        return WordDependentChannel(rng.random(shape), rng.random(shape))
    return IndependentChannel(rng.random(width), rng.random(width))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
