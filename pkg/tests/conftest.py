import numpy as np
import pytest

from menger.enumeration import abstractify, close, enumerate_closed
from menger.nfun import NPlaceFunction

EMPTY, ID, SWAP = 0, 1, 2  # canonical member order of the swap closure


@pytest.fixture(scope="session")
def swap():
    return NPlaceFunction.from_mapping(1, 2, {0: 1, 1: 0})


@pytest.fixture(scope="session")
def micro(swap):
    """The closure of the unary swap on two points: empty map, identity, swap."""
    phi = close([swap])
    alg, members = abstractify(phi)
    return phi, alg


@pytest.fixture(scope="session")
def corpus_m2n1():
    return [(phi, abstractify(phi)[0]) for phi in enumerate_closed(2, 1)]


@pytest.fixture(scope="session")
def corpus_m2n2_small():
    """Every tenth binary algebra over two points, for the slower cross-checks."""
    algs = enumerate_closed(2, 2)
    return [(phi, abstractify(phi)[0]) for phi in algs[::10]]


def random_table(rng, m, n):
    return rng.integers(-1, m, size=m**n)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
