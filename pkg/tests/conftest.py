import numpy as np
import pytest

from descred.model import DescriptorSystem

E1 = np.array([[2, -2, -2], [2, 2, -2], [0, 0, 0]], dtype=float)
A1 = np.array([[1, 1, 1], [1, -1, 1], [1, 1, -1]], dtype=float)
F1 = np.array([[1, 1, -1], [0, -2, 0], [1, -1, -1]], dtype=float)
B3 = np.array([[0.0], [0.0], [1.0]])


@pytest.fixture
def ex1():
    """Index-two system with A nonsingular, consistency space span{(0, 1, 1)}."""
    return DescriptorSystem(E1, A1)


@pytest.fixture
def ex3():
    """The same pencil driven through the last equation."""
    return DescriptorSystem(E1, A1, B3)


@pytest.fixture
def bases3():
    X = np.array([[0.0], [1.0], [1.0]])
    Y = np.array([[0.0], [1.0], [0.0]])
    V = np.array([[1.0, 0.0], [0.0, 0.0], [0.0, 1.0]])
    W = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
    return X, Y, V, W


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[number])
