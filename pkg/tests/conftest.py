import numpy as np
import pytest

from potlab import BivariatePolynomial, HarmonicTuple


def tuple_from_constant_branches(gs):
    """Harmonic tuple whose branches are the constants ``gs`` (H_nu = 2 Re(g_nu z))."""
    P = BivariatePolynomial.from_roots([[g] for g in gs])
    return HarmonicTuple(P, base=0.0, base_labels=list(gs))


@pytest.fixture(scope="session")
def three_branch():
    """Branches 0, 2 + z, -1/2: H = (0, 4x + x^2 - y^2, -x)."""
    P = BivariatePolynomial.from_roots([[0.0], [2.0, 1.0], [-0.5]])
    return HarmonicTuple(P, base=0.0, base_labels=[0.0, 2.0, -0.5])


@pytest.fixture(scope="session")
def opposite_pair():
    """H1 = 2x, H2 = -2x."""
    return tuple_from_constant_branches([1.0, -1.0])


@pytest.fixture(scope="session")
def zero_and_2x():
    """H1 = 0, H2 = 2x."""
    return tuple_from_constant_branches([0.0, 1.0])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
