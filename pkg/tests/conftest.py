import pytest

from diracshoot import Params, Tolerances, ground_state


@pytest.fixture(scope="session")
def p():
    return Params(1.0, 0.5)


@pytest.fixture(scope="session")
def tol():
    return Tolerances()


@pytest.fixture(scope="session")
def gs(p, tol):
    # shared across shooting and acceptance tests; ~0.2 s to compute
    return ground_state(p, tol)
