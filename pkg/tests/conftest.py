import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from carlitz_coleman import PrimeSpec, Tower, make_field

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def _tower(p, pi="T", e=1):
    return Tower(PrimeSpec(make_field(p, e), pi))


@pytest.fixture(scope="session")
def t3():
    return _tower(3)


@pytest.fixture(scope="session")
def t2():
    return _tower(2)


@pytest.fixture(scope="session")
def t3sq():
    return _tower(3, "T^2+1")


@pytest.fixture(scope="session")
def t4():
    return _tower(2, "T", 2)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
