import numpy as np
import pytest

from minar.experiments import OKHOTSK_WEST_PACIFIC, SET_1, SET_2
from minar.innovations import BivPoissonParams
from minar.process import ThinningMatrix


@pytest.fixture
def set1():
    return SET_1["P"], SET_1["innov"]


@pytest.fixture
def set2():
    return SET_2["P"], SET_2["innov"]


@pytest.fixture
def owp24():
    v = OKHOTSK_WEST_PACIFIC[24]
    return v["P"], v["innov"]


@pytest.fixture
def rng():
    return np.random.default_rng(20240501)


def random_params(gen, pmax=0.45):
    P = ThinningMatrix(gen.uniform(0.0, pmax, size=(2, 2)))
    l1, l2 = gen.uniform(0.2, 3.0, size=2)
    phi = gen.uniform(0.0, min(l1, l2))
    return P, BivPoissonParams(l1, l2, phi)
