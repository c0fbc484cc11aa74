import numpy as np
import pytest

from scatzip import ensembles


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_unitary(rng, L):
    return ensembles.random_unitary(rng, L)


def random_disc_point(rng, rmax=0.9):
    return rmax * np.sqrt(rng.uniform(0.01, 1.0)) * np.exp(2j * np.pi * rng.uniform())
