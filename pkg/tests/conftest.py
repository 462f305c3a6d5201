import numpy as np
import pytest

from concatqec.channels import kraus_to_natural, kraus_to_ptm
from concatqec.codes import five_qubit_code, shor_code, steane_code
from concatqec.noise import random_cptp_kraus


@pytest.fixture(scope="session")
def five_code():
    return five_qubit_code()


@pytest.fixture(scope="session")
def steane():
    return steane_code()


@pytest.fixture(scope="session")
def shor():
    return shor_code()


@pytest.fixture()
def rng():
    return np.random.default_rng(20240921)


def random_cptp_natural(rng):
    return kraus_to_natural(random_cptp_kraus(rng))


def random_cptp_ptm(rng):
    return kraus_to_ptm(random_cptp_kraus(rng))


def random_density(rng, d=2):
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = z @ np.conj(z).T
    return rho / np.trace(rho)
