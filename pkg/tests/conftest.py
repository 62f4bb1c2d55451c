import numpy as np
import pytest

from csrsma.channel import OneRingParams, one_ring_covariance, sample_channels

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def correlated_factor():
    return one_ring_covariance(OneRingParams(2, np.pi / 3, np.pi / 18))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def two_user_channels(correlated_factor):
    return sample_channels([correlated_factor] * 2, rng_seed=5)


def random_precoder(rng, n_t, K, power=4.0):
    P = rng.standard_normal((n_t, K + 1)) + 1j * rng.standard_normal((n_t, K + 1))
    return P * np.sqrt(power / np.sum(np.abs(P) ** 2))


def random_channels(rng, K, n_t):
    return (rng.standard_normal((K, n_t)) + 1j * rng.standard_normal((K, n_t))) / np.sqrt(2)
