import numpy as np
import pytest
from hypothesis import settings

from prodwave import netgen

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


def two_firm(beta=0.3):
    """Each firm buys only from the other: eigenvalues +-(1 - beta)."""
    A = np.array([[0.0, 1.0 - beta], [1.0 - beta, 0.0]])
    return netgen.ProductionNetwork(A, beta, np.array([0.5, 0.5]))


def complete(n=4, beta=0.5):
    """Every firm spreads its input spending evenly over the others."""
    A = (1.0 - beta) / (n - 1) * (np.ones((n, n)) - np.eye(n))
    return netgen.ProductionNetwork(A, beta, np.full(n, 1.0 / n))


@pytest.fixture
def small_net():
    return netgen.random_network(60, 1.8, 0.4, 123)


@pytest.fixture
def rng():
    return np.random.default_rng(2024)


def gapped_network(n=50, alpha=1.3, beta=0.4, start=0, real=True):
    """First seed from ``start`` whose network has a spectral gap (and a real transient when ``real``)."""
    import warnings

    from prodwave import spectral

    for seed in range(start, start + 200):
        net = netgen.random_network(n, alpha, beta, seed)
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("error", RuntimeWarning)
                s = spectral.summarize(net)
        except (spectral.SpectralError, RuntimeWarning):
            continue
        if s.lambda2_complex == (not real) and s.lambda2_mod < (1 - beta) * 0.999:
            return net, s
    raise RuntimeError("no suitable network found")
