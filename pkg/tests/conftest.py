import numpy as np
import pytest

from qpagerank import fixtures
from qpagerank.perturbation.analysis import PerturbationAnalysis
from qpagerank.spectral import build_t, eigendecompose
from qpagerank.szegedy import build_walk, he_eigenpairs


@pytest.fixture(scope="session")
def analyses():
    """PerturbationAnalysis per (fixture name, K), built once per session."""
    cache = {}

    def get(name: str, K: int = 3) -> PerturbationAnalysis:
        if (name, K) not in cache:
            cache[name, K] = PerturbationAnalysis(fixtures.perturbed(name).series, K)
        return cache[name, K]

    return get


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def walk_of(G):
    ops = build_walk(G)
    return ops, he_eigenpairs(ops, eigendecompose(build_t(G)))
