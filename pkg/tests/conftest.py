import itertools
import math

import numpy as np
import pytest

from suffstat.graphs import Graph
from suffstat.model import build_antiferro_ising, build_dense_model


def random_dense(rng, p, scale=1.0):
    return build_dense_model(p, rng.normal(0.0, scale, 2**p))


def brute_force(model_log_h, theta):
    """Independent enumeration with plain Python: returns (log Z, tau, cov)."""
    p = len(theta)
    states = list(itertools.product((0, 1), repeat=p))
    w = [math.exp(model_log_h(x) + sum(t * xi for t, xi in zip(theta, x))) for x in states]
    Z = sum(w)
    tau = [sum(wi * x[i] for wi, x in zip(w, states)) / Z for i in range(p)]
    second = [[sum(wi * x[i] * x[j] for wi, x in zip(w, states)) / Z for j in range(p)] for i in range(p)]
    cov = [[second[i][j] - tau[i] * tau[j] for j in range(p)] for i in range(p)]
    return math.log(Z), np.array(tau), np.array(cov)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def uniform1():
    return build_dense_model(1, [0.0, 0.0])


@pytest.fixture
def edge():
    return build_antiferro_ising(Graph.from_edges(2, [(0, 1)]), 0.5)


@pytest.fixture
def cycle4():
    return build_antiferro_ising(Graph.cycle(4), 0.3)
