import json
import math

import numpy as np
import pytest

from conftest import random_dense
from suffstat.exact import log_partition, moment_map
from suffstat.graphs import Graph
from suffstat.model import build_antiferro_ising, build_dense_model
from suffstat.oracle import (
    ConvergenceError,
    Oracle,
    binary_entropy,
    free_energy,
    invert_moment_map,
    make_noisy_oracle,
)

LOG_Z_EDGE = 2.006408868078168
S_QUARTER = 0.5623351446188083  # -(1/4)log(1/4) - (3/4)log(3/4) by hand


def test_invert_examples(uniform1, edge):
    np.testing.assert_allclose(invert_moment_map(uniform1, [0.5]), [0.0], atol=1e-12)
    tau = 0.731059
    assert invert_moment_map(uniform1, [tau])[0] == pytest.approx(math.log(tau / (1 - tau)), abs=1e-9)
    assert invert_moment_map(uniform1, [0.7310585786300049])[0] == pytest.approx(1.0, abs=1e-9)
    np.testing.assert_allclose(invert_moment_map(edge, [0.5, 0.5]), [0.0, 0.0], atol=1e-10)


def test_free_energy_examples(uniform1, edge):
    assert free_energy(uniform1, [0.5]) == pytest.approx(math.log(2), abs=1e-12)
    assert free_energy(edge, [0.5, 0.5]) == pytest.approx(LOG_Z_EDGE, abs=1e-10)
    assert free_energy(uniform1, [0.25]) == pytest.approx(S_QUARTER, abs=1e-10)


def test_binary_entropy():
    assert binary_entropy(0.5) == pytest.approx(math.log(2))
    assert binary_entropy(0.0) == 0.0 and binary_entropy(1.0) == 0.0
    np.testing.assert_allclose(binary_entropy([0.25, 0.1, 0.01]), [S_QUARTER, 0.3250829733914482, 0.056001534354847345])


def test_free_energy_is_sum_of_entropies_when_h_constant(rng):
    m = build_dense_model(3, np.zeros(8))
    for _ in range(10):
        tau = rng.uniform(0.05, 0.95, 3)
        assert free_energy(m, tau) == pytest.approx(np.sum(binary_entropy(tau)), abs=1e-10)


@pytest.mark.parametrize("tau", [[0.0], [1.0], [1.2], [0.5, 0.5]])
def test_invert_rejects_bad_tau(uniform1, tau):
    with pytest.raises(ValueError):
        invert_moment_map(uniform1, tau)


def test_invert_rejects_bad_tol(uniform1):
    with pytest.raises(ValueError):
        invert_moment_map(uniform1, [0.5], tol=0)


def test_invert_reports_non_convergence():
    m = build_dense_model(2, [0.0, 0.0, 0.0, 30.0])
    # a residual below machine epsilon cannot be reached from near the boundary
    with pytest.raises(ConvergenceError):
        invert_moment_map(m, [1 - 1e-13, 1e-13], tol=1e-16)


def test_round_trip_random_models():
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(30):
        p = int(rng.integers(1, 7))
        m = random_dense(rng, p)
        theta = rng.uniform(-2, 2, p)
        back = invert_moment_map(m, moment_map(m, theta), tol=1e-8)
        worst = max(worst, np.max(np.abs(back - theta)))
    assert worst <= 1e-6


def test_round_trip_ising():
    m = build_antiferro_ising(Graph.cycle(6), 0.6)
    theta = np.linspace(-1, 1, 6)
    np.testing.assert_allclose(invert_moment_map(m, moment_map(m, theta), tol=1e-10), theta, atol=1e-7)


def test_warm_start_gives_same_answer(rng):
    m = random_dense(rng, 4)
    theta = rng.uniform(-1, 1, 4)
    tau = moment_map(m, theta)
    a = invert_moment_map(m, tau, 1e-10)
    b = invert_moment_map(m, tau, 1e-10, theta0=theta + 0.3)
    np.testing.assert_allclose(a, b, atol=1e-8)


def test_duality(rng):
    for _ in range(20):
        p = int(rng.integers(1, 6))
        m = random_dense(rng, p)
        theta = rng.uniform(-2, 2, p)
        tau = moment_map(m, theta)
        assert abs(log_partition(m, theta) - free_energy(m, tau, 1e-10) - tau @ theta) <= 1e-8


def test_free_energy_gradient(rng):
    h = 1e-5
    for _ in range(8):
        p = int(rng.integers(1, 5))
        m = random_dense(rng, p)
        tau = rng.uniform(0.2, 0.8, p)
        fd = np.array([(free_energy(m, tau + h * e, 1e-12) - free_energy(m, tau - h * e, 1e-12)) / (2 * h) for e in np.eye(p)])
        np.testing.assert_allclose(fd, -invert_moment_map(m, tau, 1e-12), atol=1e-4)


def test_free_energy_concave(rng):
    for _ in range(30):
        p = int(rng.integers(1, 5))
        m = random_dense(rng, p)
        t1, t2 = rng.uniform(0.05, 0.95, (2, p))
        lam = rng.uniform(0.01, 0.99)
        mid = free_energy(m, lam * t1 + (1 - lam) * t2)
        assert mid >= lam * free_energy(m, t1) + (1 - lam) * free_energy(m, t2) - 1e-8


# ------------------------------------------------------------------- oracle


def test_exact_oracle_returns_inverse(cycle4):
    orc = make_noisy_oracle(cycle4, 0.0)
    tau = np.array([0.3, 0.4, 0.5, 0.6])
    np.testing.assert_array_equal(orc(tau), invert_moment_map(cycle4, tau, orc.tol))
    orc2 = make_noisy_oracle(cycle4, 0.5, noise_mode="exact")
    np.testing.assert_array_equal(orc2(tau), invert_moment_map(cycle4, tau, orc.tol))
    assert orc2.accuracy == 0.0


def test_sphere_oracle_radius(cycle4, rng):
    orc = make_noisy_oracle(cycle4, 0.01, seed=4)
    for _ in range(20):
        tau = rng.uniform(0.1, 0.9, 4)
        dist = np.linalg.norm(orc.query(tau) - invert_moment_map(cycle4, tau, orc.tol))
        assert abs(dist - 0.01) <= 1e-12
    assert orc.query_count == 20


def test_oracle_determinism(cycle4, rng):
    taus = rng.uniform(0.1, 0.9, (10, 4))
    a = make_noisy_oracle(cycle4, 0.05, seed=11)
    b = make_noisy_oracle(cycle4, 0.05, seed=11)
    c = make_noisy_oracle(cycle4, 0.05, seed=12)
    ra = [a(t) for t in taus]
    rb = [b(t) for t in taus]
    rc = [c(t) for t in taus]
    np.testing.assert_array_equal(ra, rb)
    assert not np.allclose(ra, rc)


def test_oracle_rejects_bad_settings(cycle4):
    with pytest.raises(ValueError):
        make_noisy_oracle(cycle4, -0.1)
    with pytest.raises(ValueError):
        make_noisy_oracle(cycle4, 0.1, noise_mode="gaussian")


def test_oracle_query_log(cycle4, tmp_path):
    orc = Oracle(cycle4, xi=0.02, seed=1, record=True)
    orc([0.5] * 4)
    orc([0.4] * 4)
    path = tmp_path / "log.jsonl"
    orc.dump_log(path)
    recs = [json.loads(ln) for ln in path.read_text().splitlines()]
    assert len(recs) == 2 and recs[1]["tau"] == [0.4] * 4 and recs[0]["xi"] == 0.02
