"""Sampling from anti-ferromagnetic Ising models and the neighbourhood-count field estimator.

For a vertex ``i`` with all neighbours at 0 the conditional odds of
``X_i = 1`` are ``exp(2*beta*deg(i) + theta_i)``, so the empirical odds among
samples whose neighbourhood is all-zero give a consistent estimate of
``theta_i``. The estimator needs joint counts, not just column means.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .data import Dataset
from .exact import exact_sample
from .graphs import Graph
from .model import Model


def heat_bath_probability(model: Model, theta, i: int, x) -> float:
    """``P(X_i = 1 | X_nbrs = x_nbrs)`` for an Ising model; ``x[i]`` itself is ignored."""
    x = np.asarray(x)
    nbrs = list(model.graph.adjacency[i])
    ones = int(x[nbrs].sum()) if nbrs else 0
    deg = len(nbrs)
    return float(expit(theta[i] + 2 * model.beta * (deg - 2 * ones)))


def gibbs_sample(
    model: Model,
    theta,
    n: int,
    burn_in: int | None = None,
    thin: int | None = None,
    seed=None,
    chains: int = 1,
) -> Dataset:
    """Systematic-scan heat-bath sampler.

    ``burn_in`` and ``thin`` count full sweeps and default to ``100*p`` and
    ``p``. With ``chains > 1`` that many independent chains advance together
    (vectorised over chains) and each contributes ``ceil(n / chains)``
    consecutive thinned samples; rows are interleaved by time.
    """
    if not model.is_ising:
        raise ValueError("gibbs_sample needs an Ising model")
    p = model.p
    burn_in = 100 * p if burn_in is None else burn_in
    thin = p if thin is None else thin
    if n < 1 or burn_in < 0 or thin < 1 or chains < 1:
        raise ValueError("need n >= 1, burn_in >= 0, thin >= 1, chains >= 1")
    theta = np.asarray(theta, dtype=np.float64)
    rng = np.random.default_rng(seed)
    nbrs = [np.array(a, dtype=np.int64) for a in model.graph.adjacency]
    deg = np.array([len(a) for a in nbrs], dtype=np.float64)
    two_beta = 2.0 * model.beta

    state = (rng.random((chains, p)) < 0.5).astype(np.float64)

    def sweep():
        for i in range(p):
            ones = state[:, nbrs[i]].sum(axis=1)
            prob = expit(theta[i] + two_beta * (deg[i] - 2 * ones))
            state[:, i] = rng.random(chains) < prob

    for _ in range(burn_in):
        sweep()
    per_chain = -(-n // chains)
    out = np.empty((per_chain, chains, p), dtype=np.uint8)
    for t in range(per_chain):
        for _ in range(thin):
            sweep()
        out[t] = state
    samples = out.reshape(-1, p)[:n]
    prov = {"sampler": "gibbs", "seed": seed, "burn_in": burn_in, "thin": thin, "chains": chains}
    return Dataset(samples, prov)


def neighborhood_counts(dataset: Dataset, graph: Graph, i: int) -> tuple[int, int]:
    """``(N0, N1)``: samples with all neighbours of ``i`` at 0 and ``X_i`` = 0 or 1."""
    if not 0 <= i < graph.p:
        raise IndexError(f"vertex {i} out of range for p={graph.p}")
    if dataset.p != graph.p:
        raise ValueError("dataset and graph disagree on p")
    s = dataset.samples
    nbrs = list(graph.adjacency[i])
    free = ~s[:, nbrs].any(axis=1) if nbrs else np.ones(dataset.n, dtype=bool)
    n1 = int(np.count_nonzero(free & (s[:, i] == 1)))
    n0 = int(np.count_nonzero(free)) - n1
    return n0, n1


@dataclass
class FieldEstimate:
    theta_hat: np.ndarray
    valid: np.ndarray
    N0: np.ndarray
    N1: np.ndarray

    def rows(self) -> list[dict]:
        return [
            {
                "vertex": i + 1,
                "N0": int(self.N0[i]),
                "N1": int(self.N1[i]),
                "theta_hat": float(self.theta_hat[i]),
                "valid": bool(self.valid[i]),
            }
            for i in range(len(self.theta_hat))
        ]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=["vertex", "N0", "N1", "theta_hat", "valid"], lineterminator="\n")
        w.writeheader()
        for row in self.rows():
            w.writerow({**row, "theta_hat": repr(row["theta_hat"]), "valid": int(row["valid"])})
        return buf.getvalue()

    def max_error(self, theta) -> float:
        """Sup-norm error against ``theta``; infinite if any coordinate is invalid."""
        if not self.valid.all():
            return math.inf
        return float(np.max(np.abs(self.theta_hat - np.asarray(theta))))


def estimate_fields_from_samples(dataset: Dataset, graph: Graph, beta: float) -> FieldEstimate:
    """``theta_hat_i = -2*beta*deg(i) + log(N1/N0)``.

    Coordinates where either count is zero are left as NaN and flagged invalid.
    """
    counts = np.array([neighborhood_counts(dataset, graph, i) for i in range(graph.p)], dtype=np.int64)
    N0, N1 = counts[:, 0], counts[:, 1]
    valid = (N0 > 0) & (N1 > 0)
    deg = np.array(graph.degrees, dtype=np.float64)
    theta_hat = np.full(graph.p, np.nan)
    theta_hat[valid] = -2 * beta * deg[valid] + np.log(N1[valid] / N0[valid])
    return FieldEstimate(theta_hat, valid, N0, N1)


@dataclass(frozen=True)
class EstimatorConfig:
    xi: float
    Delta: float
    theta_max: float = 1.0
    C_star: float = 1.0

    def __post_init__(self):
        if not self.xi > 0:
            raise ValueError("xi must be positive")
        if not 0 < self.Delta < 1:
            raise ValueError("Delta must lie in (0, 1)")
        if not self.theta_max >= 1:
            raise ValueError("theta_max must be >= 1")


def required_samples(config: EstimatorConfig, p: int, k: int | None = None, beta: float | None = None) -> int:
    """``ceil(exp(C* theta_max) * xi**-2 * log(p / Delta))``.

    ``k`` and ``beta`` only enter through ``config.C_star``; they are accepted
    so call sites read like the bound they instantiate.
    """
    return math.ceil(math.exp(config.C_star * config.theta_max) * config.xi**-2 * math.log(p / config.Delta))


def success_fraction(model: Model, theta, n: int, xi: float, trials: int, seed=0, sampler=None) -> float:
    """Fraction of seeded trials with ``max|theta_hat - theta| <= xi`` on ``n`` samples."""
    sampler = sampler or exact_sample
    seeds = np.random.SeedSequence(seed).spawn(trials)
    hits = 0
    for ss in seeds:
        data = sampler(model, theta, n, seed=ss)
        est = estimate_fields_from_samples(data, model.graph, model.beta)
        hits += est.max_error(theta) <= xi
    return hits / trials


def calibrate_c_star(model: Model, theta, config: EstimatorConfig, grid, trials: int = 20, seed=0) -> float:
    """Smallest ``C*`` in ``grid`` whose sample-size rule meets ``1 - Delta`` empirically.

    Uses exact sampling, so ``model`` must be enumerable.
    """
    for c in sorted(grid):
        cfg = EstimatorConfig(config.xi, config.Delta, config.theta_max, c)
        n = required_samples(cfg, model.p)
        if success_fraction(model, theta, n, cfg.xi, trials, seed) >= 1 - cfg.Delta:
            return float(c)
    raise ValueError("no C* in the grid meets the target success probability")
