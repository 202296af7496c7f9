"""Brute-force enumeration over ``{0,1}^p``.

Everything here is exact up to floating point and serves as ground truth for
the rest of the package: log-partition function, moment map, covariance,
exact i.i.d. sampling, the Gibbs variational gap and the three regularity
conditions of the reduction.
"""

from __future__ import annotations

import json
import weakref
from dataclasses import asdict, dataclass, field

import numpy as np

from .data import Dataset
from .model import Model, _states_t, all_states, log_weight_table

_TABLES: "weakref.WeakKeyDictionary[Model, np.ndarray]" = weakref.WeakKeyDictionary()


def _log_h(model: Model) -> np.ndarray:
    table = _TABLES.get(model)
    if table is None:
        table = _TABLES[model] = log_weight_table(model)
    return table


def _theta(model: Model, theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=np.float64)
    if theta.shape != (model.p,):
        raise ValueError(f"theta must have length {model.p}, got shape {theta.shape}")
    if not np.all(np.isfinite(theta)):
        raise ValueError("theta must be finite")
    return theta


def _logsumexp(a: np.ndarray) -> float:
    top = a.max()
    return float(top + np.log(np.exp(a - top).sum()))


def log_probabilities(model: Model, theta) -> tuple[np.ndarray, float]:
    """Return ``(log p_theta(x) for every state x, A(theta))``."""
    X = all_states(model.p)
    logits = _log_h(model) + X @ _theta(model, theta)
    A = _logsumexp(logits)
    return logits - A, A


def log_partition(model: Model, theta) -> float:
    return log_probabilities(model, theta)[1]


def moment_map(model: Model, theta) -> np.ndarray:
    logp, _ = log_probabilities(model, theta)
    return np.exp(logp) @ all_states(model.p)


def _mean(model: Model, theta):
    logp, A = log_probabilities(model, theta)
    prob = np.exp(logp)
    return A, prob @ all_states(model.p), prob


def _cov(model: Model, tau: np.ndarray, prob: np.ndarray) -> np.ndarray:
    cov = (_states_t(model.p) * prob) @ all_states(model.p) - np.outer(tau, tau)
    return 0.5 * (cov + cov.T)


def _moments(model: Model, theta):
    A, tau, prob = _mean(model, theta)
    return A, tau, _cov(model, tau, prob), prob


def covariance(model: Model, theta) -> np.ndarray:
    return _moments(model, theta)[2]


def mean_and_covariance(model: Model, theta) -> tuple[np.ndarray, np.ndarray]:
    _, tau, cov, _ = _moments(model, theta)
    return tau, cov


@dataclass
class ExactSummary:
    log_Z: float
    tau: list
    covariance: list
    min_eigenvalue: float

    def to_json(self) -> str:
        return json.dumps(asdict(self))

    @classmethod
    def from_json(cls, text: str) -> "ExactSummary":
        return cls(**json.loads(text))


def exact_summary(model: Model, theta) -> ExactSummary:
    A, tau, cov, _ = _moments(model, theta)
    return ExactSummary(
        log_Z=A,
        tau=tau.tolist(),
        covariance=cov.tolist(),
        min_eigenvalue=float(np.linalg.eigvalsh(cov)[0]),
    )


def exact_sample(model: Model, theta, n: int, seed=None) -> Dataset:
    """``n`` i.i.d. draws from ``p_theta`` by inverting the cumulative distribution."""
    if n < 1:
        raise ValueError("n must be >= 1")
    logp, _ = log_probabilities(model, theta)
    cdf = np.cumsum(np.exp(logp))
    rng = np.random.default_rng(seed)
    u = rng.random(n) * cdf[-1]
    idx = np.minimum(np.searchsorted(cdf, u, side="right"), len(cdf) - 1)
    samples = all_states(model.p)[idx].astype(np.uint8)
    return Dataset(samples, {"sampler": "exact", "seed": seed})


def conditional_odds_given_zero_neighbors(model: Model, theta, i: int) -> float:
    """``P(X_i=1 | X_nbrs=0) / P(X_i=0 | X_nbrs=0)`` by summing over all states."""
    if not model.is_ising:
        raise ValueError("needs an Ising model to define neighbourhoods")
    logp, _ = log_probabilities(model, theta)
    X = all_states(model.p)
    nbrs = list(model.graph.adjacency[i])
    free = np.all(X[:, nbrs] == 0, axis=1) if nbrs else np.ones(len(X), bool)
    one = free & (X[:, i] == 1)
    zero = free & (X[:, i] == 0)
    return float(np.exp(_logsumexp(logp[one]) - _logsumexp(logp[zero])))


def gibbs_variational_gap(model: Model, theta, q) -> float:
    """``A(theta) - [H(q) + E_q(log h(X) + <theta, X>)]``, nonnegative for any distribution ``q``."""
    q = np.asarray(q, dtype=np.float64)
    if q.shape != (2**model.p,):
        raise ValueError(f"q must have {2**model.p} entries")
    if np.any(q < 0) or abs(q.sum() - 1.0) > 1e-12:
        raise ValueError("q must be a probability distribution")
    logp, A = log_probabilities(model, theta)
    energy = _log_h(model) + all_states(model.p) @ _theta(model, theta)
    pos = q > 0
    entropy = -np.sum(q[pos] * np.log(q[pos]))
    return float(A - entropy - np.sum(q * energy))


def fact3_floor(model: Model, theta) -> float:
    """``min_x p_theta(x)**2``, a lower bound on the smallest covariance eigenvalue."""
    logp, _ = log_probabilities(model, theta)
    return float(np.exp(2 * logp.min()))


@dataclass
class ConditionReport:
    delta: float
    delta_c1: float
    L_estimate: float
    K_actual: float
    K_bound: float
    probes_total: int
    probes_used: int
    passes: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.passes.values())


def verify_conditions(model: Model, delta: float, probe_thetas, L=None, K=None) -> ConditionReport:
    """Check the three regularity conditions on ``model``.

    C1 at ``theta = 0``; C2's constant is estimated as the largest
    ``1/lambda_min(Cov)`` over the probes whose moments land in
    ``[delta, 1-delta]^p``; C3 by scanning every log-weight. When ``L`` or
    ``K`` are supplied the estimates are compared against them, otherwise C2
    only needs a feasible probe and C3 compares against the structural bound.
    """
    if not 0 < delta < 0.5:
        raise ValueError(f"delta must lie in (0, 1/2), got {delta}")
    probes = [np.asarray(t, dtype=np.float64) for t in probe_thetas]
    if not probes:
        raise ValueError("need at least one probe theta")
    tau0 = moment_map(model, np.zeros(model.p))
    delta_c1 = float(np.min(np.minimum(tau0, 1 - tau0)))

    inv_eigs = []
    for th in probes:
        tau, cov = mean_and_covariance(model, th)
        if np.all(tau >= delta) and np.all(tau <= 1 - delta):
            inv_eigs.append(1.0 / np.linalg.eigvalsh(cov)[0])
    L_est = max(inv_eigs) if inv_eigs else float("nan")

    table = _log_h(model)
    K_actual = float(table.max() - table.min())
    K_bound = model.span_bound

    passes = {
        "C1": bool(delta_c1 > delta),
        "C2": bool(inv_eigs) and (L is None or L_est <= L),
        "C3": bool(K_actual <= (K_bound if K is None else K) + 1e-12),
    }
    return ConditionReport(
        delta=delta,
        delta_c1=delta_c1,
        L_estimate=float(L_est),
        K_actual=K_actual,
        K_bound=float(K_bound),
        probes_total=len(probes),
        probes_used=len(inv_eigs),
        passes=passes,
    )


def default_probes(p: int, count: int = 20, scale: float = 2.0, seed=0) -> list[np.ndarray]:
    """``theta = 0`` plus ``count - 1`` uniform draws from ``[-scale, scale]^p``."""
    rng = np.random.default_rng(seed)
    return [np.zeros(p)] + [rng.uniform(-scale, scale, p) for _ in range(count - 1)]

