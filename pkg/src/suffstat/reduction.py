"""Approximate ``log Z(0)`` from a parameter estimator.

Since ``log Z(0) = max_tau F(tau)`` and ``grad F = -theta_*``, an oracle for
``theta_*`` is enough to (1) climb to the maximiser of ``F`` over the box
``[delta, 1-delta]^p`` with projected gradient ascent, and (2) recover the
value there by summing ``-<theta_*, dtau>`` along the straight line from
``(delta, ..., delta)``, where ``F`` is within a known distance of
``log h(0)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .oracle import Oracle, binary_entropy


class BudgetError(ValueError):
    pass


def admissibility_bound(p: int, delta: float, K: float) -> float:
    """Smallest ``epsilon`` (exclusive) the schedule can certify: ``4 p delta (K + log(4/delta))``."""
    return 4 * p * delta * (K + math.log(4 / delta))


def default_delta(p: int, K: float) -> float:
    return 1.0 / (10 * p * K)


def start_gap_bound(p: int, delta: float, K: float) -> float:
    """Bound on ``|F(delta, ..., delta) - log h(0)|``: entropy term plus energy term."""
    return p * binary_entropy(delta) + p * K * delta


@dataclass(frozen=True)
class ErrorBudget:
    p: int
    delta: float
    L: float
    K: float
    epsilon: float
    t0: int
    m0: int
    xi_max: float
    start_gap_bound: float

    def to_dict(self) -> dict:
        return asdict(self)


def compute_budget(p: int, delta: float, L: float, K: float, epsilon: float) -> ErrorBudget:
    if p < 1:
        raise BudgetError("p must be >= 1")
    if not 0 < delta < 0.5:
        raise BudgetError(f"delta must lie in (0, 1/2), got {delta}")
    if not L > 0:
        raise BudgetError(f"L must be positive, got {L}")
    if not K >= 0:
        raise BudgetError(f"K must be nonnegative, got {K}")
    bound = admissibility_bound(p, delta, K)
    if not epsilon > bound:
        raise BudgetError(f"epsilon={epsilon} is inadmissible: must exceed {bound:.6g}")
    t0 = math.ceil(2 * p * L / epsilon)
    m0 = math.ceil(4 * L * p / epsilon)
    return ErrorBudget(
        p=p,
        delta=delta,
        L=L,
        K=K,
        epsilon=epsilon,
        t0=t0,
        m0=m0,
        xi_max=epsilon / (16 * t0 * math.sqrt(p)),
        start_gap_bound=start_gap_bound(p, delta, K),
    )


def project_box(u, delta: float) -> np.ndarray:
    """Orthogonal projection onto ``[delta, 1-delta]^p`` (a coordinatewise clamp)."""
    return np.clip(np.asarray(u, dtype=np.float64), delta, 1 - delta)


def _check_oracle(oracle: Oracle, budget: ErrorBudget) -> None:
    if oracle.accuracy > budget.xi_max:
        raise BudgetError(f"oracle accuracy {oracle.accuracy:.3e} exceeds xi_max={budget.xi_max:.3e}")


def projected_gradient_maximize(oracle: Oracle, budget: ErrorBudget, trajectory: list | None = None) -> np.ndarray:
    """Run exactly ``t0`` steps of ``tau <- P(tau - theta_hat(tau) / L)`` from the centre of the cube."""
    _check_oracle(oracle, budget)
    tau = np.full(budget.p, 0.5)
    if trajectory is not None:
        trajectory.append(tau)
    for _ in range(budget.t0):
        tau = project_box(tau - oracle(tau) / budget.L, budget.delta)
        if trajectory is not None:
            trajectory.append(tau)
    return tau


def path_integrate_logZ(oracle: Oracle, tau_start, tau_end, m: int, log_h0: float, delta: float | None = None) -> float:
    """``log_h0 - sum_l <theta_hat(tau_l), tau_l - tau_{l-1}>`` over ``m`` equal segments.

    The oracle is evaluated at the right end of each segment. Identical
    endpoints short-circuit to ``log_h0`` without querying.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    a = np.asarray(tau_start, dtype=np.float64)
    b = np.asarray(tau_end, dtype=np.float64)
    lo, hi = (0.0, 1.0) if delta is None else (delta, 1 - delta)
    for name, v in (("tau_start", a), ("tau_end", b)):
        inside = (v > 0) & (v < 1) & (v >= lo) & (v <= hi)
        if v.shape != (oracle.model.p,) or not inside.all():
            raise ValueError(f"{name} lies outside the feasible box")
    if np.array_equal(a, b):
        return float(log_h0)
    step = (b - a) / m
    total = 0.0
    for ell in range(1, m + 1):
        total += oracle(a + ell * step) @ step
    return float(log_h0 - total)


@dataclass
class ReductionReport:
    log_Z_hat: float
    tau_final: list
    oracle_queries: int
    budget: ErrorBudget
    exact_log_Z: float | None = None
    achieved_error: float | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["budget"] = self.budget.to_dict()
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "ReductionReport":
        d = json.loads(text)
        d["budget"] = ErrorBudget(**d["budget"])
        return cls(**d)


def approximate_logZ(meta: dict, oracle: Oracle, epsilon: float, exact_log_Z: float | None = None) -> ReductionReport:
    """End-to-end estimate of ``log Z(0)``.

    ``meta`` carries ``p, delta, L, K, log_h0``. The caller is responsible for
    the three regularity conditions holding with these constants.
    """
    budget = compute_budget(meta["p"], meta["delta"], meta["L"], meta["K"], epsilon)
    _check_oracle(oracle, budget)
    start = oracle.query_count
    tau_end = projected_gradient_maximize(oracle, budget)
    tau_start = np.full(budget.p, budget.delta)
    log_Z_hat = path_integrate_logZ(oracle, tau_start, tau_end, budget.m0, meta["log_h0"], budget.delta)
    report = ReductionReport(
        log_Z_hat=log_Z_hat,
        tau_final=tau_end.tolist(),
        oracle_queries=oracle.query_count - start,
        budget=budget,
    )
    if exact_log_Z is not None:
        report.exact_log_Z = float(exact_log_Z)
        report.achieved_error = abs(log_Z_hat - exact_log_Z)
    return report
