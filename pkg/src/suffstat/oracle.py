"""Inverse moment map, free energy, and a simulated parameter estimator.

``invert_moment_map`` solves ``tau_*(theta) = tau`` by damped Newton
iteration; the Jacobian of the moment map is the covariance, available
exactly from enumeration. The :class:`Oracle` wraps it with a controlled
error of l2 norm ``xi`` to play the role of an estimator that only sees the
sufficient statistics.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logit

from .exact import _cov, _mean
from .model import Model


class ConvergenceError(RuntimeError):
    pass


MAX_ITER = 200
MAX_HALVINGS = 50


def _check_tau(model: Model, tau) -> np.ndarray:
    tau = np.asarray(tau, dtype=np.float64)
    if tau.shape != (model.p,):
        raise ValueError(f"tau must have length {model.p}, got shape {tau.shape}")
    if not np.all((tau > 0) & (tau < 1)):
        raise ValueError("every tau_i must lie strictly inside (0, 1)")
    return tau


def invert_moment_map(model: Model, tau, tol: float = 1e-10, theta0=None) -> np.ndarray:
    """Find ``theta`` with ``max|tau_*(theta) - tau| <= tol``.

    Starts from the coordinatewise logit of ``tau`` (the exact answer when
    ``h`` is constant) unless ``theta0`` is given. Each Newton step is halved
    until the sup-norm residual decreases. Once within ``tol`` one more full
    step is tried and kept only if it lowers the residual further, which
    buys roughly an extra order of magnitude of accuracy in ``theta`` for the
    price of one enumeration.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    tau = _check_tau(model, tau)
    theta = logit(tau) if theta0 is None else np.array(theta0, dtype=np.float64)
    _, t, prob = _mean(model, theta)
    err = np.max(np.abs(tau - t))
    for _ in range(MAX_ITER):
        step = np.linalg.solve(_cov(model, t, prob), tau - t)
        if err <= tol:
            t2 = _mean(model, theta + step)[1]
            if np.max(np.abs(tau - t2)) < err:
                theta = theta + step
            return theta
        for _ in range(MAX_HALVINGS):
            cand = theta + step
            _, t2, prob2 = _mean(model, cand)
            err2 = np.max(np.abs(tau - t2))
            if err2 < err:
                break
            step = 0.5 * step
        else:
            raise ConvergenceError(f"line search stalled at residual {err:.3e}")
        theta, t, prob, err = cand, t2, prob2, err2
    raise ConvergenceError(
        f"no convergence in {MAX_ITER} Newton steps (residual {err:.3e}); tau too close to the boundary?"
    )


def free_energy(model: Model, tau, tol: float = 1e-10) -> float:
    """``F(tau) = A(theta_*(tau)) - <tau, theta_*(tau)>``."""
    tau = _check_tau(model, tau)
    theta = invert_moment_map(model, tau, tol)
    A = _mean(model, theta)[0]
    return float(A - tau @ theta)


def binary_entropy(x):
    """``s(x) = -x log x - (1-x) log(1-x)`` with ``s(0) = s(1) = 0``."""
    x = np.asarray(x, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = -np.where(x > 0, x * np.log(x), 0.0) - np.where(x < 1, (1 - x) * np.log1p(-x), 0.0)
    return out if out.ndim else float(out)


@dataclass(eq=False)
class Oracle:
    """Answers ``theta_*(tau)`` up to an l2 error of exactly ``xi``.

    In ``sphere`` mode every reply is pushed a distance ``xi`` from the true
    inverse in a uniformly random direction; ``exact`` mode returns the
    inverse itself. Not thread safe: carries an RNG and a query counter.
    """

    model: Model
    xi: float = 0.0
    noise_mode: str = "sphere"
    seed: int | None = None
    tol: float = 1e-10
    warm_start: bool = False
    record: bool = False
    query_count: int = 0
    log: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        if not (self.xi >= 0 and np.isfinite(self.xi)):
            raise ValueError(f"xi must be finite and >= 0, got {self.xi}")
        if self.noise_mode not in ("exact", "sphere"):
            raise ValueError(f"unknown noise mode {self.noise_mode!r}")
        self._rng = np.random.default_rng(self.seed)
        self._last = None

    @property
    def accuracy(self) -> float:
        return 0.0 if self.noise_mode == "exact" else self.xi

    def exact(self, tau) -> np.ndarray:
        theta = invert_moment_map(self.model, tau, self.tol, theta0=self._last if self.warm_start else None)
        if self.warm_start:
            self._last = theta
        return theta

    def __call__(self, tau) -> np.ndarray:
        return self.query(tau)

    def query(self, tau) -> np.ndarray:
        self.query_count += 1
        theta = self.exact(tau)
        reply = theta
        if self.noise_mode == "sphere" and self.xi > 0:
            u = self._rng.standard_normal(self.model.p)
            reply = theta + self.xi * u / np.linalg.norm(u)
        if self.record:
            self.log.append({"tau": np.asarray(tau).tolist(), "reply": reply.tolist(), "xi": self.accuracy})
        return reply

    def dump_log(self, path) -> None:
        with open(path, "w") as fh:
            for rec in self.log:
                fh.write(json.dumps(rec) + "\n")


def make_noisy_oracle(model: Model, xi: float, noise_mode: str = "sphere", seed=None, **kw) -> Oracle:
    return Oracle(model, xi=xi, noise_mode=noise_mode, seed=seed, **kw)
