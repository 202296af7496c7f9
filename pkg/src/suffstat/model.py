"""Weight functions ``h`` on the binary hypercube.

A model is either a dense table of ``2**p`` log-weights or an
anti-ferromagnetic Ising model given by a graph and an inverse
temperature ``beta``, with ``log h(x) = 2*beta*#{edges (i,j): x_i != x_j}``.

Dense tables are indexed by the integer whose binary digits are ``x``, with
coordinate 0 as the least significant bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .graphs import Graph

ENUMERATION_CAP = 20


class ModelError(ValueError):
    pass


@lru_cache(maxsize=32)
def _states(p: int) -> np.ndarray:
    idx = np.arange(2**p, dtype=np.int64)
    out = ((idx[:, None] >> np.arange(p)) & 1).astype(np.float64)
    out.flags.writeable = False
    return out


@lru_cache(maxsize=32)
def _states_t(p: int) -> np.ndarray:
    out = np.ascontiguousarray(_states(p).T)
    out.flags.writeable = False
    return out


def all_states(p: int, cap: int = ENUMERATION_CAP) -> np.ndarray:
    """All of ``{0,1}^p`` as a read-only ``(2**p, p)`` float array, row ``r`` = bits of ``r``."""
    if p > cap:
        raise ModelError(f"p={p} exceeds the enumeration cap {cap}")
    return _states(p)


def state_index(x) -> int:
    x = np.asarray(x, dtype=np.int64)
    return int(np.sum(x << np.arange(len(x))))


@dataclass(frozen=True, eq=False)
class Model:
    p: int
    kind: str
    log_weights: np.ndarray | None = field(default=None, repr=False)
    graph: Graph | None = None
    beta: float = 0.0

    @property
    def is_ising(self) -> bool:
        return self.kind == "antiferro-ising"

    @property
    def log_h0(self) -> float:
        """``log h(0)``; zero for every Ising model."""
        if self.is_ising:
            return 0.0
        return float(self.log_weights[0])

    @property
    def span_bound(self) -> float:
        """Upper bound on ``max log h - min log h``; ``beta*k*p`` for Ising models."""
        if self.is_ising:
            return self.beta * self.graph.k * self.p
        return float(np.ptp(self.log_weights))


def build_dense_model(p: int, log_weights, cap: int = ENUMERATION_CAP) -> Model:
    if p < 1:
        raise ModelError("p must be >= 1")
    if p > cap:
        raise ModelError(f"p={p} exceeds the enumeration cap {cap}")
    table = np.array(log_weights, dtype=np.float64).ravel()
    if table.shape != (2**p,):
        raise ModelError(f"expected {2**p} log-weights, got {table.size}")
    if not np.all(np.isfinite(table)):
        raise ModelError("log-weights must be finite (h strictly positive)")
    table.flags.writeable = False
    return Model(p=p, kind="dense", log_weights=table)


def build_antiferro_ising(graph: Graph, beta: float) -> Model:
    if not isinstance(graph, Graph):
        raise ModelError("graph must be a Graph")
    if not np.isfinite(beta) or beta < 0:
        raise ModelError(f"beta must be finite and >= 0, got {beta}")
    return Model(p=graph.p, kind="antiferro-ising", graph=graph, beta=float(beta))


def eval_log_weight(model: Model, x) -> float:
    x = np.asarray(x)
    if x.shape != (model.p,):
        raise ModelError(f"x must have length {model.p}, got shape {x.shape}")
    if model.is_ising:
        e = model.graph.edge_array()
        return 2.0 * model.beta * float(np.sum(x[e[:, 0]] != x[e[:, 1]]))
    return float(model.log_weights[state_index(x)])


def log_weight_table(model: Model, cap: int = ENUMERATION_CAP) -> np.ndarray:
    """``log h`` over every state, in ``all_states`` order."""
    if model.kind == "dense":
        return model.log_weights
    X = all_states(model.p, cap)
    e = model.graph.edge_array()
    disagree = np.sum(X[:, e[:, 0]] != X[:, e[:, 1]], axis=1)
    return 2.0 * model.beta * disagree


def ising_as_dense(model: Model) -> Model:
    return build_dense_model(model.p, log_weight_table(model))
