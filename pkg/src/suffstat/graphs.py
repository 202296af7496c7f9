"""Simple undirected graphs and random regular graph generation."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on vertices ``0..p-1``.

    ``adjacency[i]`` is the sorted tuple of neighbours of ``i``. ``k`` is the
    common degree when the graph is regular and the maximum degree otherwise;
    ``regular`` tells which.
    """

    p: int
    adjacency: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.p < 1:
            raise GraphError(f"need at least one vertex, got p={self.p}")
        if len(self.adjacency) != self.p:
            raise GraphError("adjacency must have one entry per vertex")
        for i, nbrs in enumerate(self.adjacency):
            if list(nbrs) != sorted(set(nbrs)):
                raise GraphError(f"neighbours of {i} must be sorted and distinct")
            for j in nbrs:
                if not 0 <= j < self.p:
                    raise GraphError(f"vertex {j} out of range")
                if j == i:
                    raise GraphError(f"self-loop at vertex {i}")
                if i not in self.adjacency[j]:
                    raise GraphError(f"edge ({i},{j}) is not symmetric")

    @classmethod
    def from_edges(cls, p: int, edges) -> "Graph":
        nbrs: list[set[int]] = [set() for _ in range(p)]
        for i, j in edges:
            i, j = int(i), int(j)
            if i == j:
                raise GraphError(f"self-loop at vertex {i}")
            if not (0 <= i < p and 0 <= j < p):
                raise GraphError(f"edge ({i},{j}) out of range for p={p}")
            if j in nbrs[i]:
                raise GraphError(f"duplicate edge ({i},{j})")
            nbrs[i].add(j)
            nbrs[j].add(i)
        return cls(p, tuple(tuple(sorted(s)) for s in nbrs))

    @classmethod
    def cycle(cls, p: int) -> "Graph":
        if p < 3:
            raise GraphError("a cycle needs at least 3 vertices")
        return cls.from_edges(p, [(i, (i + 1) % p) for i in range(p)])

    @property
    def degrees(self) -> tuple[int, ...]:
        return tuple(len(n) for n in self.adjacency)

    @property
    def k(self) -> int:
        return max(self.degrees)

    @property
    def regular(self) -> bool:
        return len(set(self.degrees)) == 1

    @property
    def edges(self) -> list[tuple[int, int]]:
        return [(i, j) for i, nbrs in enumerate(self.adjacency) for j in nbrs if i < j]

    def edge_array(self) -> np.ndarray:
        e = self.edges
        return np.array(e, dtype=np.int64).reshape(len(e), 2)


def random_regular_graph(p: int, k: int, seed=None, max_tries: int = 1000) -> Graph:
    """Random simple ``k``-regular graph on ``p`` vertices.

    Pairing model with repair: shuffle the ``p*k`` stubs and pair them off,
    keep every pair that forms a new simple edge, and re-pair only the stubs
    of rejected pairs. When the leftover stubs admit no valid edge at all,
    the attempt is abandoned and restarted from scratch.
    """
    if k < 0 or p < 1:
        raise GraphError("need p >= 1 and k >= 0")
    if (p * k) % 2:
        raise GraphError(f"p*k must be even, got p={p}, k={k}")
    if k >= p:
        raise GraphError(f"need k < p, got p={p}, k={k}")
    rng = np.random.default_rng(seed)
    for _ in range(max_tries):
        edges = _try_pairing(p, k, rng)
        if edges is not None:
            return Graph.from_edges(p, sorted(edges))
    raise GraphError(f"no simple {k}-regular graph on {p} vertices after {max_tries} tries")


def _try_pairing(p: int, k: int, rng) -> set | None:
    edges: set[tuple[int, int]] = set()
    stubs = np.repeat(np.arange(p), k)
    while len(stubs):
        rest = []
        for a, b in rng.permutation(stubs).reshape(-1, 2).tolist():
            e = (min(a, b), max(a, b))
            if a != b and e not in edges:
                edges.add(e)
            else:
                rest += [a, b]
        if rest and not _can_extend(rest, edges):
            return None
        stubs = np.array(rest, dtype=np.int64)
    return edges


def _can_extend(stubs, edges) -> bool:
    verts = sorted(set(stubs))
    return any((u, v) not in edges for i, u in enumerate(verts) for v in verts[i + 1:])


def format_graph(graph: Graph) -> str:
    lines = [f"{graph.p} {graph.k}"]
    lines += [f"{i + 1} {j + 1}" for i, j in graph.edges]
    return "\n".join(lines) + "\n"


def parse_graph(text: str) -> Graph:
    """Parse the ``p k`` header + 1-indexed ``i j`` edge list format.

    Every vertex must end up with degree exactly ``k``.
    """
    try:
        return _parse_graph(text)
    except ValueError as exc:
        if isinstance(exc, GraphError):
            raise
        raise GraphError(f"malformed graph file: {exc}") from None


def _parse_graph(text: str) -> Graph:
    rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not rows or len(rows[0]) != 2:
        raise GraphError("first line must be 'p k'")
    p, k = int(rows[0][0]), int(rows[0][1])
    edges = []
    for row in rows[1:]:
        if len(row) != 2:
            raise GraphError(f"bad edge line: {' '.join(row)!r}")
        i, j = int(row[0]), int(row[1])
        if not i < j:
            raise GraphError(f"edge line must have i < j, got {i} {j}")
        edges.append((i - 1, j - 1))
    graph = Graph.from_edges(p, edges)
    if set(graph.degrees) != {k}:
        raise GraphError(f"graph is not {k}-regular")
    return graph


def read_graph(path) -> Graph:
    return parse_graph(Path(path).read_text())


def write_graph(graph: Graph, path) -> None:
    Path(path).write_text(format_graph(graph))
