"""Random network generators, trust matrices and topology features.

Graphs are simple undirected graphs on nodes ``0..n-1``.  By default every
node also carries a self-edge, so each agent counts its own opinion among
the opinions it averages.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence, Union

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

DEFAULT_ETA = 0.01
MAX_DENSE_NODES = 2000
MAX_CONNECT_TRIES = 1000


class GraphError(ValueError):
    """Invalid generator parameters or malformed graph input."""


class ConnectivityError(RuntimeError):
    """A connected draw could not be obtained within the retry budget."""


@dataclass(frozen=True, eq=False)
class UndirectedGraph:
    n: int
    edges: tuple[tuple[int, int], ...]
    self_loops: bool = True
    _adj: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.n < 1:
            raise GraphError("graph needs at least one node")
        if self.n > MAX_DENSE_NODES:
            raise GraphError(f"n={self.n} exceeds dense limit {MAX_DENSE_NODES}")
        adj = np.zeros((self.n, self.n), dtype=np.int8)
        for i, j in self.edges:
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise GraphError(f"edge ({i}, {j}) outside [0, {self.n})")
            if i == j:
                raise GraphError("self-edges are controlled by the self_loops flag")
            if adj[i, j]:
                raise GraphError(f"duplicate edge ({i}, {j})")
            adj[i, j] = adj[j, i] = 1
        adj.setflags(write=False)
        object.__setattr__(self, "_adj", adj)

    @classmethod
    def from_adjacency(cls, adj: np.ndarray, self_loops: bool = True) -> "UndirectedGraph":
        adj = np.asarray(adj)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise GraphError("adjacency must be square")
        upper = np.triu(adj != 0, k=1)
        if not np.array_equal(upper, np.triu(adj.T != 0, k=1)):
            raise GraphError("adjacency is not symmetric")
        i, j = np.nonzero(upper)
        return cls(adj.shape[0], tuple(zip(i.tolist(), j.tolist())), self_loops)

    @property
    def num_edges(self) -> int:
        """Number of edges, not counting self-edges."""
        return len(self.edges)

    def adjacency(self, include_self_loops: bool = True) -> np.ndarray:
        a = self._adj.astype(float)
        if include_self_loops and self.self_loops:
            np.fill_diagonal(a, 1.0)
        return a

    def degrees(self, include_self_loops: bool = True) -> np.ndarray:
        d = self._adj.sum(axis=1).astype(int)
        if include_self_loops and self.self_loops:
            d = d + 1
        return d

    def is_connected(self) -> bool:
        ncomp, _ = connected_components(csr_matrix(self._adj), directed=False)
        return ncomp == 1


# -- generator configurations -------------------------------------------------


@dataclass(frozen=True)
class ErdosRenyi:
    n: int
    p: float

    def validate(self):
        _check_n(self.n)
        if not 0.0 <= self.p <= 1.0:
            raise GraphError(f"edge probability p={self.p} outside [0, 1]")


@dataclass(frozen=True)
class WattsStrogatz:
    """Ring lattice with ``k`` nearest neighbours, each edge rewired with probability ``q``."""

    n: int
    k: int
    q: float

    def validate(self):
        _check_n(self.n)
        if self.k < 0 or self.k % 2:
            raise GraphError(f"neighbour count k={self.k} must be even and non-negative")
        if self.k >= self.n:
            raise GraphError(f"neighbour count k={self.k} must be below n={self.n}")
        if not 0.0 <= self.q <= 1.0:
            raise GraphError(f"rewiring probability q={self.q} outside [0, 1]")


@dataclass(frozen=True)
class StochasticBlock:
    sizes: tuple[int, ...]
    probs: tuple[tuple[float, ...], ...]

    def __init__(self, sizes: Sequence[int], probs):
        object.__setattr__(self, "sizes", tuple(int(s) for s in sizes))
        object.__setattr__(self, "probs", tuple(tuple(float(x) for x in row) for row in probs))

    @property
    def n(self) -> int:
        return sum(self.sizes)

    def validate(self):
        if not self.sizes or any(s < 1 for s in self.sizes):
            raise GraphError("group sizes must be positive")
        _check_n(self.n)
        P = np.asarray(self.probs, dtype=float)
        m = len(self.sizes)
        if P.shape != (m, m):
            raise GraphError(f"probability matrix must be {m}x{m}, got {P.shape}")
        if not np.array_equal(P, P.T):
            raise GraphError("probability matrix must be symmetric")
        if np.any(P < 0) or np.any(P > 1):
            raise GraphError("block probabilities must lie in [0, 1]")

    @classmethod
    def two_groups(cls, n: int, avg_degree: float, intra: float) -> "StochasticBlock":
        """Two equal groups with intra-group probability ``intra`` and
        inter-group probability ``2k/n - intra``."""
        if n % 2:
            raise GraphError("two-group split needs even n")
        inter = 2.0 * avg_degree / n - intra
        # floating residue from the subtraction, e.g. 1 - 0.7
        inter = round(inter, 12)
        return cls((n // 2, n // 2), ((intra, inter), (inter, intra)))


GeneratorConfig = Union[ErdosRenyi, WattsStrogatz, StochasticBlock]


def _check_n(n):
    if n < 1:
        raise GraphError("n must be positive")
    if n > MAX_DENSE_NODES:
        raise GraphError(f"n={n} exceeds dense limit {MAX_DENSE_NODES}")


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _draw_er(cfg: ErdosRenyi, rng) -> np.ndarray:
    n = cfg.n
    iu = np.triu_indices(n, k=1)
    keep = rng.random(iu[0].size) < cfg.p
    adj = np.zeros((n, n), dtype=bool)
    adj[iu[0][keep], iu[1][keep]] = True
    return adj | adj.T


def _draw_sbm(cfg: StochasticBlock, rng) -> np.ndarray:
    n = cfg.n
    labels = np.repeat(np.arange(len(cfg.sizes)), cfg.sizes)
    P = np.asarray(cfg.probs)
    iu = np.triu_indices(n, k=1)
    keep = rng.random(iu[0].size) < P[labels[iu[0]], labels[iu[1]]]
    adj = np.zeros((n, n), dtype=bool)
    adj[iu[0][keep], iu[1][keep]] = True
    return adj | adj.T


def _draw_ws(cfg: WattsStrogatz, rng) -> np.ndarray:
    n, half = cfg.n, cfg.k // 2
    adj = np.zeros((n, n), dtype=bool)
    for j in range(1, half + 1):
        idx = np.arange(n)
        adj[idx, (idx + j) % n] = True
        adj[(idx + j) % n, idx] = True
    if cfg.q == 0.0:
        return adj
    # rewire the far end of each clockwise lattice edge, one neighbour ring at a time
    for j in range(1, half + 1):
        for u in range(n):
            v = (u + j) % n
            if rng.random() >= cfg.q:
                continue
            # candidates: not u, not already adjacent
            free = ~adj[u]
            free[u] = False
            candidates = np.flatnonzero(free)
            if candidates.size == 0:
                continue
            w = candidates[rng.integers(candidates.size)]
            adj[u, v] = adj[v, u] = False
            adj[u, w] = adj[w, u] = True
    return adj


_DRAWERS = {ErdosRenyi: _draw_er, WattsStrogatz: _draw_ws, StochasticBlock: _draw_sbm}


def generate(
    config: GeneratorConfig,
    seed=None,
    *,
    connected: bool = False,
    self_loops: bool = True,
    max_tries: int = MAX_CONNECT_TRIES,
) -> UndirectedGraph:
    """Draw one graph from the ensemble described by ``config``.

    ``seed`` may be an int, ``None`` or a ``numpy.random.Generator``.  With
    ``connected=True`` the draw is repeated (up to ``max_tries`` times) until
    the graph is connected; failure raises :class:`ConnectivityError`.
    """
    config.validate()
    rng = _as_rng(seed)
    draw = _DRAWERS[type(config)]
    for _ in range(max_tries if connected else 1):
        adj = draw(config, rng)
        g = UndirectedGraph.from_adjacency(adj, self_loops=self_loops)
        if not connected or g.is_connected():
            return g
    raise ConnectivityError(f"no connected draw from {config} after {max_tries} tries")


# -- trust matrices -----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TrustMatrix:
    """Row-substochastic influence weights; row ``i`` holds the weights agent
    ``i`` puts on each opinion it averages."""

    weights: np.ndarray
    eta: float
    directed: bool = False

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise GraphError("trust matrix must be square")
        if w.shape[0] > MAX_DENSE_NODES:
            raise GraphError(f"n={w.shape[0]} exceeds dense limit {MAX_DENSE_NODES}")
        if np.any(w < 0):
            raise GraphError("trust weights must be non-negative")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    def row_sums(self) -> np.ndarray:
        return self.weights.sum(axis=1)

    def is_substochastic(self) -> bool:
        return bool(np.all(self.row_sums() < 1.0))

    def __array__(self, dtype=None, copy=None):
        return self.weights if dtype is None else self.weights.astype(dtype)


def trust_from_adjacency(adj: np.ndarray, eta: float = DEFAULT_ETA, directed: bool = True) -> TrustMatrix:
    """Normalise a 0/1 adjacency (row i = sources agent i listens to) so every
    non-empty row sums to ``1/(1+eta)``."""
    if eta <= 0:
        raise GraphError("eta must be positive for a strictly substochastic matrix")
    adj = (np.asarray(adj) != 0).astype(float)
    k = adj.sum(axis=1)
    if np.any(k == 0):
        raise GraphError("every node needs at least one incident edge (add self-loops)")
    return TrustMatrix(adj / (k[:, None] * (1.0 + eta)), eta=eta, directed=directed)


def trust_matrix(g: UndirectedGraph, eta: float = DEFAULT_ETA) -> TrustMatrix:
    """Uniform trust ``1/(k_i (1+eta))`` on each of node i's ``k_i`` edges,
    self-edge included in ``k_i``."""
    return trust_from_adjacency(g.adjacency(include_self_loops=True), eta, directed=False)


# -- topology features --------------------------------------------------------


@dataclass(frozen=True)
class NetworkFeatures:
    avg_shortest_path: float | None
    size: int
    avg_clustering: float
    density: float
    avg_degree: float
    connected: bool


def local_clustering(adj: np.ndarray) -> np.ndarray:
    """Per-node clustering coefficient of a 0/1 adjacency without self-edges."""
    a = (np.asarray(adj) != 0).astype(float)
    np.fill_diagonal(a, 0.0)
    deg = a.sum(axis=1)
    tri = np.einsum("ij,jk,ki->i", a, a, a) / 2.0
    pairs = deg * (deg - 1) / 2.0
    out = np.zeros_like(deg)
    np.divide(tri, pairs, out=out, where=pairs > 0)
    return out


def features(g: UndirectedGraph | np.ndarray) -> NetworkFeatures:
    """Density, clustering, mean degree and average shortest path length.

    Self-edges are ignored throughout.  The path length averages BFS
    distances over all ordered pairs and is ``None`` on disconnected graphs.
    """
    adj = g.adjacency(include_self_loops=False) if isinstance(g, UndirectedGraph) else np.asarray(g, float)
    adj = (adj != 0).astype(float)
    np.fill_diagonal(adj, 0.0)
    n = adj.shape[0]
    m = adj.sum() / 2.0
    density = 2.0 * m / (n * (n - 1)) if n > 1 else 0.0
    clustering = float(local_clustering(adj).mean())
    dist = shortest_path(csr_matrix(adj), method="D", directed=False, unweighted=True)
    connected = bool(np.all(np.isfinite(dist)))
    if connected and n > 1:
        avg_path = float(dist.sum() / (n * (n - 1)))
    elif connected:
        avg_path = 0.0
    else:
        avg_path = None
    return NetworkFeatures(
        avg_shortest_path=avg_path,
        size=n,
        avg_clustering=clustering,
        density=float(density),
        avg_degree=float(2.0 * m / n),
        connected=connected,
    )


# -- CSV interchange ----------------------------------------------------------


def edge_rows(obj: UndirectedGraph | TrustMatrix) -> list[tuple[int, int, float]]:
    if isinstance(obj, TrustMatrix):
        i, j = np.nonzero(obj.weights)
        return [(int(a), int(b), float(obj.weights[a, b])) for a, b in zip(i, j)]
    rows = []
    if obj.self_loops:
        rows.extend((i, i, 1.0) for i in range(obj.n))
    rows.extend((i, j, 1.0) for i, j in obj.edges)
    return sorted(rows)


def write_edge_list(path, obj: UndirectedGraph | TrustMatrix) -> None:
    """Write ``src,dst,weight`` rows.  Trust matrices emit one row per non-zero entry."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["src", "dst", "weight"])
        for src, dst, weight in edge_rows(obj):
            w.writerow([src, dst, repr(weight)])


def read_edge_list(path) -> list[tuple[int, int, float]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"src", "dst", "weight"} <= set(reader.fieldnames):
            raise GraphError(f"{path}: expected header src,dst,weight")
        return [(int(r["src"]), int(r["dst"]), float(r["weight"])) for r in reader]


def graph_from_edge_rows(rows: Iterable[tuple[int, int, float]], n: int | None = None) -> UndirectedGraph:
    rows = list(rows)
    if n is None:
        n = 1 + max(max(s, d) for s, d, _ in rows)
    has_self = {s for s, d, _ in rows if s == d}
    pairs = sorted({(min(s, d), max(s, d)) for s, d, _ in rows if s != d})
    return UndirectedGraph(n, tuple(pairs), self_loops=len(has_self) == n)


def write_trust_csv(path, a: TrustMatrix) -> None:
    """Dense trust matrix, one row per agent, header = column indices."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([str(j) for j in range(a.n)])
        for row in a.weights:
            w.writerow([repr(float(x)) for x in row])


def read_trust_csv(path, eta: float = DEFAULT_ETA, directed: bool = True) -> TrustMatrix:
    data = np.loadtxt(Path(path), delimiter=",", skiprows=1, ndmin=2)
    return TrustMatrix(data, eta=eta, directed=directed)
