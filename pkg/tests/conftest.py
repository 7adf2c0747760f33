import math

import numpy as np
import pytest

from noisyop.graph import UndirectedGraph


def jacobi_eigenvalues(s, tol=1e-14, max_sweeps=100):
    """Cyclic Jacobi rotations on a symmetric matrix; independent of LAPACK."""
    a = np.array(s, dtype=float, copy=True)
    n = a.shape[0]
    for _ in range(max_sweeps):
        off = math.sqrt(float(np.sum(a**2) - np.sum(np.diag(a) ** 2)))
        if off < tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(a[p, q]) < 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * a[p, q])
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                sn = t * c
                rot = np.array([[c, sn], [-sn, c]])
                idx = [p, q]
                a[idx, :] = rot.T @ a[idx, :]
                a[:, idx] = a[:, idx] @ rot
    return np.sort(np.diag(a))[::-1]


def brute_bfs_lengths(adj):
    """All-pairs hop counts by repeated breadth-first search (self-loops ignored)."""
    n = adj.shape[0]
    nbrs = [[j for j in range(n) if j != i and adj[i, j]] for i in range(n)]
    dist = np.full((n, n), -1)
    for s in range(n):
        dist[s, s] = 0
        frontier = [s]
        while frontier:
            nxt = []
            for u in frontier:
                for v in nbrs[u]:
                    if dist[s, v] < 0:
                        dist[s, v] = dist[s, u] + 1
                        nxt.append(v)
            frontier = nxt
    return dist


def star(n):
    return UndirectedGraph(n, tuple((0, j) for j in range(1, n)))


def complete(n):
    return UndirectedGraph(n, tuple((i, j) for i in range(n) for j in range(i + 1, n)))


def isolated(n):
    return UndirectedGraph(n, ())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, printed after the run
CRITERIA: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in sorted(CRITERIA, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
