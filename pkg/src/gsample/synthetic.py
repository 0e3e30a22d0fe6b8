"""Small deterministic graph generators for tests and experiment scripts."""

from __future__ import annotations

import numpy as np

from .graph import CsrGraph


def path_graph(n: int) -> CsrGraph:
    v = np.arange(n - 1)
    return CsrGraph.from_edges(v, v + 1, vertex_count=n, directed=False)


def cycle_graph(n: int) -> CsrGraph:
    v = np.arange(n)
    return CsrGraph.from_edges(v, (v + 1) % n, vertex_count=n, directed=False)


def star_graph(leaves: int) -> CsrGraph:
    v = np.arange(1, leaves + 1)
    return CsrGraph.from_edges(np.zeros(leaves, dtype=np.int64), v, vertex_count=leaves + 1, directed=False)


def complete_graph(n: int) -> CsrGraph:
    u, v = np.triu_indices(n, 1)
    return CsrGraph.from_edges(u, v, vertex_count=n, directed=False)


def toy_graph() -> CsrGraph:
    """Twelve-vertex graph whose vertex 8 has neighbors 5, 7, 9, 10, 11 of degrees 3, 6, 2, 2, 2."""
    edges = [(8, 5), (8, 7), (8, 9), (8, 10), (8, 11),
             (7, 0), (7, 1), (7, 2), (7, 3), (7, 4),
             (5, 4), (5, 6), (9, 10), (11, 6)]
    src, dst = np.array(edges).T
    return CsrGraph.from_edges(src, dst, vertex_count=12, directed=False)


def power_law_graph(n: int, m: int, exponent: float = 2.1, seed: int = 0, weighted: bool = False) -> CsrGraph:
    """Chung-Lu style undirected graph with about ``m`` edges and a heavy-tailed degree profile.

    Endpoints are drawn proportionally to weights ``(i + 1) ** (-1 / (exponent - 1))``;
    self-loops are dropped, parallel edges are kept.
    """
    rng = np.random.default_rng(seed)
    w = (np.arange(n, dtype=np.float64) + 1.0) ** (-1.0 / (exponent - 1.0))
    cdf = np.cumsum(w)
    cdf /= cdf[-1]
    src = np.minimum(np.searchsorted(cdf, rng.random(m), side="right"), n - 1)
    dst = np.minimum(np.searchsorted(cdf, rng.random(m), side="right"), n - 1)
    perm = rng.permutation(n)  # spread hubs over vertex ranges
    src, dst = perm[src], perm[dst]
    keep = src != dst
    src, dst = src[keep], dst[keep]
    weights = rng.uniform(0.5, 2.0, src.size) if weighted else None
    return CsrGraph.from_edges(src, dst, weights, vertex_count=n, directed=False)


def erdos_renyi_graph(n: int, m: int, seed: int = 0) -> CsrGraph:
    rng = np.random.default_rng(seed)
    src = rng.integers(0, n, m)
    dst = rng.integers(0, n, m)
    keep = src != dst
    return CsrGraph.from_edges(src[keep], dst[keep], vertex_count=n, directed=False)
