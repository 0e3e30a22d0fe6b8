"""CSR graph storage, edge-list ingestion and vertex-range partitioning."""

from __future__ import annotations

import struct
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

CACHE_MAGIC = b"CSAW"
CACHE_VERSION = 1
_HEADER = struct.Struct("<4sIQQB")


class GraphFormatError(ValueError):
    """Malformed edge-list input; carries the offending 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True, eq=False)
class CsrGraph:
    """Immutable compressed-sparse-row adjacency.

    ``row_offsets`` has ``vertex_count + 1`` entries and ``col_indices`` holds
    the neighbor list of every vertex, sorted ascending. ``weights`` is
    ``None`` for unweighted graphs; :attr:`edge_weights` always returns an
    array (ones when absent).
    """

    row_offsets: np.ndarray
    col_indices: np.ndarray
    weights: np.ndarray | None = None

    def __post_init__(self):
        ro = np.ascontiguousarray(self.row_offsets, dtype=np.int64)
        col = np.ascontiguousarray(self.col_indices, dtype=np.int64)
        object.__setattr__(self, "row_offsets", ro)
        object.__setattr__(self, "col_indices", col)
        if ro.ndim != 1 or ro.size == 0:
            raise ValueError("row_offsets must be a non-empty 1-D array")
        if ro[0] != 0 or ro[-1] != col.size:
            raise ValueError("row_offsets must start at 0 and end at edge_count")
        if np.any(np.diff(ro) < 0):
            raise ValueError("row_offsets must be non-decreasing")
        if col.size and (col.min() < 0 or col.max() >= ro.size - 1):
            raise ValueError("col_indices out of range")
        if self.weights is not None:
            w = np.ascontiguousarray(self.weights, dtype=np.float64)
            if w.shape != col.shape:
                raise ValueError("weights must match col_indices in length")
            if not np.all(np.isfinite(w)) or np.any(w < 0):
                raise ValueError("weights must be finite and non-negative")
            object.__setattr__(self, "weights", w)
        for arr in (self.row_offsets, self.col_indices, self.weights):
            if arr is not None:
                arr.flags.writeable = False

    @property
    def vertex_count(self) -> int:
        return self.row_offsets.size - 1

    @property
    def edge_count(self) -> int:
        return self.col_indices.size

    @cached_property
    def degrees(self) -> np.ndarray:
        d = np.diff(self.row_offsets)
        d.flags.writeable = False
        return d

    @cached_property
    def edge_weights(self) -> np.ndarray:
        if self.weights is not None:
            return self.weights
        w = np.ones(self.edge_count)
        w.flags.writeable = False
        return w

    @cached_property
    def _edge_keys(self) -> np.ndarray:
        # rows are sorted, so source*V + target is globally sorted
        src = np.repeat(np.arange(self.vertex_count, dtype=np.int64), self.degrees)
        return src * self.vertex_count + self.col_indices

    def degree(self, v: int) -> int:
        self._check_vertex(v)
        return int(self.row_offsets[v + 1] - self.row_offsets[v])

    def neighbors(self, v: int) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(targets, weights)`` of the contiguous neighbor run of ``v``."""
        self._check_vertex(v)
        lo, hi = self.row_offsets[v], self.row_offsets[v + 1]
        return self.col_indices[lo:hi], self.edge_weights[lo:hi]

    def has_edge(self, u, v) -> np.ndarray | bool:
        """Vectorized adjacency test by binary search over sorted rows."""
        u = np.asarray(u, dtype=np.int64)
        v = np.asarray(v, dtype=np.int64)
        keys = u * self.vertex_count + v
        pos = np.searchsorted(self._edge_keys, keys)
        pos = np.minimum(pos, max(self.edge_count - 1, 0))
        hit = (self.edge_count > 0) & (self._edge_keys[pos] == keys) & (u >= 0) & (v >= 0)
        return hit if hit.ndim else bool(hit)

    def _check_vertex(self, v):
        if not 0 <= v < self.vertex_count:
            raise IndexError(f"vertex {v} out of range [0, {self.vertex_count})")

    @classmethod
    def from_edges(cls, src, dst, weights=None, vertex_count=None, directed=True) -> "CsrGraph":
        """Build a CSR graph from endpoint arrays whose ids are already dense."""
        src = np.asarray(src, dtype=np.int64).ravel()
        dst = np.asarray(dst, dtype=np.int64).ravel()
        if src.shape != dst.shape:
            raise ValueError("src and dst must have equal length")
        w = None if weights is None else np.asarray(weights, dtype=np.float64).ravel()
        if w is not None and (not np.all(np.isfinite(w)) or np.any(w < 0)):
            raise ValueError("weights must be finite and non-negative")
        if vertex_count is None:
            vertex_count = int(max(src.max(initial=-1), dst.max(initial=-1)) + 1)
        if not directed:
            # self-loops are materialized once
            back = src != dst
            src, dst = np.concatenate([src, dst[back]]), np.concatenate([dst, src[back]])
            if w is not None:
                w = np.concatenate([w, w[back]])
        order = np.lexsort((dst, src))
        src, dst = src[order], dst[order]
        if w is not None:
            w = w[order]
        counts = np.bincount(src, minlength=vertex_count)
        row_offsets = np.zeros(vertex_count + 1, dtype=np.int64)
        np.cumsum(counts, out=row_offsets[1:])
        return cls(row_offsets, dst, w)


def load_edge_list(path, directed: bool = False) -> CsrGraph:
    """Parse a whitespace-separated ``u v [w]`` file into a CsrGraph.

    Vertex ids are compacted to ``[0, vertex_count)`` preserving their
    numeric order. Lines starting with ``#`` or ``%`` are skipped.
    """
    src, dst, wts = [], [], []
    weighted = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text[0] in "#%":
                continue
            parts = text.split()
            if len(parts) not in (2, 3):
                raise GraphFormatError(f"expected 'u v [w]', got {text!r}", lineno)
            if weighted is None:
                weighted = len(parts) == 3
            elif weighted != (len(parts) == 3):
                raise GraphFormatError("inconsistent column count", lineno)
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise GraphFormatError(f"non-integer vertex id in {text!r}", lineno) from None
            if u < 0 or v < 0:
                raise GraphFormatError("negative vertex id", lineno)
            src.append(u)
            dst.append(v)
            if weighted:
                try:
                    w = float(parts[2])
                except ValueError:
                    raise GraphFormatError(f"bad weight {parts[2]!r}", lineno) from None
                if not np.isfinite(w):
                    raise GraphFormatError("non-finite weight", lineno)
                if w < 0:
                    raise ValueError(f"line {lineno}: negative weight {w}")
                wts.append(w)
    src = np.asarray(src, dtype=np.int64)
    dst = np.asarray(dst, dtype=np.int64)
    ids, inverse = np.unique(np.concatenate([src, dst]), return_inverse=True)
    inverse = inverse.reshape(-1)
    return CsrGraph.from_edges(
        inverse[: src.size],
        inverse[src.size:],
        np.asarray(wts) if weighted else None,
        vertex_count=ids.size,
        directed=directed,
    )


def save_edge_list(graph: CsrGraph, path) -> None:
    """Write every CSR edge as a line; reload with ``directed=True``."""
    src = np.repeat(np.arange(graph.vertex_count), graph.degrees)
    with open(path, "w", encoding="utf-8") as fh:
        if graph.weights is None:
            for u, v in zip(src.tolist(), graph.col_indices.tolist()):
                fh.write(f"{u} {v}\n")
        else:
            for u, v, w in zip(src.tolist(), graph.col_indices.tolist(), graph.weights.tolist()):
                fh.write(f"{u} {v} {w!r}\n")


def save_binary(graph: CsrGraph, path) -> None:
    """Write the versioned little-endian binary cache."""
    weighted = graph.weights is not None
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(CACHE_MAGIC, CACHE_VERSION, graph.vertex_count, graph.edge_count, int(weighted)))
        fh.write(graph.row_offsets.astype("<u8").tobytes())
        fh.write(graph.col_indices.astype("<u4").tobytes())
        if weighted:
            fh.write(graph.weights.astype("<f4").tobytes())


def load_binary(path) -> CsrGraph:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise GraphFormatError("truncated binary cache header")
    magic, version, n, m, weighted = _HEADER.unpack_from(data)
    if magic != CACHE_MAGIC:
        raise GraphFormatError(f"bad magic {magic!r}")
    if version != CACHE_VERSION:
        raise GraphFormatError(f"unsupported cache version {version}")
    expect = _HEADER.size + 8 * (n + 1) + 4 * m + (4 * m if weighted else 0)
    if len(data) != expect:
        raise GraphFormatError(f"cache size {len(data)} != expected {expect}")
    off = _HEADER.size
    ro = np.frombuffer(data, "<u8", n + 1, off).astype(np.int64)
    off += 8 * (n + 1)
    col = np.frombuffer(data, "<u4", m, off).astype(np.int64)
    off += 4 * m
    w = np.frombuffer(data, "<f4", m, off).astype(np.float64) if weighted else None
    return CsrGraph(ro, col, w)


def load_graph(path, directed: bool = False) -> CsrGraph:
    """Load either a binary cache (by magic) or a text edge list."""
    with open(path, "rb") as fh:
        head = fh.read(4)
    if head == CACHE_MAGIC:
        return load_binary(path)
    return load_edge_list(path, directed=directed)


@dataclass(frozen=True, eq=False)
class PartitionSet:
    """Contiguous vertex ranges; partition ``p`` owns ``[boundaries[p], boundaries[p+1])``."""

    boundaries: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.boundaries, dtype=np.int64)
        if b.ndim != 1 or b.size < 2 or b[0] != 0 or np.any(np.diff(b) <= 0):
            raise ValueError("boundaries must be strictly increasing from 0")
        object.__setattr__(self, "boundaries", b)

    @property
    def partition_count(self) -> int:
        return self.boundaries.size - 1

    @property
    def vertex_count(self) -> int:
        return int(self.boundaries[-1])

    @cached_property
    def _regime(self):
        n, p = self.vertex_count, self.partition_count
        q, rem = divmod(n, p)
        expected = np.concatenate([[0], np.cumsum([q + 1] * rem + [q] * (p - rem))])
        if np.array_equal(expected, self.boundaries):
            return q, rem
        return None

    def owner(self, v):
        """Partition id owning ``v``; O(1) for the equal-split layout."""
        v = np.asarray(v, dtype=np.int64)
        if np.any((v < 0) | (v >= self.vertex_count)):
            raise IndexError("vertex out of range")
        regime = self._regime
        if regime is None:
            out = np.searchsorted(self.boundaries, v, side="right") - 1
        else:
            q, rem = regime
            cut = rem * (q + 1)
            out = np.where(v < cut, v // (q + 1), rem + (v - cut) // max(q, 1))
        return out if out.ndim else int(out)

    def range(self, p: int) -> tuple[int, int]:
        return int(self.boundaries[p]), int(self.boundaries[p + 1])

    def active_counts(self, vertices) -> np.ndarray:
        """Number of frontier vertices falling into each partition."""
        return np.bincount(np.atleast_1d(self.owner(vertices)), minlength=self.partition_count)


def partition(graph: CsrGraph, p: int) -> PartitionSet:
    """Split vertices into ``p`` contiguous ranges, remainder to the lowest ids."""
    n = graph.vertex_count
    if not 1 <= p <= n:
        raise ValueError(f"partition count {p} must be in [1, {n}]")
    q, rem = divmod(n, p)
    sizes = [q + 1] * rem + [q] * (p - rem)
    return PartitionSet(np.concatenate([[0], np.cumsum(sizes)]))


class PartitionView:
    """A copied CSR slice of one partition, standing in for a device-resident copy."""

    def __init__(self, graph: CsrGraph, lo: int, hi: int):
        self.graph = graph
        self.lo, self.hi = lo, hi
        self.edge_base = int(graph.row_offsets[lo])
        end = int(graph.row_offsets[hi])
        self.row_offsets = graph.row_offsets[lo: hi + 1] - self.edge_base
        self.col_indices = graph.col_indices[self.edge_base: end].copy()
        self.weights = graph.edge_weights[self.edge_base: end].copy()

    @property
    def nbytes(self) -> int:
        return self.row_offsets.nbytes + self.col_indices.nbytes + self.weights.nbytes

    def bounds(self, vertices: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        if vertices.size and (vertices.min() < self.lo or vertices.max() >= self.hi):
            raise IndexError("vertex not owned by this partition")
        local = vertices - self.lo
        return self.row_offsets[local], self.row_offsets[local + 1]


class FullView:
    """Whole-graph adjacency with the same interface as :class:`PartitionView`."""

    edge_base = 0
    lo = 0

    def __init__(self, graph: CsrGraph):
        self.graph = graph
        self.row_offsets = graph.row_offsets
        self.col_indices = graph.col_indices
        self.weights = graph.edge_weights

    def bounds(self, vertices: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return self.row_offsets[vertices], self.row_offsets[vertices + 1]
