"""Bias-centric sampling loop.

Users describe an algorithm with three callbacks (see :class:`BiasSpec`):
``vertex_bias`` scores the frontier pool, ``edge_bias`` scores gathered
neighbor candidates and ``update`` decides what enters the next frontier.
All callbacks are vectorized: they receive a batch of rows spanning many
instances and return one value per row.

The loop is level-synchronous per instance. Candidate pools at level ``d``
are filtered against the instance's visited set as of the start of ``d``;
same-level duplicates are resolved at commit in canonical
``(instance, position, draw)`` order. Every random number comes from a
stream keyed by ``(seed, instance, level, slot)``, which makes the result
independent of how entries are batched or scheduled. The out-of-memory
executor reuses :func:`expand` and :func:`commit` unchanged.
"""

from __future__ import annotations

import weakref
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from .graph import CsrGraph, FullView
from .kernels import build_row_tables, draw_from_tables, run_select_segments
from .rng import instance_rng, stream_key, uniform_at
from .select import STRATEGIES, WITH, WITHOUT

__all__ = [
    "BiasSpec",
    "EdgeBatch",
    "FrontierEntry",
    "Kind",
    "RunStats",
    "SampleOutput",
    "SamplingConfig",
    "Update",
    "gather_neighbors",
    "instance_rng",
    "run",
]

SLOT_SELECT, SLOT_UPDATE, SLOT_COUNT, SLOT_FRONTIER = 0, 1, 2, 3
SLOTS_PER_ENTRY = 4
DRAWS_PER_PICK = 4
# candidate rows gathered per expand chunk; bounds memory on hub-heavy frontiers
MAX_GATHER = 1 << 21


class Kind(IntEnum):
    """Record tag: a real graph edge or a walk event that is not an edge."""

    EDGE = 0
    STAY = 1
    JUMP = 2
    RESTART = 3


NeighborRule = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class SamplingConfig:
    """Loop parameters.

    ``neighbor_size`` is a constant, ``None`` (take the whole pool) or a rule
    ``f(pool_sizes, uniforms) -> counts`` evaluated per selection pool.
    ``frontier_size=None`` passes the whole frontier pool through.
    ``pool_scope="layer"`` merges the candidates of all frontier vertices of
    an instance into one pool per level.
    """

    depth: int = 2
    neighbor_size: int | NeighborRule | None = 2
    frontier_size: int | None = None
    instances: int = 1
    mode: str = WITHOUT
    seed: int = 0
    pool_scope: str = "vertex"
    strategy: str = "brs"

    def __post_init__(self):
        if self.depth < 1:
            raise ValueError("depth must be >= 1")
        if self.instances < 1:
            raise ValueError("instances must be >= 1")
        if self.frontier_size is not None and self.frontier_size < 1:
            raise ValueError("frontier_size must be >= 1")
        if isinstance(self.neighbor_size, (int, np.integer)) and self.neighbor_size < 0:
            raise ValueError("neighbor_size must be >= 0")
        if self.mode not in (WITH, WITHOUT):
            raise ValueError(f"mode must be {WITH!r} or {WITHOUT!r}")
        if self.pool_scope not in ("vertex", "layer"):
            raise ValueError("pool_scope must be 'vertex' or 'layer'")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"strategy must be one of {STRATEGIES}")


@dataclass(frozen=True, eq=False)
class EdgeBatch:
    """Edge contexts ``e = (source, target)`` plus per-instance state."""

    graph: CsrGraph
    source: np.ndarray
    target: np.ndarray
    weight: np.ndarray
    edge: np.ndarray
    previous: np.ndarray
    instance: np.ndarray
    depth: np.ndarray
    anchor: np.ndarray

    def __len__(self):
        return self.source.size

    @property
    def source_degree(self) -> np.ndarray:
        return self.graph.degrees[self.source]

    @property
    def target_degree(self) -> np.ndarray:
        return self.graph.degrees[self.target]

    def take(self, idx) -> "EdgeBatch":
        return EdgeBatch(
            self.graph, self.source[idx], self.target[idx], self.weight[idx], self.edge[idx],
            self.previous[idx], self.instance[idx], self.depth[idx], self.anchor[idx],
        )


@dataclass(frozen=True, eq=False)
class Update:
    """Result of the update callback: next frontier vertex (-1 for none) and record kind."""

    vertex: np.ndarray
    kind: np.ndarray | int = Kind.EDGE


def uniform_edge_bias(batch: EdgeBatch) -> np.ndarray:
    return np.ones(len(batch))


def uniform_vertex_bias(graph: CsrGraph, vertices: np.ndarray) -> np.ndarray:
    return np.ones(vertices.size)


def follow_target(batch: EdgeBatch, draw) -> Update:
    return Update(batch.target.copy())


@dataclass(frozen=True)
class BiasSpec:
    """``vertex_bias(graph, vertices)``, ``edge_bias(batch)``, ``update(batch, draw)``.

    ``draw(c)`` returns the ``c``-th keyed uniform (``c < 4``) for every row
    of the batch handed to ``update``.

    Set ``static_edge_bias`` when ``edge_bias`` is elementwise and reads only
    the edge itself (source, target, weight, degrees), never instance state.
    With-replacement draws then search per-row tables built once per view
    instead of rebuilding each pool; the picks are identical either way.
    """

    edge_bias: Callable[[EdgeBatch], np.ndarray] = uniform_edge_bias
    vertex_bias: Callable[[CsrGraph, np.ndarray], np.ndarray] = uniform_vertex_bias
    update: Callable[[EdgeBatch, Callable[[int], np.ndarray]], Update] = follow_target
    static_edge_bias: bool = False


@dataclass(frozen=True)
class FrontierEntry:
    vertex: int
    instance: int
    depth: int


@dataclass(eq=False)
class SampleOutput:
    """Records of one instance in generation order."""

    instance: int
    source: np.ndarray
    target: np.ndarray
    depth: np.ndarray
    kind: np.ndarray

    def __len__(self):
        return self.source.size

    @property
    def edges(self) -> np.ndarray:
        """``(source, target, depth)`` rows of real edges only."""
        m = self.kind == Kind.EDGE
        return np.stack([self.source[m], self.target[m], self.depth[m]], axis=1)

    @property
    def edge_count(self) -> int:
        return int(np.count_nonzero(self.kind == Kind.EDGE))

    def tobytes(self) -> bytes:
        return b"".join(a.tobytes() for a in (self.source, self.target, self.depth, self.kind))


@dataclass
class RunStats:
    retries: int = 0
    picks: int = 0
    levels: int = 0


@dataclass(eq=False)
class Entries:
    """Struct-of-arrays frontier entries (VertexID, InstanceID, CurrDepth, ...)."""

    vertex: np.ndarray
    instance: np.ndarray
    depth: np.ndarray
    pos: np.ndarray
    prev: np.ndarray
    anchor: np.ndarray

    @classmethod
    def empty(cls) -> "Entries":
        z = np.empty(0, dtype=np.int64)
        return cls(z, z, z, z, z, z)

    def __len__(self):
        return self.vertex.size

    def take(self, idx) -> "Entries":
        return Entries(*(getattr(self, f)[idx] for f in _ENTRY_FIELDS))

    @classmethod
    def concat(cls, parts: Sequence["Entries"]) -> "Entries":
        parts = [p for p in parts if len(p)]
        if not parts:
            return cls.empty()
        return cls(*(np.concatenate([getattr(p, f) for p in parts]) for f in _ENTRY_FIELDS))

    def as_tuples(self) -> list[FrontierEntry]:
        return [FrontierEntry(int(v), int(i), int(d)) for v, i, d in zip(self.vertex, self.instance, self.depth)]


_ENTRY_FIELDS = ("vertex", "instance", "depth", "pos", "prev", "anchor")


class VisitedSet:
    """Per-instance membership stored as sorted ``instance * V + vertex`` keys."""

    def __init__(self, vertex_count: int):
        self.vertex_count = vertex_count
        self.keys = np.empty(0, dtype=np.int64)

    def _key(self, instance, vertex):
        return np.asarray(instance, dtype=np.int64) * self.vertex_count + np.asarray(vertex, dtype=np.int64)

    def contains(self, instance, vertex) -> np.ndarray:
        k = self._key(instance, vertex)
        if self.keys.size == 0:
            return np.zeros(k.shape, dtype=bool)
        pos = np.minimum(np.searchsorted(self.keys, k), self.keys.size - 1)
        return self.keys[pos] == k

    def add(self, instance, vertex) -> None:
        k = self._key(instance, vertex)
        if k.size:
            self.keys = np.union1d(self.keys, k)

    def __len__(self):
        return self.keys.size


@dataclass(eq=False)
class Raw:
    """Unordered selection results of a batch of frontier entries."""

    instance: np.ndarray
    pos: np.ndarray
    draw: np.ndarray
    source: np.ndarray
    target: np.ndarray
    vertex: np.ndarray
    kind: np.ndarray
    depth: np.ndarray
    prev: np.ndarray
    anchor: np.ndarray

    @classmethod
    def empty(cls) -> "Raw":
        z = np.empty(0, dtype=np.int64)
        return cls(z, z, z, z, z, z, z, z, z, z)

    def __len__(self):
        return self.instance.size

    def take(self, idx) -> "Raw":
        return Raw(*(getattr(self, f)[idx] for f in _RAW_FIELDS))

    @classmethod
    def concat(cls, parts: Sequence["Raw"]) -> "Raw":
        parts = [p for p in parts if len(p)]
        if not parts:
            return cls.empty()
        return cls(*(np.concatenate([getattr(p, f) for p in parts]) for f in _RAW_FIELDS))


_RAW_FIELDS = ("instance", "pos", "draw", "source", "target", "vertex", "kind", "depth", "prev", "anchor")


@dataclass(eq=False)
class Records:
    instance: np.ndarray
    source: np.ndarray
    target: np.ndarray
    depth: np.ndarray
    kind: np.ndarray


def _segment_offsets(seg: np.ndarray, nseg: int) -> np.ndarray:
    off = np.zeros(nseg + 1, dtype=np.int64)
    np.cumsum(np.bincount(seg, minlength=nseg), out=off[1:])
    return off


def _edge_batch(graph: CsrGraph, view, entries: Entries, owner: np.ndarray, local: np.ndarray,
                target: np.ndarray | None = None) -> EdgeBatch:
    return EdgeBatch(
        graph,
        entries.vertex[owner],
        view.col_indices[local] if target is None else target,
        view.weights[local],
        local + view.edge_base,
        entries.prev[owner],
        entries.instance[owner],
        entries.depth[owner],
        entries.anchor[owner],
    )


def _gather(graph: CsrGraph, view, entries: Entries, visited: VisitedSet | None):
    """Candidate edges of every entry; returns (entry index per candidate, EdgeBatch)."""
    starts, ends = view.bounds(entries.vertex)
    lens = ends - starts
    total = int(lens.sum())
    owner = np.repeat(np.arange(len(entries), dtype=np.int64), lens)
    first = np.zeros(len(entries), dtype=np.int64)
    if len(entries):
        np.cumsum(lens[:-1], out=first[1:])
    local = np.arange(total, dtype=np.int64) + np.repeat(starts - first, lens)
    target = view.col_indices[local]
    if visited is not None and total:
        keep = ~visited.contains(entries.instance[owner], target)
        owner, local, target = owner[keep], local[keep], target[keep]
    return owner, _edge_batch(graph, view, entries, owner, local, target)


_ROW_TABLES: "weakref.WeakKeyDictionary" = weakref.WeakKeyDictionary()


def _row_tables(graph: CsrGraph, view, spec: BiasSpec):
    """Per-row cumulative tables of a static edge bias over ``view``, cached per view."""
    per_view = _ROW_TABLES.setdefault(view, {})
    hit = per_view.get(spec.edge_bias)
    if hit is not None:
        return hit
    rows = view.row_offsets.size - 1
    owner_vertex = np.repeat(np.arange(view.lo, view.lo + rows, dtype=np.int64), np.diff(view.row_offsets))
    biases = np.empty(view.col_indices.size)
    for a in range(0, biases.size, MAX_GATHER):
        idx = np.arange(a, min(a + MAX_GATHER, biases.size), dtype=np.int64)
        minus = np.full(idx.size, -1, dtype=np.int64)
        batch = EdgeBatch(graph, owner_vertex[idx], view.col_indices[idx], view.weights[idx],
                          idx + view.edge_base, minus, minus, np.zeros(idx.size, dtype=np.int64), minus)
        biases[idx] = _check_biases(spec.edge_bias(batch), idx.size, "edge_bias")
    local_offsets = np.ascontiguousarray(view.row_offsets - view.row_offsets[0])
    hit = build_row_tables(local_offsets, biases)
    per_view[spec.edge_bias] = hit
    return hit


def gather_neighbors(graph: CsrGraph, frontier, visited=(), filter: bool = False) -> EdgeBatch:
    """Concatenated edge contexts of ``frontier`` for a single instance.

    With ``filter`` set, candidates whose target is in ``visited`` are dropped.
    """
    frontier = np.asarray(frontier, dtype=np.int64).ravel()
    if frontier.size and (frontier.min() < 0 or frontier.max() >= graph.vertex_count):
        raise IndexError("frontier vertex out of range")
    z = np.zeros(frontier.size, dtype=np.int64)
    entries = Entries(frontier, z, z, np.arange(frontier.size), z - 1, z)
    vs = None
    if filter:
        vs = VisitedSet(graph.vertex_count)
        vs.add(np.zeros(len(visited), dtype=np.int64), np.asarray(list(visited), dtype=np.int64))
    return _gather(graph, FullView(graph), entries, vs)[1]


def _check_biases(values, n: int, what: str) -> np.ndarray:
    b = np.asarray(values, dtype=np.float64)
    if b.ndim == 0:
        b = np.full(n, float(b))
    if b.shape != (n,):
        raise ValueError(f"{what} returned shape {b.shape}, expected ({n},)")
    if not np.all(np.isfinite(b)) or np.any(b < 0):
        raise ValueError(f"{what} returned a negative or non-finite bias")
    return b


def _clamp_counts(ks, lens, positive, mode):
    ks = np.asarray(ks, dtype=np.int64)
    if mode == WITHOUT:
        return np.where(ks >= lens, lens, np.minimum(ks, positive))
    return np.where(positive > 0, ks, 0)


def expand(graph: CsrGraph, view, entries: Entries, config: SamplingConfig, spec: BiasSpec,
           visited: VisitedSet | None, stats: RunStats | None = None) -> Raw:
    """Gather, score and select neighbors for a batch of frontier entries.

    Entries may mix instances and levels. ``visited`` must hold the state as
    of the start of each entry's level (``None`` for walks).
    """
    if not len(entries):
        return Raw.empty()
    if config.mode == WITH and config.pool_scope == "vertex" and spec.static_edge_bias:
        return _expand_static(graph, view, entries, config, spec, stats)
    if config.pool_scope == "vertex" and len(entries) > 1:
        starts, ends = view.bounds(entries.vertex)
        edges_before = np.cumsum(ends - starts)
        if edges_before[-1] > MAX_GATHER:
            # pools are independent, so splitting between entries changes nothing
            cuts = np.flatnonzero(np.diff(edges_before // MAX_GATHER)) + 1
            parts = np.split(np.arange(len(entries)), cuts)
            if len(parts) > 1:
                return Raw.concat([expand(graph, view, entries.take(p), config, spec, visited, stats)
                                   for p in parts])
    owner, batch = _gather(graph, view, entries, visited if config.mode == WITHOUT else None)
    if config.pool_scope == "layer":
        # one pool per instance; its entries must be contiguous
        start = np.r_[True, entries.instance[1:] != entries.instance[:-1]]
        rep = np.flatnonzero(start)
        if np.unique(entries.instance[rep]).size != rep.size:
            raise ValueError("layer pools require entries grouped by instance")
        nseg = rep.size
        seg = (np.cumsum(start) - 1)[owner]
        seg_pos = np.zeros(nseg, dtype=np.int64)
    else:
        nseg = len(entries)
        seg = owner
        rep = np.arange(nseg)
        seg_pos = entries.pos
    seg_inst = entries.instance[rep]
    seg_depth = entries.depth[rep]
    offsets = _segment_offsets(seg, nseg)
    lens = np.diff(offsets)

    biases = _check_biases(spec.edge_bias(batch), len(batch), "edge_bias")
    positive = np.bincount(seg, weights=(biases > 0), minlength=nseg).astype(np.int64)

    ks = _neighbor_counts(config, seg_inst, seg_depth, seg_pos, lens, positive)

    keys = stream_key(config.seed, seg_inst, seg_depth, seg_pos * SLOTS_PER_ENTRY + SLOT_SELECT)
    picks, retries = run_select_segments(offsets, biases, ks, keys, config.mode == WITH, config.strategy)
    if stats is not None:
        stats.retries += int(retries.sum())
        stats.picks += int(picks.size)

    return _apply_update(graph, batch.take(picks), seg[picks], seg_pos, ks, entries.prev[owner[picks]], config, spec)


def _neighbor_counts(config: SamplingConfig, seg_inst, seg_depth, seg_pos, lens, positive):
    rule = config.neighbor_size
    if rule is None:
        ks = lens
    elif callable(rule):
        u = uniform_at(stream_key(config.seed, seg_inst, seg_depth, seg_pos * SLOTS_PER_ENTRY + SLOT_COUNT), 0)
        ks = np.asarray(rule(lens, u), dtype=np.int64)
        if ks.shape != lens.shape or np.any(ks < 0):
            raise ValueError("neighbor rule must return one non-negative count per pool")
    else:
        ks = np.full(lens.size, int(rule), dtype=np.int64)
    return _clamp_counts(ks, lens, positive, config.mode)


def _expand_static(graph, view, entries: Entries, config: SamplingConfig, spec: BiasSpec, stats) -> Raw:
    """With-replacement vertex pools searched in cached per-row tables."""
    table, row_positive = _row_tables(graph, view, spec)
    starts, ends = view.bounds(entries.vertex)
    lens = ends - starts
    local_row = entries.vertex - view.lo
    ks = _neighbor_counts(config, entries.instance, entries.depth, entries.pos, lens, row_positive[local_row])
    keys = stream_key(config.seed, entries.instance, entries.depth, entries.pos * SLOTS_PER_ENTRY + SLOT_SELECT)
    table_off = starts - view.row_offsets[0] + local_row
    idx = draw_from_tables(table, np.ascontiguousarray(table_off), np.ascontiguousarray(lens),
                           np.ascontiguousarray(ks), keys)
    owner = np.repeat(np.arange(len(entries), dtype=np.int64), ks)
    if stats is not None:
        stats.picks += int(idx.size)
    sel = _edge_batch(graph, view, entries, owner, starts[owner] + idx)
    return _apply_update(graph, sel, owner, entries.pos, ks, entries.prev[owner], config, spec)


def _apply_update(graph, sel: EdgeBatch, pick_seg, seg_pos, ks, prev, config: SamplingConfig,
                  spec: BiasSpec) -> Raw:
    """Run the update callback on selected edges (grouped by segment, in draw order)."""
    nseg = ks.size
    out_first = np.zeros(nseg, dtype=np.int64)
    np.cumsum(ks[:-1], out=out_first[1:])
    draw_idx = np.arange(len(sel), dtype=np.int64) - out_first[pick_seg]
    pos = seg_pos[pick_seg]
    upd_keys = stream_key(config.seed, sel.instance, sel.depth, pos * SLOTS_PER_ENTRY + SLOT_UPDATE)

    def draw(c: int) -> np.ndarray:
        if not 0 <= c < DRAWS_PER_PICK:
            raise ValueError(f"update may use draws 0..{DRAWS_PER_PICK - 1}")
        return uniform_at(upd_keys, draw_idx * DRAWS_PER_PICK + c)

    upd = spec.update(sel, draw)
    vertex = np.asarray(upd.vertex, dtype=np.int64).reshape(-1)
    kind = np.broadcast_to(np.asarray(upd.kind, dtype=np.int64), vertex.shape).copy()
    if vertex.shape != (len(sel),):
        raise ValueError("update must return one vertex per selected edge")
    if np.any((vertex < -1) | (vertex >= graph.vertex_count)):
        raise ValueError("update returned an out-of-range vertex")

    return Raw(
        instance=sel.instance,
        pos=pos,
        draw=draw_idx,
        source=sel.source,
        target=sel.target,
        vertex=vertex,
        kind=kind,
        depth=sel.depth,
        prev=prev,
        anchor=sel.anchor,
    )


def commit(raw: Raw, config: SamplingConfig, visited: VisitedSet | None, vertex_count: int):
    """Resolve one completed level for the instances present in ``raw``.

    Returns ``(records, next_entries)``; ``next_entries.pos`` is left as the
    canonical rank within each instance.
    """
    order = np.lexsort((raw.draw, raw.pos, raw.instance))
    r = raw.take(order)
    keep = np.ones(len(r), dtype=bool)
    is_edge = r.kind == Kind.EDGE
    if config.mode == WITHOUT and len(r):
        key = r.instance * vertex_count + r.target
        idx = np.flatnonzero(is_edge)
        _, first = np.unique(key[idx], return_index=True)
        dup = np.ones(idx.size, dtype=bool)
        dup[first] = False
        keep[idx[dup]] = False
        if visited is not None:
            keep[idx] &= ~visited.contains(r.instance[idx], r.target[idx])
    r = r.take(keep)
    is_edge = r.kind == Kind.EDGE
    target = np.where(is_edge, r.target, np.where(r.kind == Kind.STAY, r.source, r.vertex))
    records = Records(r.instance, r.source, target, r.depth + 1, r.kind)
    if config.mode == WITHOUT and visited is not None:
        visited.add(r.instance[is_edge], r.target[is_edge])

    grow = (r.vertex >= 0) & (r.depth + 1 < config.depth)
    nxt = r.take(grow)
    prev = np.where(nxt.kind == Kind.EDGE, nxt.source, np.where(nxt.kind == Kind.STAY, nxt.prev, -1))
    entries = Entries(nxt.vertex, nxt.instance, nxt.depth + 1, _rank_within(nxt.instance), prev, nxt.anchor)
    return records, entries


def _rank_within(instance: np.ndarray) -> np.ndarray:
    """Position of every row inside its (contiguous) instance group."""
    if instance.size == 0:
        return instance.copy()
    start = np.r_[True, instance[1:] != instance[:-1]]
    first = np.maximum.accumulate(np.where(start, np.arange(instance.size), 0))
    return np.arange(instance.size) - first


def _select_frontier(graph, pool: Entries, config: SamplingConfig, spec: BiasSpec, stats):
    """Pick ``frontier_size`` entries per instance by vertex bias; returns (frontier, carried)."""
    fs = config.frontier_size
    if fs is None or not len(pool):
        return pool, Entries.empty()
    starts = np.flatnonzero(np.r_[True, pool.instance[1:] != pool.instance[:-1]])
    offsets = np.r_[starts, len(pool)].astype(np.int64)
    lens = np.diff(offsets)
    if np.all(lens <= fs):
        return pool, Entries.empty()
    biases = _check_biases(spec.vertex_bias(graph, pool.vertex), len(pool), "vertex_bias")
    positive = np.add.reduceat(biases > 0, starts).astype(np.int64)
    ks = _clamp_counts(np.full(lens.size, fs), lens, positive, WITHOUT)
    keys = stream_key(config.seed, pool.instance[starts], pool.depth[starts], SLOT_FRONTIER)
    picks, retries = run_select_segments(offsets, biases, ks, keys, False, config.strategy)
    if stats is not None:
        stats.retries += int(retries.sum())
    chosen = np.zeros(len(pool), dtype=bool)
    chosen[picks] = True
    frontier = pool.take(picks)
    frontier.pos = _rank_within(frontier.instance)
    carried = pool.take(~chosen)
    return frontier, carried


def _merge_pools(carried: Entries, fresh: Entries) -> Entries:
    both = Entries.concat([carried, fresh])
    if not len(both):
        return both
    group = np.r_[np.zeros(len(carried), dtype=np.int64), np.ones(len(fresh), dtype=np.int64)]
    order = np.lexsort((np.arange(len(both)), group, both.instance))
    out = both.take(order)
    out.pos = _rank_within(out.instance)
    return out


def initial_entries(seeds, instance_ids, vertex_count: int) -> Entries:
    """Build level-0 entries; ``seeds[i]`` is a vertex or a sequence of vertices."""
    verts, insts, poss = [], [], []
    for inst, s in zip(instance_ids, seeds):
        s = np.atleast_1d(np.asarray(s, dtype=np.int64))
        if s.size == 0:
            raise ValueError(f"instance {inst} has an empty seed set")
        if s.min() < 0 or s.max() >= vertex_count:
            raise IndexError(f"seed of instance {inst} out of range")
        verts.append(s)
        insts.append(np.full(s.size, inst, dtype=np.int64))
        poss.append(np.arange(s.size, dtype=np.int64))
    if len(verts) != len(instance_ids):
        raise ValueError("need one seed set per instance")
    v = np.concatenate(verts)
    i = np.concatenate(insts)
    anchor = np.concatenate([np.full(x.size, x[0], dtype=np.int64) for x in verts])
    return Entries(v, i, np.zeros(v.size, dtype=np.int64), np.concatenate(poss), np.full(v.size, -1, dtype=np.int64), anchor)


def normalize_seeds(seeds, config: SamplingConfig, instance_ids=None):
    if instance_ids is None:
        instance_ids = np.arange(config.instances, dtype=np.int64)
    instance_ids = np.asarray(instance_ids, dtype=np.int64)
    seed_list = list(seeds)
    if len(seed_list) != instance_ids.size:
        raise ValueError(f"got {len(seed_list)} seed sets for {instance_ids.size} instances")
    return seed_list, instance_ids


def assemble(chunks: Sequence[Records], instance_ids) -> list[SampleOutput]:
    """Split accumulated records per instance, preserving generation order."""
    instance_ids = np.asarray(instance_ids, dtype=np.int64)
    if chunks:
        inst = np.concatenate([c.instance for c in chunks])
        cols = [np.concatenate([getattr(c, f) for c in chunks]) for f in ("source", "target", "depth", "kind")]
    else:
        inst = np.empty(0, dtype=np.int64)
        cols = [np.empty(0, dtype=np.int64)] * 4
    order = np.argsort(inst, kind="stable")
    inst = inst[order]
    src, tgt, dep, knd = (c[order] for c in cols)
    src, tgt = src.astype(np.int64), tgt.astype(np.int64)
    dep, knd = dep.astype(np.int32), knd.astype(np.int8)
    lo = np.searchsorted(inst, instance_ids, side="left")
    hi = np.searchsorted(inst, instance_ids, side="right")
    return [
        SampleOutput(int(i), src[a:b], tgt[a:b], dep[a:b], knd[a:b])
        for i, a, b in zip(instance_ids, lo, hi)
    ]


def run(graph: CsrGraph, config: SamplingConfig, spec: BiasSpec, seeds, instance_ids=None,
        stats: RunStats | None = None) -> list[SampleOutput]:
    """In-memory sampling of every instance; one :class:`SampleOutput` per instance.

    ``seeds[i]`` is the seed vertex (or seed vertices) of the ``i``-th instance.
    ``instance_ids`` defaults to ``range(config.instances)`` and keys the
    random streams, so a subset of instances reproduces exactly the output
    those instances have in a full run.
    """
    seed_list, instance_ids = normalize_seeds(seeds, config, instance_ids)
    pool = initial_entries(seed_list, instance_ids, graph.vertex_count)
    view = FullView(graph)
    visited = None
    if config.mode == WITHOUT:
        visited = VisitedSet(graph.vertex_count)
        visited.add(pool.instance, pool.vertex)
    chunks = []
    for _ in range(config.depth):
        if not len(pool):
            break
        frontier, carried = _select_frontier(graph, pool, config, spec, stats)
        raw = expand(graph, view, frontier, config, spec, visited, stats)
        records, fresh = commit(raw, config, visited, graph.vertex_count)
        chunks.append(records)
        carried.depth = carried.depth + 1
        pool = _merge_pools(carried, fresh)
        if stats is not None:
            stats.levels += 1
    return assemble(chunks, instance_ids)
