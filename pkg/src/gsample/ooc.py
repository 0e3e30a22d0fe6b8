"""Out-of-memory execution over vertex-range partitions.

Only a bounded number of partitions are resident at once. Frontier entries
live in per-partition queues and carry their instance id, so one drain
processes entries of many instances together. An instance's level is
committed (duplicates resolved, next entries routed to their owner queues)
once every entry of that level has been expanded, which keeps the output
identical to the in-memory loop whatever order partitions are drained in.
"""

from __future__ import annotations

import threading
from collections.abc import Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .framework import (
    BiasSpec,
    Entries,
    Raw,
    RunStats,
    SampleOutput,
    SamplingConfig,
    VisitedSet,
    assemble,
    commit,
    expand,
    initial_entries,
    normalize_seeds,
)
from .graph import CsrGraph, PartitionSet, PartitionView
from .select import WITHOUT

POLICIES = ("workload", "round-robin")


class SchedulingComplete(Exception):
    """Raised by :func:`schedule_step` when every queue is empty."""


class PartitionFrontierQueue:
    """Entries waiting on one partition; ``append`` is safe from any thread."""

    def __init__(self, partition: int):
        self.partition = partition
        self._chunks: list[Entries] = []
        self._size = 0
        self._lock = threading.Lock()

    def append(self, entries: Entries) -> None:
        if not len(entries):
            return
        with self._lock:
            self._chunks.append(entries)
            self._size += len(entries)

    def take_all(self) -> Entries:
        with self._lock:
            chunks, self._chunks, self._size = self._chunks, [], 0
        return Entries.concat(chunks)

    def peek(self) -> Entries:
        with self._lock:
            return Entries.concat(list(self._chunks))

    def __len__(self):
        return self._size


@dataclass
class ResidencyState:
    """Resident partitions, ordered by the step they were last activated."""

    budget: int
    last_activated: dict[int, int] = field(default_factory=dict)
    transfer_count: int = 0
    peak_resident: int = 0

    def __post_init__(self):
        if self.budget < 1:
            raise ValueError("budget must be >= 1")

    @property
    def resident(self) -> set[int]:
        return set(self.last_activated)

    def is_resident(self, p: int) -> bool:
        return p in self.last_activated

    def load(self, p: int, tick: int) -> None:
        if p in self.last_activated:
            raise ValueError(f"partition {p} already resident")
        if len(self.last_activated) >= self.budget:
            raise RuntimeError("residency budget exceeded")
        self.last_activated[p] = tick
        self.transfer_count += 1
        self.peak_resident = max(self.peak_resident, len(self.last_activated))

    def evict(self, p: int) -> None:
        del self.last_activated[p]

    def touch(self, p: int, tick: int) -> None:
        self.last_activated[p] = tick


@dataclass(frozen=True)
class WorkerAllocation:
    shares: dict[int, int]


def worker_shares(counts: dict[int, int], total_blocks: int | None = None) -> WorkerAllocation:
    """Shares proportional to ``counts``, each at least 1.

    With ``total_blocks`` the counts are scaled to roughly that many shares by
    largest remainder (raised if needed so every partition keeps one share).
    """
    if not counts:
        return WorkerAllocation({})
    if any(c < 1 for c in counts.values()):
        raise ValueError("scheduled partitions need a positive count")
    if total_blocks is None:
        return WorkerAllocation(dict(counts))
    total = sum(counts.values())
    c_min = min(counts.values())
    target = max(int(total_blocks), -(-total // c_min))
    exact = {p: c * target / total for p, c in counts.items()}
    shares = {p: int(v) for p, v in exact.items()}
    left = target - sum(shares.values())
    for p in sorted(exact, key=lambda p: (-(exact[p] - shares[p]), p))[:left]:
        shares[p] += 1
    return WorkerAllocation(shares)


def schedule_step(
    queues: Sequence[PartitionFrontierQueue],
    state: ResidencyState,
    policy: str = "workload",
    cursor: int = 0,
    tick: int = 0,
    total_blocks: int | None = None,
) -> tuple[list[int], WorkerAllocation]:
    """Choose up to ``budget`` partitions to drain next and make them resident.

    ``workload`` ranks non-empty queues by size (ties to the lower id). A
    candidate that is not resident is loaded into a free slot or in place of
    a resident whose queue is empty (least recently activated first); if
    neither exists it is skipped this step.

    ``round-robin`` is the unoptimized baseline: it walks non-empty queues
    cyclically from ``cursor`` and may evict any resident it did not pick.
    """
    if policy not in POLICIES:
        raise ValueError(f"policy must be one of {POLICIES}")
    counts = {q.partition: len(q) for q in queues if len(q)}
    if not counts:
        raise SchedulingComplete
    if policy == "workload":
        order = sorted(counts, key=lambda p: (-counts[p], p))
    else:
        n = len(queues)
        order = [p for p in ((cursor + i) % n for i in range(n)) if p in counts]

    active: list[int] = []
    for p in order:
        if len(active) == state.budget:
            break
        if not state.is_resident(p):
            if len(state.resident) >= state.budget:
                if policy == "workload":
                    idle = [r for r in state.resident if r not in counts and r not in active]
                else:
                    idle = [r for r in state.resident if r not in order[: state.budget] and r not in active]
                if not idle:
                    continue
                state.evict(min(idle, key=lambda r: (state.last_activated[r], r)))
            state.load(p, tick)
        state.touch(p, tick)
        active.append(p)
    assert len(state.resident) <= state.budget
    return active, worker_shares({p: counts[p] for p in active}, total_blocks)


@dataclass
class OocReport:
    outputs: list[SampleOutput]
    state: ResidencyState
    stats: RunStats
    waves: int
    schedule: list[tuple[int, ...]]


class OutOfMemoryRun:
    """Step-level driver; :func:`run_out_of_memory` runs it to completion."""

    def __init__(self, graph: CsrGraph, partitions: PartitionSet, config: SamplingConfig, spec: BiasSpec,
                 seeds, instance_ids=None, budget: int = 2, stream_count: int = 1,
                 policy: str = "workload", total_blocks: int | None = None):
        if config.pool_scope != "vertex" or config.frontier_size is not None:
            raise ValueError("out-of-memory mode needs per-vertex pools and no frontier selection")
        if partitions.vertex_count != graph.vertex_count:
            raise ValueError("partition set does not match the graph")
        if stream_count < 1:
            raise ValueError("stream_count must be >= 1")
        if policy not in POLICIES:
            raise ValueError(f"policy must be one of {POLICIES}")
        self.graph, self.partitions, self.config, self.spec = graph, partitions, config, spec
        self.stream_count = stream_count
        self.policy = policy
        self.total_blocks = total_blocks
        self.state = ResidencyState(budget)
        self.stats = RunStats()
        self.queues = [PartitionFrontierQueue(p) for p in range(partitions.partition_count)]
        self.views: dict[int, PartitionView] = {}
        self.schedule: list[tuple[int, ...]] = []
        self.last_allocation = WorkerAllocation({})
        self._cursor = 0
        self._tick = 0

        seed_list, ids = normalize_seeds(seeds, config, instance_ids)
        order = np.argsort(ids, kind="stable")
        self.instance_ids = ids
        self._sorted_ids = ids[order]
        if np.unique(ids).size != ids.size:
            raise ValueError("instance ids must be distinct")
        start = initial_entries(seed_list, ids, graph.vertex_count)
        self.visited = VisitedSet(graph.vertex_count) if config.mode == WITHOUT else None
        if self.visited is not None:
            self.visited.add(start.instance, start.vertex)
        self._pending = np.zeros(ids.size, dtype=np.int64)
        self._buffer = Raw.empty()
        self._chunks = []
        self._route(start)

    def _slot(self, instance) -> np.ndarray:
        return np.searchsorted(self._sorted_ids, instance)

    def _route(self, entries: Entries) -> None:
        if not len(entries):
            return
        np.add.at(self._pending, self._slot(entries.instance), 1)
        owner = self.partitions.owner(entries.vertex)
        for p in np.unique(owner):
            self.queues[int(p)].append(entries.take(owner == p))

    @property
    def done(self) -> bool:
        return not any(len(q) for q in self.queues)

    def schedule_next(self) -> list[int]:
        active, alloc = schedule_step(self.queues, self.state, self.policy, self._cursor, self._tick,
                                      self.total_blocks)
        self._tick += 1
        if self.policy == "round-robin":
            self._cursor = (active[-1] + 1) % len(self.queues)
        for p in list(self.views):
            if not self.state.is_resident(p):
                del self.views[p]
        for p in active:
            if p not in self.views:
                lo, hi = self.partitions.range(p)
                self.views[p] = PartitionView(self.graph, lo, hi)
        self.schedule.append(tuple(active))
        self.last_allocation = alloc
        return active

    def _expand(self, p: int, entries: Entries) -> tuple[Raw, RunStats]:
        local = RunStats()
        raw = expand(self.graph, self.views[p], entries, self.config, self.spec, self.visited, local)
        return raw, local

    def drain_wave(self, active: Iterable[int], until_empty: bool = True) -> None:
        """Drain ``active`` (resident) partitions.

        Each round snapshots every active queue, expands the snapshots (up to
        ``stream_count`` at once) and then commits serially. Rounds repeat
        until the active queues are empty, or run once with ``until_empty``
        off (the baseline's single pass per activation).
        """
        active = sorted(active)
        for p in active:
            if p not in self.views:
                raise RuntimeError(f"partition {p} is not resident")
        pool = ThreadPoolExecutor(self.stream_count) if self.stream_count > 1 and len(active) > 1 else None
        try:
            while True:
                work = [(p, self.queues[p].take_all()) for p in active]
                work = [(p, e) for p, e in work if len(e)]
                if not work:
                    break
                if pool is None:
                    results = [self._expand(p, e) for p, e in work]
                else:
                    results = list(pool.map(lambda pe: self._expand(*pe), work))
                for (_, entries), (raw, local) in zip(work, results):
                    self.stats.retries += local.retries
                    self.stats.picks += local.picks
                    np.subtract.at(self._pending, self._slot(entries.instance), 1)
                    self._buffer = Raw.concat([self._buffer, raw])
                self._commit_ready(np.unique(np.concatenate([e.instance for _, e in work])))
                if not until_empty:
                    break
        finally:
            if pool is not None:
                pool.shutdown()

    def drain_partition(self, p: int) -> None:
        self.drain_wave([p])

    def _commit_ready(self, touched: np.ndarray) -> None:
        ready = touched[self._pending[self._slot(touched)] == 0]
        if not ready.size:
            return
        mask = np.isin(self._buffer.instance, ready)
        raw = self._buffer.take(mask)
        self._buffer = self._buffer.take(~mask)
        records, nxt = commit(raw, self.config, self.visited, self.graph.vertex_count)
        self._chunks.append(records)
        self.stats.levels += 1
        self._route(nxt)

    def run(self) -> OocReport:
        waves = 0
        while not self.done:
            self.drain_wave(self.schedule_next(), until_empty=self.policy == "workload")
            waves += 1
        return OocReport(assemble(self._chunks, self.instance_ids), self.state, self.stats, waves, self.schedule)


def run_out_of_memory(graph: CsrGraph, partitions: PartitionSet, config: SamplingConfig, spec: BiasSpec,
                      seeds, budget: int = 2, stream_count: int = 1, policy: str = "workload",
                      instance_ids=None, total_blocks: int | None = None) -> OocReport:
    """Sample every instance with at most ``budget`` partitions resident."""
    return OutOfMemoryRun(graph, partitions, config, spec, seeds, instance_ids, budget, stream_count,
                          policy, total_blocks).run()


def split_instances(instances: int, workers: int) -> list[range]:
    """Contiguous ranges whose sizes differ by at most one, larger ones first."""
    if workers < 1:
        raise ValueError("workers must be >= 1")
    if instances < 0:
        raise ValueError("instances must be >= 0")
    base, extra = divmod(instances, workers)
    out, lo = [], 0
    for w in range(workers):
        hi = lo + base + (w < extra)
        out.append(range(lo, hi))
        lo = hi
    return out


def run_worker_groups(graph: CsrGraph, config: SamplingConfig, spec: BiasSpec, seeds, workers: int,
                      partitions: PartitionSet | None = None, budget: int = 2, stream_count: int = 1,
                      policy: str = "workload") -> tuple[list[SampleOutput], list[OocReport | RunStats]]:
    """Run disjoint instance groups independently and concatenate their outputs.

    ``partitions=None`` runs each group in memory.
    """
    from .framework import run

    seed_list = list(seeds)
    if len(seed_list) != config.instances:
        raise ValueError(f"got {len(seed_list)} seed sets for {config.instances} instances")
    outputs: list[SampleOutput] = []
    reports: list[OocReport | RunStats] = []
    for group in split_instances(config.instances, workers):
        if not len(group):
            continue
        ids = np.arange(group.start, group.stop, dtype=np.int64)
        group_seeds = seed_list[group.start:group.stop]
        if partitions is None:
            stats = RunStats()
            outputs.extend(run(graph, config, spec, group_seeds, ids, stats))
            reports.append(stats)
        else:
            rep = run_out_of_memory(graph, partitions, config, spec, group_seeds, budget, stream_count,
                                    policy, ids)
            outputs.extend(rep.outputs)
            reports.append(rep)
    return outputs, reports
