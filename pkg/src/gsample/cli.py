"""Command-line front end: ``gsample sample ...`` and ``gsample convert ...``."""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .algorithms import REGISTRY, AlgorithmDescriptor, make
from .framework import SampleOutput, SamplingConfig
from .graph import CsrGraph, GraphFormatError, load_edge_list, load_graph, partition, save_binary
from .ooc import OocReport, run_worker_groups
from .rng import instance_rng
from .select import STRATEGIES

FORMATS = ("edge-list-per-instance", "single-file-tagged")


class UsageError(Exception):
    pass


@dataclass
class RunReport:
    algorithm: str
    instances: int
    sampled_edges_total: int
    wall_time: float
    seps: float
    retries_total: int
    transfer_count: int | None = None
    per_instance_edges: list[int] = field(default_factory=list)

    @classmethod
    def build(cls, algorithm, outputs: list[SampleOutput], wall_time: float, retries: int,
              transfer_count: int | None) -> "RunReport":
        per = [o.edge_count for o in outputs]
        total = int(sum(per))
        wall_time = max(wall_time, 1e-9)
        return cls(algorithm, len(outputs), total, wall_time, total / wall_time, retries, transfer_count, per)

    def to_json(self) -> str:
        return json.dumps(asdict(self), separators=(",", ":"))

    def table(self) -> str:
        rows = [
            ("algorithm", self.algorithm),
            ("instances", self.instances),
            ("sampled edges", self.sampled_edges_total),
            ("wall time (s)", f"{self.wall_time:.4f}"),
            ("SEPS", f"{self.seps:.4g}"),
            ("retries", self.retries_total),
        ]
        if self.transfer_count is not None:
            rows.append(("partition transfers", self.transfer_count))
        if self.per_instance_edges:
            rows.append(("mean edges/instance", f"{np.mean(self.per_instance_edges):.2f}"))
        width = max(len(k) for k, _ in rows)
        return "\n".join(f"{k:<{width}}  {v}" for k, v in rows)


def write_output(outputs: list[SampleOutput], path, fmt: str = "single-file-tagged") -> list[Path]:
    """Write real edges only; returns the files written.

    ``edge-list-per-instance`` treats ``path`` as a directory and writes
    ``<instance>.txt`` with ``u v depth`` lines; ``single-file-tagged``
    writes ``instance u v depth`` lines to ``path``.
    """
    path = Path(path)
    if fmt == "edge-list-per-instance":
        path.mkdir(parents=True, exist_ok=True)
        written = []
        for out in outputs:
            f = path / f"{out.instance}.txt"
            f.write_text("".join(f"{u} {v} {d}\n" for u, v, d in out.edges.tolist()), encoding="utf-8")
            written.append(f)
        return written
    if fmt == "single-file-tagged":
        with open(path, "w", encoding="utf-8") as fh:
            for out in outputs:
                i = out.instance
                fh.write("".join(f"{i} {u} {v} {d}\n" for u, v, d in out.edges.tolist()))
        return [path]
    raise ValueError(f"unknown output format {fmt!r}")


def default_seeds(graph: CsrGraph, master_seed: int, instances: int, per_instance: int = 1) -> list:
    """Seeds of instance ``i`` drawn from ``instance_rng(master, i, 0, 0)`` over vertices with edges."""
    candidates = np.flatnonzero(graph.degrees > 0)
    if candidates.size == 0:
        raise ValueError("graph has no vertex with an outgoing edge")
    seeds = []
    for i in range(instances):
        u = np.atleast_1d(instance_rng(master_seed, i, 0, 0).random(per_instance))
        picks = candidates[np.minimum((u * candidates.size).astype(np.int64), candidates.size - 1)]
        seeds.append(int(picks[0]) if per_instance == 1 else picks)
    return seeds


def read_seeds(path, instances: int) -> list:
    """One line per instance, whitespace-separated vertex ids."""
    seeds = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            try:
                ids = [int(t) for t in text.split()]
            except ValueError:
                raise ValueError(f"{path}:{lineno}: seed ids must be integers") from None
            seeds.append(ids[0] if len(ids) == 1 else np.asarray(ids, dtype=np.int64))
    if len(seeds) != instances:
        raise ValueError(f"{path} lists {len(seeds)} seed sets for {instances} instances")
    return seeds


def _parse_params(items: list[str]) -> dict:
    params = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise UsageError(f"--param expects K=V, got {item!r}")
        for cast in (int, float):
            try:
                params[key] = cast(value)
                break
            except ValueError:
                continue
        else:
            params[key] = value
    return params


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gsample", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sample", help="sample subgraphs or random walks")
    s.add_argument("--graph", required=True, help="edge list or binary cache")
    s.add_argument("--directed", action="store_true")
    s.add_argument("--algorithm", required=True, choices=list(REGISTRY))
    s.add_argument("--param", action="append", default=[], metavar="K=V")
    s.add_argument("--instances", type=int, default=1)
    s.add_argument("--depth", type=int, default=2)
    s.add_argument("--neighbor-size", type=int, default=2)
    s.add_argument("--frontier-size", type=int, default=None,
                   help="frontier quota; for multi-rw the number of walkers per instance")
    s.add_argument("--walk-length", type=int, default=None, help="depth for walk algorithms")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--seeds-file")
    s.add_argument("--strategy", choices=STRATEGIES, default="brs")
    s.add_argument("--ooc", action="store_true", help="partitioned out-of-memory execution")
    s.add_argument("--partitions", type=int, default=4)
    s.add_argument("--memory-budget", type=int, default=2, help="max resident partitions")
    s.add_argument("--streams", type=int, default=2)
    s.add_argument("--policy", choices=("workload", "round-robin"), default="workload")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--output")
    s.add_argument("--output-format", choices=FORMATS, default="single-file-tagged")
    s.add_argument("--report", help="also write the JSON report here")
    s.add_argument("--table", action="store_true", help="print a readable summary to stderr")

    c = sub.add_parser("convert", help="write a binary CSR cache of an edge list")
    c.add_argument("input")
    c.add_argument("output")
    c.add_argument("--directed", action="store_true")
    return parser


def _descriptor(args) -> AlgorithmDescriptor:
    params = _parse_params(args.param)
    if args.algorithm == "multi-rw" and args.frontier_size is not None:
        params.setdefault("pool_size", args.frontier_size)
    try:
        return make(args.algorithm, **params)
    except TypeError as exc:
        raise UsageError(f"bad parameter for {args.algorithm}: {exc}") from None


def _sample(args) -> int:
    if args.workers < 1:
        raise UsageError("--workers must be >= 1")
    try:
        graph = load_graph(args.graph, directed=args.directed)
    except OSError as exc:
        raise UsageError(f"cannot read graph: {exc}") from None
    desc = _descriptor(args)
    depth = args.walk_length if (desc.walk and args.walk_length is not None) else args.depth
    frontier = None if args.algorithm == "multi-rw" else args.frontier_size
    config = desc.configure(depth=depth, neighbor_size=args.neighbor_size, frontier_size=frontier,
                            instances=args.instances, seed=args.seed, strategy=args.strategy)
    if args.seeds_file:
        try:
            seeds = read_seeds(args.seeds_file, args.instances)
        except OSError as exc:
            raise UsageError(f"cannot read seeds: {exc}") from None
    else:
        seeds = default_seeds(graph, args.seed, args.instances, desc.seeds_per_instance)

    parts = None
    if args.ooc:
        if not desc.ooc:
            raise ValueError(f"{desc.name} does not run out of memory")
        parts = partition(graph, args.partitions)

    t0 = time.perf_counter()
    outputs, reports = run_worker_groups(graph, config, desc.spec, seeds, args.workers, parts,
                                         args.memory_budget, args.streams, args.policy)
    wall = time.perf_counter() - t0

    if args.ooc:
        retries = sum(r.stats.retries for r in reports)
        transfers = sum(r.state.transfer_count for r in reports if isinstance(r, OocReport))
    else:
        retries = sum(r.retries for r in reports)
        transfers = None
    report = RunReport.build(desc.name, outputs, wall, retries, transfers)
    if args.output:
        write_output(outputs, args.output, args.output_format)
    line = report.to_json()
    print(line)
    if args.report:
        Path(args.report).write_text(line + "\n", encoding="utf-8")
    if args.table:
        print(report.table(), file=sys.stderr)
    return 0


def _convert(args) -> int:
    try:
        graph = load_edge_list(args.input, directed=args.directed)
    except OSError as exc:
        raise UsageError(f"cannot read graph: {exc}") from None
    save_binary(graph, args.output)
    print(json.dumps({"vertices": graph.vertex_count, "edges": graph.edge_count}, separators=(",", ":")))
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _sample(args) if args.command == "sample" else _convert(args)
    except UsageError as exc:
        print(f"gsample: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, IndexError, GraphFormatError, RuntimeError) as exc:
        print(f"gsample: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
