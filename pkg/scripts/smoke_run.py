#!/usr/bin/env python3
"""Full-size smoke run: biased walks plus depth-2 neighbor sampling on a large synthetic graph."""

import argparse
import time

from gsample import algorithms as al
from gsample.cli import RunReport, default_seeds
from gsample.ooc import run_worker_groups
from gsample.synthetic import power_law_graph


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--vertices", type=int, default=1_700_000)
    ap.add_argument("--edges", type=int, default=5_600_000, help="undirected edges before symmetrizing")
    ap.add_argument("--walks", type=int, default=4000)
    ap.add_argument("--walk-length", type=int, default=2000)
    ap.add_argument("--samples", type=int, default=2000)
    args = ap.parse_args(argv)

    t = time.perf_counter()
    g = power_law_graph(args.vertices, args.edges, exponent=2.3, seed=11)
    print(f"graph: {g.vertex_count} vertices, {g.edge_count} CSR edges ({time.perf_counter() - t:.1f}s)")

    for name, cfg_kwargs, n in (
        ("biased-rw", {"depth": args.walk_length}, args.walks),
        ("neighbor-biased", {"depth": 2, "neighbor_size": 2}, args.samples),
    ):
        d = al.make(name)
        cfg = d.configure(instances=n, seed=1, **cfg_kwargs)
        seeds = default_seeds(g, 1, n)
        t = time.perf_counter()
        outputs, reports = run_worker_groups(g, cfg, d.spec, seeds, 1)
        print(RunReport.build(name, outputs, time.perf_counter() - t, reports[0].retries, None).table(), "\n")


if __name__ == "__main__":
    main()
