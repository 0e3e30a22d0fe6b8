#!/usr/bin/env python3
"""Partition transfers of the workload-aware scheduler against round-robin."""

import argparse

from gsample import algorithms as al
from gsample.cli import default_seeds
from gsample.graph import partition
from gsample.ooc import run_out_of_memory
from gsample.synthetic import power_law_graph

ALGORITHMS = ("neighbor-biased", "neighbor-unbiased", "forest-fire", "biased-rw")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--vertices", type=int, default=20_000)
    ap.add_argument("--edges", type=int, default=100_000)
    ap.add_argument("--partitions", type=int, default=4)
    ap.add_argument("--budget", type=int, default=2)
    ap.add_argument("--streams", type=int, default=2)
    ap.add_argument("--instances", type=int, nargs="+", default=[500, 2000])
    ap.add_argument("--graphs", type=int, default=3, help="number of generated graphs")
    args = ap.parse_args(argv)

    print(f"{'graph':>5} {'algorithm':>18} {'inst':>5} {'workload':>9} {'round-robin':>12} {'ratio':>6}")
    for seed in range(args.graphs):
        g = power_law_graph(args.vertices, args.edges, exponent=2.0 + 0.2 * seed, seed=seed)
        ps = partition(g, args.partitions)
        for name in ALGORITHMS:
            d = al.make(name)
            for n in args.instances:
                cfg = d.configure(depth=50 if d.walk else 2, instances=n, seed=seed)
                seeds = default_seeds(g, seed, n)
                w, rr = (run_out_of_memory(g, ps, cfg, d.spec, seeds, args.budget, args.streams, p).state.transfer_count
                         for p in ("workload", "round-robin"))
                print(f"{seed:>5} {name:>18} {n:>5} {w:>9} {rr:>12} {rr / w:>6.2f}")


if __name__ == "__main__":
    main()
