#!/usr/bin/env python3
"""Mean restarts per draw for the three without-replacement strategies.

One candidate holds a configurable share of the bias mass and is already
taken; the others share the remainder equally. Rebuilding the CTPS per draw
never restarts, so it is left out of the table.
"""

import argparse

import numpy as np

from gsample.rng import KeyedStream, stream_key
from gsample.select import SelectionBitmap, bipartite_region_search, build_ctps, repeated_sampling


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--candidates", type=int, default=11)
    ap.add_argument("--trials", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    print(f"{'dominant share':>15} {'brs':>8} {'repeated':>9}")
    for share in (0.1, 0.5, 0.8, 0.9, 0.95, 0.99):
        rest = (1 - share) / (args.candidates - 1)
        b = np.r_[share, np.full(args.candidates - 1, rest)]
        c = build_ctps(b)
        bm = SelectionBitmap(b.size)
        bm.test_and_set(0)
        brs = np.mean([bipartite_region_search(c, bm, KeyedStream(stream_key(args.seed, i, 0, 0)))[1]
                       for i in range(args.trials)])
        rep = np.mean([repeated_sampling(c, bm, KeyedStream(stream_key(args.seed, i, 0, 0)))[1]
                       for i in range(args.trials)])
        print(f"{share:>15.2f} {brs:>8.3f} {rep:>9.3f}")


if __name__ == "__main__":
    main()
