#!/usr/bin/env python3
"""Geometric vs fixed blocking over the standard parameter grid.

Builds both index variants on a collection, sweeps cut x heap_factor, and
writes one CSV with a `blocking` column for plotting accuracy against mean
documents scored (the hardware-independent cost proxy).
"""

import argparse
import csv
import math

from blockmips.bench import CSV_COLUMNS, latency_sweep
from blockmips.index import BuildParams, build_index
from blockmips.io import read_collection, read_ranked
from blockmips.search import SearchParams


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--collection", required=True)
    parser.add_argument("--queries", required=True)
    parser.add_argument("--ground-truth", required=True, help="output of `blockmips exact`")
    parser.add_argument("--lambda", dest="max_postings", type=int, default=6000)
    parser.add_argument("--beta", type=int, default=400)
    parser.add_argument("--alpha", type=float, default=0.5)
    parser.add_argument("--k", type=int, default=10)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--output", required=True)
    args = parser.parse_args()

    docs = read_collection(args.collection)
    queries = read_collection(args.queries, role="queries")
    truth = {qid: [d for d, _ in rows] for qid, rows in read_ranked(args.ground_truth).items()}
    grid = [SearchParams(k=args.k, cut=cut, heap_factor=hf)
            for cut in range(1, 11) for hf in (0.7, 0.8, 0.9, 1.0)]

    block_size = max(1, math.ceil(args.max_postings / args.beta))
    variants = {
        "geometric": BuildParams(max_postings=args.max_postings, max_blocks=args.beta,
                                 mass_fraction=args.alpha, rng_seed=args.seed),
        "fixed": BuildParams(max_postings=args.max_postings, max_blocks=args.beta,
                             mass_fraction=args.alpha, blocking="fixed",
                             block_size=block_size, rng_seed=args.seed),
    }
    with open(args.output, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=["blocking"] + CSV_COLUMNS)
        writer.writeheader()
        for name, params in variants.items():
            print(f"building {name} index ...")
            index = build_index(docs, params, threads=args.threads)
            print(f"sweeping {len(grid)} configurations ...")
            for row in latency_sweep(index, queries, grid, truth):
                writer.writerow({"blocking": name, **row.as_record()})
    print(f"wrote {args.output}")


if __name__ == "__main__":
    main()
