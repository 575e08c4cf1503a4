#!/usr/bin/env python3
"""Mass-fraction vs fixed-top summaries: size and accuracy side by side.

Builds one index per summarization setting (a list of mass fractions plus a
list of fixed top-s values), reports summary bytes from the exact size
accounting, and sweeps the standard grid for accuracy.
"""

import argparse
import csv

from blockmips.bench import CSV_COLUMNS, index_size_report, latency_sweep
from blockmips.index import BuildParams, build_index
from blockmips.io import read_collection, read_ranked
from blockmips.search import SearchParams


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--collection", required=True)
    parser.add_argument("--queries", required=True)
    parser.add_argument("--ground-truth", required=True)
    parser.add_argument("--lambda", dest="max_postings", type=int, default=6000)
    parser.add_argument("--beta", type=int, default=400)
    parser.add_argument("--alphas", default="0.3,0.4,0.5",
                        help="comma-separated mass fractions")
    parser.add_argument("--tops", default="128", help="comma-separated fixed top-s values")
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

    variants = []
    for a in (float(t) for t in args.alphas.split(",") if t):
        variants.append((f"mass:{a}", BuildParams(
            max_postings=args.max_postings, max_blocks=args.beta, mass_fraction=a,
            rng_seed=args.seed)))
    for s in (int(t) for t in args.tops.split(",") if t):
        variants.append((f"top:{s}", BuildParams(
            max_postings=args.max_postings, max_blocks=args.beta, mass_fraction=1.0,
            summarization="fixed_top", summary_top=s, rng_seed=args.seed)))

    with open(args.output, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=["summary", "summary_bytes"] + CSV_COLUMNS)
        writer.writeheader()
        for name, params in variants:
            print(f"building {name} ...")
            index = build_index(docs, params, threads=args.threads)
            size = index_size_report(index).summaries_bytes
            for row in latency_sweep(index, queries, grid, truth):
                writer.writerow({"summary": name, "summary_bytes": size, **row.as_record()})
    print(f"wrote {args.output}")


if __name__ == "__main__":
    main()
