#!/usr/bin/env python3
"""Generate synthetic document/query collections for experiments.

Two families:
  random    unstructured heavy-tailed vectors
  clustered planted clusters with sub-topics over a Zipf coordinate pool

Example:
  python scripts/make_synthetic.py clustered --docs 100000 --queries 100 \
      --dim 2048 --clusters 100 --seed 20240 --out-docs docs.svc --out-queries queries.svc
"""

import argparse

from blockmips.io import write_collection
from blockmips.synth import clustered_dataset, zipf_collection


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="family", required=True)

    p = sub.add_parser("random")
    p.add_argument("--docs", type=int, default=10_000)
    p.add_argument("--queries", type=int, default=200)
    p.add_argument("--dim", type=int, default=1000)
    p.add_argument("--avg-nnz", type=int, default=40)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-docs", required=True)
    p.add_argument("--out-queries", required=True)

    p = sub.add_parser("clustered")
    p.add_argument("--docs", type=int, default=100_000)
    p.add_argument("--queries", type=int, default=100)
    p.add_argument("--dim", type=int, default=2048)
    p.add_argument("--clusters", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--value-dist", choices=["lognormal", "pareto"], default="lognormal")
    p.add_argument("--correlated-queries", action="store_true",
                   help="query weights follow document weights instead of fresh draws")
    p.add_argument("--out-docs", required=True)
    p.add_argument("--out-queries", required=True)

    args = parser.parse_args()
    if args.family == "random":
        docs = zipf_collection(args.docs, args.dim, args.avg_nnz, seed=args.seed)
        queries = zipf_collection(args.queries, args.dim, args.avg_nnz, seed=args.seed + 1)
    else:
        docs, queries = clustered_dataset(
            args.docs, args.queries, dim=args.dim, n_clusters=args.clusters,
            seed=args.seed, value_dist=args.value_dist,
            query_fresh=not args.correlated_queries,
        )
    n1 = write_collection(docs, args.out_docs)
    n2 = write_collection(queries, args.out_queries)
    print(f"wrote {len(docs)} docs ({n1:,} bytes) and {len(queries)} queries ({n2:,} bytes)")


if __name__ == "__main__":
    main()
