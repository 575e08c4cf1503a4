"""Command-line operator surface.

One binary, eight subcommands: ingest raw JSONL, build an index, run
approximate or exact searches, score results against ground truth, run the
concentration diagnostics, sweep a parameter grid, and inspect an index.
Exit codes: 0 success, 2 usage, 3 validation/format error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .analysis import ip_preservation, l1_concentration
from .bench import accuracy, index_size_report, latency_sweep, write_sweep_csv
from .errors import BlockMipsError
from .index import BuildParams, build_index, read_index, write_index
from .io import ingest_jsonl, read_collection, read_ranked, write_collection, write_ranked
from .search import SearchParams, exact_search, search


def _int_list(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t.strip()]


def _cmd_ingest(args) -> int:
    c = ingest_jsonl(args.input, args.dim, role=args.role)
    n = write_collection(c, args.output)
    print(f"ingested {len(c)} vectors (dim {c.dim}) -> {args.output} ({n} bytes)")
    return 0


def _parse_blocking(text: str) -> tuple[str, int | None]:
    if text == "geometric":
        return "geometric", None
    if text.startswith("fixed:"):
        return "fixed", int(text.split(":", 1)[1])
    raise argparse.ArgumentTypeError("expected 'geometric' or 'fixed:<size>'")


def _parse_summary(text: str) -> tuple[str, int | None]:
    if text == "alpha-mass":
        return "alpha_mass", None
    if text.startswith("fixed:"):
        return "fixed_top", int(text.split(":", 1)[1])
    raise argparse.ArgumentTypeError("expected 'alpha-mass' or 'fixed:<s>'")


def _cmd_build(args) -> int:
    c = read_collection(args.collection)
    blocking, block_size = args.blocking
    summarization, summary_top = args.summary
    params = BuildParams(
        max_postings=args.max_postings,
        max_blocks=args.beta,
        mass_fraction=args.alpha,
        blocking=blocking,
        block_size=block_size,
        summarization=summarization,
        summary_top=summary_top,
        quantization=args.quantize,
        rng_seed=args.seed,
    )
    index = build_index(c, params, precision=args.precision, threads=args.threads)
    n = write_index(index, args.output)
    print(f"indexed {len(c)} docs (dim {c.dim}) -> {args.output} ({n} bytes)")
    return 0


def _cmd_search(args) -> int:
    index = read_index(args.index)
    queries = read_collection(args.queries, role="queries")
    params = SearchParams(k=args.k, cut=args.cut, heap_factor=args.heap_factor)
    results = {}
    for qid in range(len(queries)):
        q = queries.vector(qid)
        if q.nnz == 0:
            results[qid] = []
            continue
        results[qid] = [(doc, score) for score, doc in search(index, q, params).pairs]
    write_ranked(results, args.output)
    print(f"searched {len(queries)} queries -> {args.output}")
    return 0


def _cmd_exact(args) -> int:
    c = read_collection(args.collection)
    queries = read_collection(args.queries, role="queries")
    results = {}
    for qid in range(len(queries)):
        q = queries.vector(qid)
        if q.nnz == 0:
            results[qid] = []
            continue
        results[qid] = [(doc, score) for score, doc in exact_search(c, q, args.k).pairs]
    write_ranked(results, args.output)
    print(f"exact-searched {len(queries)} queries -> {args.output}")
    return 0


def _cmd_evaluate(args) -> int:
    approx = {qid: [doc for doc, _ in rows] for qid, rows in read_ranked(args.results).items()}
    exact = {qid: [doc for doc, _ in rows] for qid, rows in read_ranked(args.ground_truth).items()}
    acc = accuracy(approx, exact, args.k)
    print(f"accuracy@{args.k}\t{acc:.6f}")
    return 0


def _cmd_analyze(args) -> int:
    c = read_collection(args.collection)
    with open(args.output, "w", encoding="utf-8") as fh:
        if args.mode == "l1":
            fh.write("top_count,mean_l1_fraction\n")
            table = l1_concentration(c, args.top_counts)
            for t in sorted(table):
                fh.write(f"{t},{table[t]:.9f}\n")
        else:
            queries = read_collection(args.queries, role="queries")
            fh.write("q_keep,d_keep,k,mean_fraction,ci_low,ci_high,pairs_used,pairs_excluded\n")
            for qk in args.q_keep:
                for dk in args.d_keep:
                    r = ip_preservation(c, queries, args.k, qk, dk)
                    fh.write(
                        f"{qk},{dk},{args.k},{r.mean:.9f},{r.ci_low:.9f},{r.ci_high:.9f},"
                        f"{r.pairs_used},{r.pairs_excluded}\n"
                    )
    print(f"analysis ({args.mode}) -> {args.output}")
    return 0


def _cmd_sweep(args) -> int:
    index = read_index(args.index)
    queries = read_collection(args.queries, role="queries")
    truth = {qid: [doc for doc, _ in rows] for qid, rows in read_ranked(args.ground_truth).items()}
    with open(args.grid, "r", encoding="utf-8") as fh:
        grid_def = json.load(fh)
    k = int(grid_def.get("k", 10))
    grid = [
        SearchParams(k=k, cut=int(cut), heap_factor=float(hf))
        for cut in grid_def["cut"]
        for hf in grid_def["heap_factor"]
    ]
    rows = latency_sweep(index, queries, grid, truth, parallel=args.parallel)
    write_sweep_csv(rows, args.output)
    print(f"swept {len(grid)} configurations -> {args.output}")
    return 0


def _cmd_info(args) -> int:
    index = read_index(args.index)
    p = index.params
    blocking = p.blocking if p.blocking == "geometric" else f"fixed:{p.block_size}"
    summary = "alpha-mass" if p.summarization == "alpha_mass" else f"fixed:{p.summary_top}"
    print(f"documents\t{index.doc_count}")
    print(f"dim\t{index.dim}")
    print(f"lambda\t{p.max_postings}")
    print(f"beta\t{p.max_blocks}")
    print(f"alpha\t{p.mass_fraction}")
    print(f"blocking\t{blocking}")
    print(f"summary\t{summary}")
    print(f"quantize\t{p.quantization}")
    print(f"precision\t{index.forward.precision}")
    print(f"seed\t{p.rng_seed}")
    r = index_size_report(index)
    print(f"metadata_bytes\t{r.metadata_bytes}")
    print(f"postings_bytes\t{r.postings_bytes}")
    print(f"summaries_bytes\t{r.summaries_bytes}")
    print(f"summary_value_bytes\t{r.summary_value_bytes}")
    print(f"forward_bytes\t{r.forward_bytes}")
    print(f"total_bytes\t{r.total_bytes}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="blockmips",
        description="Approximate maximum-inner-product search over sparse vectors.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="JSONL -> collection file")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--role", choices=["documents", "queries"], default="documents")
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("build", help="collection file -> index file")
    p.add_argument("--collection", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--lambda", dest="max_postings", type=int, required=True,
                   help="max posting entries per coordinate")
    p.add_argument("--beta", type=int, required=True, help="max blocks per list")
    p.add_argument("--alpha", type=float, required=True, help="summary mass fraction")
    p.add_argument("--blocking", type=_parse_blocking, default="geometric",
                   help="geometric | fixed:<size>")
    p.add_argument("--summary", type=_parse_summary, default="alpha-mass",
                   help="alpha-mass | fixed:<s>")
    p.add_argument("--quantize", choices=["u8", "none"], default="u8")
    p.add_argument("--precision", choices=["full", "half"], default="full")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=_cmd_build)

    p = sub.add_parser("search", help="approximate top-k over an index")
    p.add_argument("--index", required=True)
    p.add_argument("--queries", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--cut", type=int, required=True)
    p.add_argument("--heap-factor", type=float, default=1.0)
    p.set_defaults(func=_cmd_search)

    p = sub.add_parser("exact", help="exhaustive top-k (ground truth)")
    p.add_argument("--collection", required=True)
    p.add_argument("--queries", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--k", type=int, required=True)
    p.set_defaults(func=_cmd_exact)

    p = sub.add_parser("evaluate", help="accuracy of results vs ground truth")
    p.add_argument("--results", required=True)
    p.add_argument("--ground-truth", required=True)
    p.add_argument("--k", type=int, required=True)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("analyze", help="concentration diagnostics -> CSV")
    p.add_argument("--collection", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--mode", choices=["l1", "ip"], required=True)
    p.add_argument("--top-counts", type=_int_list, default=[1, 2, 5, 10, 20, 50])
    p.add_argument("--queries")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--q-keep", type=_int_list, default=[9, 12])
    p.add_argument("--d-keep", type=_int_list, default=[20, 25])
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("sweep", help="benchmark a grid of search parameters")
    p.add_argument("--index", required=True)
    p.add_argument("--queries", required=True)
    p.add_argument("--ground-truth", required=True)
    p.add_argument("--grid", required=True, help="JSON file: {k, cut: [...], heap_factor: [...]}")
    p.add_argument("--output", required=True)
    p.add_argument("--parallel", type=int, default=1)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("info", help="index parameter echo and size report")
    p.add_argument("--index", required=True)
    p.set_defaults(func=_cmd_info)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BlockMipsError as e:
        print(f"error[{type(e).__name__}]: {e}", file=sys.stderr)
        return 3
    except OSError as e:
        print(f"error[io]: {e}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
