"""Command-line entry points: build, query, bench, stats.

Bench rows are also written as JSON lines, one object per (index, query
file) pair with the keys documented in ``BENCH_FIELDS``.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence

from .corpus import POSITIONAL, CorpusError, QueryParseError, Vocabulary, ingest, load_queries, load_stopwords, \
    read_records, RECORD_MARKER
from .postings import REPRESENTATIONS, IndexFormatError, IndexImage, IndexParams, UnsupportedRepresentation, \
    build_index
from .query import AlgorithmError, WorkCounters, evaluate, translate

log = logging.getLogger("uidx")

BENCH_FIELDS = ("index", "representation", "mode", "queries", "kind", "algorithm", "reps", "num_queries",
                "occurrences", "index_bytes", "file_bytes", "original_bytes", "space_pct", "mean_seconds",
                "us_per_occurrence", "us_per_query", "clock")


def default_algorithm(image: IndexImage) -> str:
    """The representation's own search method, falling back to merge."""
    for alg in ("svs", "lookup", "skip"):
        if alg in image.algorithms:
            return alg
    return "merge"


def _rice_b(text: str) -> Optional[int]:
    if text == "auto":
        return None
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("expected an integer or 'auto'")
    if not 0 <= v <= 30:
        raise argparse.ArgumentTypeError("rice parameter must be in [0, 30]")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return v


def _params(args) -> IndexParams:
    return IndexParams(k=args.k, B=args.B, rice_b=args.rice_b, ds=args.ds)


def cmd_build(args) -> int:
    stop = load_stopwords(args.stopwords) if args.stopwords else None
    corpus = ingest(read_records(args.corpus, args.marker), args.mode, stop, args.max_tokens)
    image = build_index(corpus, args.repr, _params(args))
    size = image.save(args.output)
    nonempty = sum(1 for w in range(1, len(image.terms) + 1) if image.length(w))
    print(f"terms\t{len(image.terms)}")
    print(f"lists\t{nonempty}")
    print(f"docs\t{image.num_docs}")
    print(f"u\t{image.universe}")
    for k, v in image.store.stats().items():
        print(f"{k}\t{v}")
    print(f"index_bytes\t{image.index_bytes()}")
    print(f"file_bytes\t{size}")
    print(f"space_pct\t{image.space_pct():.4f}")
    return 0


def _load_queryset(path: str, image: IndexImage, kind: Optional[str]):
    return load_queries(path, Vocabulary.from_terms(image.terms), kind, image.mode)


def _run(image: IndexImage, queries: Sequence[List[int]], algorithm: str, jobs: int) -> List[List[int]]:
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(lambda q: evaluate(image, q, algorithm, WorkCounters()), queries))
    return [evaluate(image, q, algorithm) for q in queries]


def cmd_query(args) -> int:
    image = IndexImage.load(args.index)
    alg = args.algorithm or default_algorithm(image)
    qs = _load_queryset(args.queries, image, args.kind)
    results = _run(image, qs.queries, alg, args.jobs)
    out = sys.stdout
    for qid, res in enumerate(results, start=1):
        shown = res if args.max_results is None else res[: args.max_results]
        if image.mode == POSITIONAL:
            items = [f"{d}:{o}" for d, o in translate(shown, image.doc_starts, image.total_tokens)]
        else:
            items = [str(x) for x in shown]
        out.write(f"{qid}\t{len(res)}\t{' '.join(items)}\n")
    return 0


def bench_row(index_path: str, image: IndexImage, query_path: str, kind: Optional[str], algorithm: Optional[str],
              reps: int) -> dict:
    alg = algorithm or default_algorithm(image)
    qs = _load_queryset(query_path, image, kind)
    occ = 0
    total = 0.0
    for r in range(reps):
        t0 = time.process_time()
        res = [evaluate(image, q, alg) for q in qs.queries]
        total += time.process_time() - t0
        if r == 0:
            occ = sum(len(x) for x in res)
    mean = total / reps
    ib = image.index_bytes()
    return {
        "index": index_path, "representation": image.representation, "mode": image.mode,
        "queries": query_path, "kind": qs.kind, "algorithm": alg, "reps": reps, "num_queries": len(qs),
        "occurrences": occ, "index_bytes": ib, "file_bytes": os.path.getsize(index_path),
        "original_bytes": image.original_byte_size, "space_pct": 100.0 * ib / image.original_byte_size,
        "mean_seconds": mean, "us_per_occurrence": 1e6 * mean / max(occ, 1),
        "us_per_query": 1e6 * mean / max(len(qs), 1), "clock": "process_time",
    }


def cmd_bench(args) -> int:
    rows = []
    for ipath in args.index:
        image = IndexImage.load(ipath)
        for qpath in args.queries:
            try:
                rows.append(bench_row(ipath, image, qpath, args.kind, args.algorithm, args.reps))
            except AlgorithmError as e:
                log.warning("skipping %s on %s: %s", qpath, ipath, e)
    print(f"{'representation':<16}{'kind':<12}{'algorithm':<10}{'space%':>10}{'occ':>10}{'us/occ':>12}")
    for r in rows:
        print(f"{r['representation']:<16}{r['kind']:<12}{r['algorithm']:<10}{r['space_pct']:>10.4f}"
              f"{r['occurrences']:>10}{r['us_per_occurrence']:>12.3f}")
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            for r in rows:
                fh.write(json.dumps(r, sort_keys=True) + "\n")
    return 0


def cmd_stats(args) -> int:
    image = IndexImage.load(args.index)
    info = {
        "representation": image.representation, "mode": image.mode, "terms": len(image.terms),
        "docs": image.num_docs, "total_tokens": image.total_tokens, "u": image.universe,
        "params": {"k": image.params.k, "B": image.params.B, "rice_b": image.params.rice_b, "ds": image.params.ds},
        "sections": image.section_sizes(), "index_bytes": image.index_bytes(),
        "file_bytes": os.path.getsize(args.index), "original_bytes": image.original_byte_size,
        "space_pct": image.space_pct(), "algorithms": list(image.algorithms),
    }
    info.update(image.store.stats())
    print(json.dumps(info, indent=2, sort_keys=True))
    return 0


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="uidx", description="Compressed inverted indexes for repetitive collections.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="cmd", required=True)

    b = sub.add_parser("build", help="index a corpus file")
    b.add_argument("corpus")
    b.add_argument("-o", "--output", required=True)
    b.add_argument("--mode", choices=("nonpos", "pos"), default="nonpos")
    b.add_argument("--repr", choices=REPRESENTATIONS, default="vbyte")
    b.add_argument("--k", type=_positive, default=4, help="CM sampling factor")
    b.add_argument("--B", type=_positive, default=16, help="ST bucket factor")
    b.add_argument("--rice-b", type=_rice_b, default=None, help="Rice parameter or 'auto'")
    b.add_argument("--ds", type=_positive, default=32, help="LZ-End phrase-end sampling")
    b.add_argument("--stopwords", help="stopword file (non-positional mode)")
    b.add_argument("--max-tokens", type=_positive, default=None)
    b.add_argument("--marker", default=RECORD_MARKER, help="record delimiter line")
    b.set_defaults(func=cmd_build)

    q = sub.add_parser("query", help="run a query file against an index")
    q.add_argument("index")
    q.add_argument("queries")
    q.add_argument("--algorithm", "-a", default=None)
    q.add_argument("--kind", default=None, choices=("word-low", "word-high", "conjunctive", "phrase"))
    q.add_argument("--max-results", type=int, default=None)
    q.add_argument("--jobs", type=_positive, default=1, help="evaluate queries on this many threads")
    q.set_defaults(func=cmd_query)

    be = sub.add_parser("bench", help="time query files over indexes")
    be.add_argument("--index", nargs="+", required=True)
    be.add_argument("--queries", nargs="+", required=True)
    be.add_argument("--algorithm", "-a", default=None)
    be.add_argument("--kind", default=None, choices=("word-low", "word-high", "conjunctive", "phrase"))
    be.add_argument("--reps", type=_positive, default=3)
    be.add_argument("--json", help="write JSON-lines rows here")
    be.set_defaults(func=cmd_bench)

    s = sub.add_parser("stats", help="describe an index file")
    s.add_argument("index")
    s.set_defaults(func=cmd_stats)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (UnsupportedRepresentation, AlgorithmError, QueryParseError, CorpusError, IndexFormatError) as e:
        print(f"uidx: error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"uidx: error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
