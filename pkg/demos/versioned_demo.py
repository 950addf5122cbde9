"""Walk through the toolkit on a small versioned collection.

Generates a few articles with many near-identical versions, indexes them
under every representation, and compares index size and query work.
Run with ``python demos/versioned_demo.py [workdir]``.
"""
import sys
import tempfile
import time
from pathlib import Path

from uidx.cli import main as uidx
from uidx.corpus import CONJUNCTIVE, NONPOSITIONAL, PHRASE, POSITIONAL, detokenize, generate_queries, ingest, \
    write_queries, write_records
from uidx.postings import REPRESENTATIONS, build_index
from uidx.query import WorkCounters, evaluate, translate
from uidx.synth import versioned_collection


def section(title):
    print(f"\n== {title}")


def main(workdir):
    work = Path(workdir)
    work.mkdir(parents=True, exist_ok=True)
    records = versioned_collection(articles=20, versions=30, length=200, seed=1)
    corpus_path = work / "corpus.txt"
    write_records(records, corpus_path)
    print(f"{len(records)} documents written to {corpus_path}")

    section("index size per representation (non-positional)")
    corpus = ingest(records, NONPOSITIONAL)
    queries = generate_queries(corpus, CONJUNCTIVE, 200, seed=2, length=3)
    print(f"{'representation':<16}{'bytes':>10}{'space%':>9}{'terminals':>12}{'ms':>9}")
    for rep in REPRESENTATIONS:
        img = build_index(corpus, rep)
        alg = [a for a in ("svs", "lookup", "skip", "merge") if a in img.algorithms][0]
        work_done = WorkCounters()
        t0 = time.perf_counter()
        for q in queries:
            evaluate(img, q, alg, work_done)
        ms = 1000 * (time.perf_counter() - t0)
        print(f"{rep:<16}{img.index_bytes():>10}{img.space_pct():>9.3f}{work_done.terminals:>12}{ms:>9.1f}")

    section("phrase queries on a positional index")
    pcorpus = ingest(records, POSITIONAL)
    img = build_index(pcorpus, "repair-skip-CM")
    phrases = generate_queries(pcorpus, PHRASE, 3, seed=3, length=3)
    for terms, q in zip(phrases.terms, phrases.queries):
        hits = evaluate(img, q, "skip")
        where = translate(hits[:4], pcorpus.doc_starts, pcorpus.total_tokens)
        print(f"{detokenize(terms)!r}: {len(hits)} occurrences, first at (doc, offset) {where}")

    section("the same through the command line")
    idx = work / "pos.idx"
    qfile = work / "phrases.txt"
    write_queries(phrases, qfile, POSITIONAL)
    uidx(["build", str(corpus_path), "-o", str(idx), "--mode", "pos", "--repr", "vbyte+ST"])
    uidx(["query", str(idx), str(qfile), "--max-results", "4"])
    uidx(["bench", "--index", str(idx), "--queries", str(qfile), "--reps", "2"])


if __name__ == "__main__":
    if len(sys.argv) > 1:
        main(sys.argv[1])
    else:
        with tempfile.TemporaryDirectory() as tmp:
            main(tmp)
