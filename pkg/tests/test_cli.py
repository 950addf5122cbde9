import json
import os

import pytest

from uidx.cli import BENCH_FIELDS, default_algorithm, main
from uidx.corpus import write_records
from uidx.postings import IndexImage
from uidx.synth import versioned_collection


@pytest.fixture(scope="module")
def corpus_file(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    path = d / "corpus.txt"
    write_records(versioned_collection(articles=3, versions=5, length=80, vocab_size=200, seed=4), path)
    return path


def run(capsys, *argv):
    rc = main([str(a) for a in argv])
    out = capsys.readouterr()
    return rc, out.out, out.err


def test_build_is_deterministic(corpus_file, tmp_path, capsys):
    a, b = tmp_path / "a.idx", tmp_path / "b.idx"
    assert run(capsys, "build", corpus_file, "-o", a, "--repr", "repair-skip-ST")[0] == 0
    assert run(capsys, "build", corpus_file, "-o", b, "--repr", "repair-skip-ST")[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_build_query_roundtrip(corpus_file, tmp_path, capsys):
    idx = tmp_path / "p.idx"
    rc, out, _ = run(capsys, "build", corpus_file, "-o", idx, "--mode", "pos", "--repr", "vbyte+ST")
    assert rc == 0 and "space_pct" in out
    img = IndexImage.load(idx)
    assert default_algorithm(img) == "lookup"
    t = [x for x in img.terms if x.isalpha()][:2]
    q = tmp_path / "q.txt"
    q.write_text(f"{t[0]}\n{t[1]}\n")
    rc, out, _ = run(capsys, "query", idx, q, "--max-results", "3")
    assert rc == 0
    lines = out.strip().split("\n")
    assert len(lines) == 2
    qid, count, items = lines[0].split("\t")
    assert qid == "1" and int(count) == img.length(1 + img.terms.index(t[0]))
    assert all(":" in x for x in items.split())
    rc2, out2, _ = run(capsys, "query", idx, q, "--max-results", "3", "--jobs", "2")
    assert out2 == out


def test_error_exits(corpus_file, tmp_path, capsys):
    rc, _, err = run(capsys, "build", corpus_file, "-o", tmp_path / "x.idx", "--mode", "pos", "--repr", "rice-runs")
    assert rc == 2 and "rice-runs" in err
    idx = tmp_path / "r.idx"
    run(capsys, "build", corpus_file, "-o", idx, "--repr", "repair-skip")
    q = tmp_path / "q.txt"
    q.write_text("a b\n")
    rc, _, err = run(capsys, "query", idx, q, "--algorithm", "svs")
    assert rc == 2 and "merge, skip" in err
    q.write_text("a b\n\nc d\n")
    rc, _, err = run(capsys, "query", idx, q)
    assert rc == 2 and ":2:" in err
    bad = tmp_path / "bad.idx"
    bad.write_bytes(b"garbage")
    rc, _, err = run(capsys, "stats", bad)
    assert rc == 2
    rc, _, _ = run(capsys, "stats", tmp_path / "missing.idx")
    assert rc == 1
    with pytest.raises(SystemExit):
        main(["build", str(corpus_file), "-o", str(idx), "--rice-b", "40"])


def test_bench_and_stats(corpus_file, tmp_path, capsys):
    idx = tmp_path / "s.idx"
    run(capsys, "build", corpus_file, "-o", idx, "--repr", "vbyte+CM")
    img = IndexImage.load(idx)
    q = tmp_path / "q.txt"
    q.write_text(" ".join(img.terms[:2]) + "\n" + img.terms[3] + " " + img.terms[5] + "\n")
    rows = tmp_path / "rows.jsonl"
    rc, out, _ = run(capsys, "bench", "--index", idx, "--queries", q, "--reps", "2", "--json", rows)
    assert rc == 0
    (row,) = [json.loads(x) for x in rows.read_text().splitlines()]
    assert set(row) == set(BENCH_FIELDS)
    assert row["reps"] == 2 and row["algorithm"] == "svs" and row["clock"] == "process_time"
    assert row["file_bytes"] == os.path.getsize(idx)
    rc, out, _ = run(capsys, "stats", idx)
    info = json.loads(out)
    s = info["sections"]
    assert info["index_bytes"] == s["directory"] + s["payload"] + s["samples"]
    header = info["file_bytes"] - sum(s.values()) - 8 * len(s)
    assert 0 < header < 64
    assert info["space_pct"] == pytest.approx(100 * info["index_bytes"] / info["original_bytes"])
