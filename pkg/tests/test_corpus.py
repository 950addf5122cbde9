import difflib
import io

import pytest

from uidx.corpus import (ABSENT, CONJUNCTIVE, NONPOSITIONAL, PHRASE, POSITIONAL, WORD_HIGH, WORD_LOW,
                         CorpusError, QueryParseError, QuerySet, corpus_from_text, detokenize, generate_queries,
                         ingest, load_queries, load_stopwords, read_records, tokenize, write_queries,
                         write_records)
from uidx.synth import random_collection, versioned_collection

M = "\x01"


def test_doc_starts_count_separators():
    c = ingest(["a b c d e f", "g h i j k l", "m n"], POSITIONAL)
    assert c.doc_starts == [1, 8, 15]
    assert c.total_tokens == 16
    assert len(c.text()) == c.total_tokens
    assert c.text()[6] == 0


def test_nonpositional_case_folding_and_stopwords():
    c = ingest(["The Cat and the HAT", "cat hat"], NONPOSITIONAL, stopwords=["the", "and"])
    assert c.vocabulary.terms == ["cat", "hat"]
    assert c.documents[0].tokens == (1, 2)
    assert c.vocabulary.cf == [2, 2] and c.vocabulary.df == [2, 2]


def test_default_stopwords_apply_in_nonpositional_only():
    stop = load_stopwords()
    assert "the" in stop
    assert "the" not in ingest(["the cat"]).vocabulary
    assert "the" in ingest(["the cat"], POSITIONAL).vocabulary


def test_positional_tokens_roundtrip():
    text = "Hello, world!  Two  spaces and\nnewline."
    toks = tokenize(text, POSITIONAL)
    assert "Hello" in toks and ", " in toks and " " not in toks
    assert detokenize(toks) == text


def test_records(tmp_path):
    path = tmp_path / "c.txt"
    write_records(["first doc", "second\nline"], path)
    assert list(read_records(path)) == ["first doc\n", "second\nline\n"]
    assert list(read_records(io.StringIO("x\n%%\ny\n"), "%%")) == ["x\n", "y\n"]


def test_errors():
    with pytest.raises(CorpusError):
        ingest([])
    with pytest.raises(CorpusError):
        ingest(["one two three"], max_tokens=2)
    with pytest.raises(ValueError):
        ingest(["x"], mode="bogus")


def test_query_files(tmp_path):
    c = corpus_from_text(f"red fish\n{M}\nblue fish\n{M}\n")
    p = tmp_path / "q.txt"
    p.write_text("red fish\nblue green\n\n\n")
    qs = load_queries(p, c.vocabulary)
    assert qs.kind == CONJUNCTIVE
    assert qs.queries == [[c.vocabulary.id("red"), c.vocabulary.id("fish")], [c.vocabulary.id("blue"), ABSENT]]

    p.write_text("red\n\nfish\n")
    with pytest.raises(QueryParseError) as e:
        load_queries(p, c.vocabulary)
    assert e.value.lineno == 2

    p.write_text("red fish\n")
    with pytest.raises(QueryParseError):
        load_queries(p, c.vocabulary, WORD_LOW)
    p.write_text("red\n")
    with pytest.raises(QueryParseError):
        load_queries(p, c.vocabulary, PHRASE)
    assert load_queries(p, c.vocabulary).kind == WORD_LOW


def test_generated_queries_roundtrip(tmp_path):
    for mode in (NONPOSITIONAL, POSITIONAL):
        c = ingest(versioned_collection(articles=5, versions=4, length=60, seed=2), mode)
        for kind, kw in ((WORD_LOW, {"threshold": 5}), (WORD_HIGH, {"threshold": 5}),
                         (CONJUNCTIVE, {"length": 3}), (PHRASE, {"length": 2})):
            qs = generate_queries(c, kind, 30, seed=1, **kw)
            assert len(qs) == 30
            p = tmp_path / f"{mode}-{kind}.txt"
            write_queries(qs, p, mode)
            back = load_queries(p, c.vocabulary, kind, mode)
            assert back.queries == qs.queries


def test_generated_word_thresholds():
    c = ingest(random_collection(docs=50, seed=1))
    low = generate_queries(c, WORD_LOW, 50, threshold=3)
    high = generate_queries(c, WORD_HIGH, 50, threshold=3)
    assert all(c.vocabulary.cf[q[0] - 1] < 3 for q in low)
    assert all(c.vocabulary.cf[q[0] - 1] > 3 for q in high)
    with pytest.raises(ValueError):
        generate_queries(c, WORD_HIGH, 5, threshold=10 ** 9)


def test_versioned_collection_is_deterministic_and_repetitive():
    a = versioned_collection(articles=3, versions=5, seed=9)
    assert a == versioned_collection(articles=3, versions=5, seed=9)
    assert len(a) == 15
    assert difflib.SequenceMatcher(None, a[0].split(), a[1].split()).ratio() > 0.9
