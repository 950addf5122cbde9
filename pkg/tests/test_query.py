import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import phrase_scan, translate_bisect
from uidx.codecs import from_gaps
from uidx.corpus import NONPOSITIONAL, POSITIONAL, ingest
from uidx.postings import PlainList, PostingLists, RepairStore, build_index
from uidx.query import (AlgorithmError, WorkCounters, bys_intersect, conjunctive_query, evaluate,
                        exponential_search, intersect_terms, merge_intersect, multi_intersect, phrase_query,
                        repair_intersect, skip_search, svs_intersect, translate)

EXAMPLE = PostingLists([from_gaps(g) for g in ([1, 2, 1, 2, 1, 4], [2, 1, 4, 2, 2], [1, 2, 1, 2, 2, 2])], 12,
                    NONPOSITIONAL)


@pytest.fixture(scope="module")
def example_store():
    return RepairStore.build("repair-skip", EXAMPLE, 4, 16)


def test_pairwise_examples():
    a, b = [2, 5, 9, 14], [1, 2, 3, 9, 10, 14, 20]
    assert merge_intersect(a, b) == [2, 9, 14]
    assert svs_intersect(a, b, ratio=1) == [2, 9, 14]
    assert svs_intersect(a, b) == [2, 9, 14]
    assert bys_intersect(a, b) == [2, 9, 14]
    assert multi_intersect([b, a, [9, 14, 15]]) == [9, 14]
    assert multi_intersect([a, []]) == []


def test_exponential_search():
    seq = [1, 4, 9, 16, 25, 36]
    assert exponential_search(seq, 16) == 3
    assert exponential_search(seq, 17, 2) == 4
    assert exponential_search(seq, 100) == 6
    assert exponential_search(seq, 0, 3) == 3


@settings(max_examples=150, deadline=None)
@given(st.sets(st.integers(1, 300)), st.sets(st.integers(1, 300)), st.integers(1, 30))
def test_pairwise_property(a, b, ratio):
    a, b = sorted(a), sorted(b)
    want = sorted(set(a) & set(b))
    assert merge_intersect(a, b) == want
    assert svs_intersect(a, b, ratio=ratio) == want
    assert svs_intersect(a, PlainList(b), ratio=ratio) == want
    assert bys_intersect(a, b) == want


def test_skip_search_beta(example_store):
    cur = example_store.cursor(1)
    assert skip_search(cur, 1) is False
    assert skip_search(cur, 8) is False
    assert skip_search(cur, 9) is True
    assert skip_search(cur, 11) is True
    assert skip_search(cur, 12) is False


def test_skip_search_counts_less_than_expansion(example_store):
    c = WorkCounters()
    assert repair_intersect([10], example_store, 2, c) == [10]
    assert c.terminals < len(EXAMPLE.lists[2])


def test_plain_repair_falls_back_to_merge():
    store = RepairStore.build("repair", EXAMPLE, 4, 16)
    assert repair_intersect([2, 9, 10], store, 1) == [2, 9]
    assert repair_intersect([1, 2, 4], store, 1, offset=1) == [1, 2]


def test_translate():
    assert translate([7], [1, 6, 11]) == [(2, 2)]
    assert translate([1, 5, 6, 10, 11, 40], [1, 6, 11]) == [(1, 1), (1, 5), (2, 1), (2, 5), (3, 1), (3, 30)]
    with pytest.raises(ValueError):
        translate([0], [1, 6, 11])
    with pytest.raises(ValueError):
        translate([13], [1, 6, 11], total_tokens=12)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(1, 20), min_size=1, max_size=50), st.data())
def test_translate_property(lengths, data):
    starts = [1]
    for ln in lengths[:-1]:
        starts.append(starts[-1] + ln)
    total = starts[-1] + lengths[-1] - 1
    pos = sorted(data.draw(st.sets(st.integers(1, total), max_size=40)))
    assert translate(pos, starts, total) == translate_bisect(pos, starts)


def test_phrase_examples():
    c = ingest(["to be or not to be", "be to be"], POSITIONAL)
    img = build_index(c, "vbyte")
    v = c.vocabulary
    ids = [v.id("to"), v.id("be")]
    assert phrase_query(img, ids) == [1, 5, 9]
    assert translate(phrase_query(img, ids), c.doc_starts) == [(1, 1), (1, 5), (2, 2)]
    assert phrase_query(img, [v.id("be"), v.id("to")]) == [8]  # no match across the document boundary
    assert phrase_query(img, [v.id("to"), -1]) == []
    text = np.array(c.text())
    assert phrase_query(img, ids) == phrase_scan(text, ids)


def test_phrase_needs_positional():
    img = build_index(ingest(["a b"]), "vbyte")
    with pytest.raises(AlgorithmError):
        phrase_query(img, [1, 2])


def test_algorithm_validation():
    c = ingest(["alpha beta", "beta gamma"])
    img = build_index(c, "repair-skip")
    with pytest.raises(AlgorithmError, match="merge, skip"):
        conjunctive_query(img, [1, 2], "svs")
    with pytest.raises(AlgorithmError):
        evaluate(img, [1], "lookup")
    assert conjunctive_query(img, [1, 2], "skip") == [1]
    assert evaluate(img, [2], "skip") == [1, 2]
    assert evaluate(img, [-1], "merge") == []


def test_intersect_terms_offsets():
    c = ingest(["a b c a b c"], POSITIONAL)
    img = build_index(c, "vbyte+CM")
    v = c.vocabulary
    assert intersect_terms(img, [(v.id("c"), 2), (v.id("a"), 0)], "svs") == [1, 4]
