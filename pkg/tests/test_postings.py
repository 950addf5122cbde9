import numpy as np
import pytest

from oracles import posting_sets
from uidx.codecs import from_gaps
from uidx.corpus import NONPOSITIONAL, POSITIONAL, ingest
from uidx.postings import (END, FOUND, MISS, REPRESENTATIONS, HybridStore, IndexFormatError, IndexImage,
                           IndexParams, PlainList, PostingLists, RepairStore, UnsupportedRepresentation,
                           build_index, build_lists, cm_sampled, cm_step, materialize, st_bucket,
                           st_samples_over_C, st_step)
from uidx.synth import versioned_collection

EXAMPLE_GAPS = [[1, 2, 1, 2, 1, 4], [2, 1, 4, 2, 2], [1, 2, 1, 2, 2, 2]]
EXAMPLE = PostingLists([from_gaps(g) for g in EXAMPLE_GAPS], 12, NONPOSITIONAL)


@pytest.fixture(scope="module")
def small_corpora():
    recs = versioned_collection(articles=4, versions=6, length=80, vocab_size=300, seed=5)
    return {m: ingest(recs, m) for m in (NONPOSITIONAL, POSITIONAL)}


def test_sampling_parameters():
    assert cm_step(256, 4) == 32
    assert cm_sampled(256, 4) and cm_sampled(40, 4) is False
    assert st_step(1024, 16, 64) == 256
    assert st_step(1000, 16, 64) == 256
    assert st_step(10, 1, 20) == 1
    assert st_bucket(256, 256) == 1 and st_bucket(257, 256) == 2


def test_hybrid_threshold():
    assert HybridStore.use_bitmap(3, 16)
    assert not HybridStore.use_bitmap(2, 16)
    store = HybridStore.build(PostingLists([[1, 5, 9], [2, 3]], 16, NONPOSITIONAL), 4)
    assert store.is_bitmap == [True, False]
    assert store.fetch(0) == [1, 5, 9] and store.fetch(1) == [2, 3]


def test_params_validation():
    with pytest.raises(ValueError):
        IndexParams(k=0)
    with pytest.raises(ValueError):
        IndexParams(rice_b=31)


def test_example_store_and_samples():
    store = RepairStore.build("repair-skip", EXAMPLE, 4, 16)
    assert [store.fetch(w) for w in range(3)] == EXAMPLE.lists
    assert EXAMPLE.lists[2] == [1, 3, 4, 6, 8, 10]
    syms = store.cl.symbols(2)
    assert st_samples_over_C(syms, store.grammar, 4) == [(0, 1), (0, 1), (6, 2)]


def test_plain_probe_protocol():
    acc = PlainList([2, 3, 7, 9, 11])
    assert [acc.probe(d) for d in (1, 3, 8, 9, 11, 12)] == [MISS, FOUND, MISS, FOUND, FOUND, END]


@pytest.mark.parametrize("mode", [NONPOSITIONAL, POSITIONAL])
def test_lists_match_scan(small_corpora, mode):
    c = small_corpora[mode]
    lists = build_lists(c)
    want = posting_sets(c, mode == POSITIONAL)
    for w in range(1, len(lists) + 1):
        assert lists[w] == want[w]


@pytest.mark.parametrize("rep", REPRESENTATIONS)
@pytest.mark.parametrize("mode", [NONPOSITIONAL, POSITIONAL])
def test_roundtrip_every_representation(small_corpora, rep, mode):
    c = small_corpora[mode]
    if rep == "rice-runs" and mode == POSITIONAL:
        with pytest.raises(UnsupportedRepresentation):
            build_index(c, rep)
        return
    img = build_index(c, rep, IndexParams(k=2, B=4))
    data = img.to_bytes()
    back = IndexImage.from_bytes(data)
    assert back.to_bytes() == data
    lists = build_lists(c)
    for w in range(1, len(lists) + 1):
        assert back.fetch(w) == lists[w]
        assert back.length(w) == len(lists[w])
    assert back.doc_starts == c.doc_starts
    s = back.section_sizes()
    assert back.index_bytes() == s["directory"] + s["payload"] + s["samples"]
    assert len(data) > back.index_bytes()


@pytest.mark.parametrize("rep", ["vbyte+CM", "vbyte+ST", "hybrid-bitmap", "repair-skip", "repair-skip-CM",
                                 "repair-skip-ST"])
def test_accessors_probe_like_a_set(small_corpora, rep):
    c = small_corpora[POSITIONAL]
    img = build_index(c, rep, IndexParams(k=1, B=2))
    rng = np.random.default_rng(0)
    lists = build_lists(c)
    for w in range(1, len(lists) + 1, 3):
        vals = set(lists[w])
        last = max(vals)
        probes = sorted(set(rng.integers(1, c.total_tokens + 2, size=40).tolist()) | set(lists[w][::3]))
        if isinstance(img.store, RepairStore):
            acc = img.store.cursor(w - 1)
        else:
            acc = img.accessor(w)
        for d in probes:
            r = acc.probe(d)
            if d in vals:
                assert r == FOUND, (w, d)
            elif d > last:
                assert r == END, (w, d)
            else:
                assert r in (MISS, END) and (r == MISS or d > last)


def test_bad_images():
    with pytest.raises(IndexFormatError):
        IndexImage.from_bytes(b"nope")
    img = materialize(ingest(["a b", "b c"]), EXAMPLE, "vbyte")
    data = img.to_bytes()
    with pytest.raises(IndexFormatError):
        IndexImage.from_bytes(data[:-3])
    with pytest.raises(IndexFormatError):
        IndexImage.from_bytes(data[:4] + b"\x09" + data[5:])


def test_unknown_representation(small_corpora):
    with pytest.raises(UnsupportedRepresentation):
        build_index(small_corpora[NONPOSITIONAL], "gzip")


def test_repair_skip_costs_little_space(small_corpora):
    c = small_corpora[NONPOSITIONAL]
    a = build_index(c, "repair").index_bytes()
    b = build_index(c, "repair-skip").index_bytes()
    assert a <= b < 1.5 * a
