import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from uidx.grammar import UnsupportedOperation, repair_compress, repair_rules

# the three lists of the worked example: D C | 2 C B | D B
EXAMPLE = [[1, 2, 1, 2, 1, 4], [2, 1, 4, 2, 2], [1, 2, 1, 2, 2, 2]]


@pytest.fixture(scope="module")
def example():
    return repair_compress(EXAMPLE, skipping=True)


def test_example_layout(example):
    cl, g = example
    assert g.u == 4
    assert "".join(map(str, g.shape.to_bits())) == "11000100100"
    assert [s - g.u if s > g.u else s for s in cl.C] == [1, 9, 2, 9, 6, 1, 6]
    assert g.rules() == {1: (g.u + 2, g.u + 2), 2: (1, 2), 6: (2, 2), 9: (1, 4)}
    assert cl.ptr == [0, 2, 5, 7]


def test_example_expansion(example):
    cl, g = example
    assert g.expand_symbol(2) == [2]
    assert g.expand_symbol(g.u + 1) == [1, 2, 1, 2]
    assert g.expand_symbol(g.u + 9) == [1, 4]
    assert g.expand_symbol(cl.C[5]) == [1, 2, 1, 2]
    for w, lst in enumerate(EXAMPLE):
        assert cl.expand_list(g, w) == lst


def test_example_phrase_sums(example):
    _, g = example
    assert g.phrase_sum(g.u + 1) == 6
    assert g.phrase_sum(g.u + 9) == 5
    assert g.phrase_sum(g.u + 6) == 4
    assert g.phrase_sum(3) == 3


def test_non_skipping_grammar():
    cl, g = repair_compress(EXAMPLE, skipping=False)
    assert len(g.values) == 7  # one value per leaf, no phrase sums
    for w, lst in enumerate(EXAMPLE):
        assert cl.expand_list(g, w) == lst
    with pytest.raises(UnsupportedOperation):
        g.phrase_sum(g.u + 1)


def test_no_repeats():
    cl, g = repair_compress([[5, 3, 8, 1]])
    assert cl.C == [5, 3, 8, 1]
    assert g.rule_count == 0 and len(g) == 0


def test_empty_lists_get_empty_spans():
    cl, g = repair_compress([[], [1, 1, 1, 1], []])
    assert cl.span(0) == (0, 0) and cl.span(2)[0] == cl.span(2)[1]
    assert cl.expand_list(g, 1) == [1, 1, 1, 1]


def test_invalid_symbol(example):
    _, g = example
    with pytest.raises(ValueError):
        g.expand_symbol(g.u + 3)  # a leaf position, not a rule


def test_pairs_do_not_cross_lists():
    # "1 2" occurs once in each list, but each list is too short to pair with its neighbour
    reduced, rules, _ = repair_rules([[1], [2], [1], [2]])
    assert rules == []
    assert reduced == [[1], [2], [1], [2]]


def test_overlapping_run_counts_once():
    # 1 1 1 contains "1 1" only once without overlap
    _, rules, _ = repair_rules([[1, 1, 1], [3, 4]])
    assert rules == []


def check_invariants(lists, cl, g):
    for w, lst in enumerate(lists):
        assert cl.expand_list(g, w) == lst
    for p, (a, b) in g.rules().items():
        exp = g.expand_symbol(g.u + p)
        assert g.phrase_sum(g.u + p) == sum(exp)
    # no pair of adjacent symbols repeats across the final sequence
    seen = {}
    for w in range(len(lists)):
        syms = cl.symbols(w)
        for i in range(len(syms) - 1):
            pair = (syms[i], syms[i + 1])
            if pair[0] == pair[1] and i > 0 and syms[i - 1] == pair[0] and seen.get(pair) == (w, i - 1):
                continue  # overlapping occurrence inside a run
            assert pair not in seen or pair[0] == pair[1], pair
            seen[pair] = (w, i)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.lists(st.integers(1, 4), max_size=40), min_size=1, max_size=8))
def test_random_identity(lists):
    cl, g = repair_compress(lists)
    check_invariants(lists, cl, g)


def test_repetitive_stream():
    rng = np.random.default_rng(7)
    base = rng.integers(1, 6, size=50).tolist()
    lists = []
    for _ in range(30):
        cur = list(base)
        for _ in range(3):
            cur[int(rng.integers(len(cur)))] = int(rng.integers(1, 9))
        lists.append(cur)
    cl, g = repair_compress(lists)
    check_invariants(lists, cl, g)
    assert len(cl.C) < sum(map(len, lists)) // 5
