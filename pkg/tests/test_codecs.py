import random

import pytest
from hypothesis import given, settings, strategies as st

from uidx.codecs import (SIMPLE9_ESCAPE, BitReader, Codec, CorruptStreamError, collapse_runs, decode_gaps,
                         encode_gaps, from_gaps, pack_fixed, rice_decode, rice_encode, rice_parameter,
                         rice_runs_decode, rice_runs_encode, simple9_decode, simple9_encode, to_gaps,
                         unpack_fixed, vbyte_decode, vbyte_encode)


def rice_bits(gaps, b):
    """Code length of a Rice stream, from the definition."""
    return sum(((x - 1) >> b) + 1 + b for x in gaps)


def test_vbyte_examples():
    assert vbyte_encode([1]) == bytes([0x81])
    assert vbyte_encode([0]) == bytes([0x80])
    assert vbyte_encode([300]) == bytes([0x2C, 0x82])
    assert vbyte_decode(bytes([0x2C, 0x82, 0x81]), 2) == [300, 1]


def test_vbyte_truncated():
    with pytest.raises(CorruptStreamError):
        vbyte_decode(bytes([0x2C]), 1)
    with pytest.raises(ValueError):
        vbyte_encode([1 << 32])


def test_rice_examples():
    assert BitReader(rice_encode([1], 0)).bits[:1] == "1"
    assert BitReader(rice_encode([7], 2)).bits[:4] == "0110"
    assert rice_decode(rice_encode([7], 2), 1, 2) == [7]


def test_rice_unary_limit():
    data = rice_encode([1000], 0)
    with pytest.raises(CorruptStreamError):
        rice_decode(data, 1, 0, max_quotient=100)
    with pytest.raises(CorruptStreamError):
        rice_decode(b"\x00\x00", 1, 0)


def test_rice_parameter():
    assert rice_parameter([]) == 0
    assert rice_parameter([1, 1, 1]) == 0
    assert rice_parameter([8, 8]) == 3
    assert rice_parameter([1 << 40]) == 30


def test_rice_runs_examples():
    assert collapse_runs([5, 1, 1, 1, 7]) == [5, 1, 3, 7]
    assert rice_runs_encode([5, 1, 1, 1, 7], 1) == rice_encode([5, 1, 3, 7], 1)
    assert rice_runs_encode([1], 0) == rice_encode([1, 1], 0)
    assert rice_runs_encode([4, 9, 2], 2) == rice_encode([4, 9, 2], 2)
    assert rice_runs_decode(rice_runs_encode([5, 1, 1, 1, 7], 1), 5, 1) == [5, 1, 1, 1, 7]


def test_rice_runs_rejects_overlong_run():
    data = rice_encode([1, 5], 0)
    with pytest.raises(CorruptStreamError):
        rice_runs_decode(data, 3, 0)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.one_of(st.integers(2, 40), st.integers(3, 30).map(lambda k: [1] * k)), min_size=1, max_size=30),
       st.integers(1, 6))
def test_rice_runs_never_longer_on_long_runs(parts, b):
    gaps = []
    for p in parts:
        if isinstance(p, list):
            if gaps and gaps[-1] == 1:
                gaps.append(2)
            gaps.extend(p)
        else:
            gaps.append(p)
    assert rice_bits(collapse_runs(gaps), b) <= rice_bits(gaps, b)


def test_simple9_examples():
    w = simple9_encode([1] * 28)
    assert len(w) == 1 and w[0] >> 28 == 0
    assert simple9_encode([1 << 28]) == [(8 << 28) | SIMPLE9_ESCAPE, 1 << 28]
    w = simple9_encode([2, 3])
    assert len(w) == 1 and w[0] >> 28 == 7
    assert simple9_decode(w, 2) == [2, 3]


def test_simple9_rejects_zero():
    with pytest.raises(ValueError):
        simple9_encode([0])


def test_simple9_escape_extremes():
    gaps = [SIMPLE9_ESCAPE - 1, SIMPLE9_ESCAPE, (1 << 32) - 1, 1, 5]
    assert simple9_decode(simple9_encode(gaps), len(gaps)) == gaps


gap_values = st.one_of(st.integers(1, 8), st.integers(1, 1 << 20), st.integers((1 << 28) - 3, (1 << 28) + 3),
                       st.integers((1 << 32) - 4, (1 << 32) - 1))


@settings(max_examples=300, deadline=None)
@given(st.lists(gap_values, max_size=60), st.sampled_from(list(Codec)))
def test_roundtrip_property(gaps, codec):
    enc = encode_gaps(codec, gaps, sum(gaps))
    assert enc.gaps() == gaps
    assert enc.values() == from_gaps(gaps)


@pytest.mark.parametrize("codec", [Codec.RICE, Codec.RICE_RUNS])
def test_fixed_rice_parameter(codec):
    gaps = [random.Random(3).randint(1, 100) for _ in range(50)]
    enc = encode_gaps(codec, gaps, 10 ** 6, param=4)
    assert enc.param == 4
    assert decode_gaps(codec, enc.payload, len(gaps), 4) == gaps


def test_gaps_roundtrip():
    assert to_gaps([1, 3, 4, 6, 8, 10]) == [1, 2, 1, 2, 2, 2]
    assert from_gaps([1, 2, 1, 2, 2, 2]) == [1, 3, 4, 6, 8, 10]


@pytest.mark.parametrize("width", [1, 3, 14, 32, 63])
def test_pack_fixed(width):
    rng = random.Random(width)
    vals = [rng.randrange(1 << width) for _ in range(77)]
    assert unpack_fixed(pack_fixed(vals, width), width, len(vals)) == vals
    with pytest.raises(ValueError):
        pack_fixed([1 << width], width)
