"""Integer codecs for d-gap lists: Vbyte, Rice, Rice-Runs and Simple9.

All codecs operate on gap lists (the first element is the absolute first
value, the rest are differences).  Bit streams are written MSB-first
within each byte.
"""
from __future__ import annotations

import enum
import struct
from dataclasses import dataclass
from typing import Iterable, List, Sequence, Tuple

import numpy as np

MAX_U32 = (1 << 32) - 1


class CorruptStreamError(ValueError):
    """Raised when an encoded payload cannot be decoded."""


def to_gaps(values: Sequence[int]) -> List[int]:
    """Differential form of an increasing list."""
    out = []
    prev = 0
    for v in values:
        out.append(v - prev)
        prev = v
    return out


def from_gaps(gaps: Iterable[int], start: int = 0) -> List[int]:
    out = []
    acc = start
    for g in gaps:
        acc += g
        out.append(acc)
    return out


# --------------------------------------------------------------------- Vbyte

def vbyte_encode(gaps: Iterable[int]) -> bytes:
    """7-bit chunks, least significant first; the final byte has its high bit set."""
    out = bytearray()
    for x in gaps:
        if x < 0 or x > MAX_U32:
            raise ValueError(f"vbyte value out of range: {x}")
        while x >= 128:
            out.append(x & 0x7F)
            x >>= 7
        out.append(x | 0x80)
    return bytes(out)


def vbyte_decode_from(data: bytes, offset: int, count: int) -> Tuple[List[int], int]:
    """Decode ``count`` values starting at byte ``offset``; returns (values, new offset)."""
    out = []
    append = out.append
    n = len(data)
    pos = offset
    for _ in range(count):
        x = 0
        shift = 0
        while True:
            if pos >= n:
                raise CorruptStreamError("truncated vbyte payload")
            b = data[pos]
            pos += 1
            if b & 0x80:
                x |= (b & 0x7F) << shift
                break
            x |= b << shift
            shift += 7
        append(x)
    return out, pos


def vbyte_decode(data: bytes, count: int) -> List[int]:
    return vbyte_decode_from(data, 0, count)[0]


# ------------------------------------------------------------------ bit I/O

class BitWriter:
    """Append-only MSB-first bit sink."""

    def __init__(self) -> None:
        self._buf = bytearray()
        self._acc = 0
        self._nacc = 0
        self.nbits = 0

    def write(self, value: int, width: int) -> None:
        if width == 0:
            return
        self._acc = (self._acc << width) | (value & ((1 << width) - 1))
        self._nacc += width
        self.nbits += width
        if self._nacc >= 64:
            extra = self._nacc & 7
            full = self._nacc - extra
            self._buf += (self._acc >> extra).to_bytes(full // 8, "big")
            self._acc &= (1 << extra) - 1
            self._nacc = extra

    def write_unary(self, q: int) -> None:
        """q zeros followed by a one."""
        while q >= 32:
            self.write(0, 32)
            q -= 32
        self.write(1, q + 1)

    def getvalue(self) -> bytes:
        out = bytearray(self._buf)
        if self._nacc:
            pad = (-self._nacc) % 8
            out += (self._acc << pad).to_bytes((self._nacc + pad) // 8, "big")
        return bytes(out)


class BitReader:
    """MSB-first reader; the stream is expanded to a '0'/'1' string for fast scans."""

    def __init__(self, data: bytes, offset_bits: int = 0) -> None:
        self.bits = bin(int.from_bytes(data, "big"))[2:].zfill(8 * len(data)) if data else ""
        self.pos = offset_bits

    def read(self, width: int) -> int:
        if width == 0:
            return 0
        end = self.pos + width
        if end > len(self.bits):
            raise CorruptStreamError("truncated bit stream")
        v = int(self.bits[self.pos:end], 2)
        self.pos = end
        return v

    def read_unary(self, limit: int) -> int:
        i = self.bits.find("1", self.pos)
        if i < 0:
            raise CorruptStreamError("unterminated unary code")
        q = i - self.pos
        if q > limit:
            raise CorruptStreamError(f"unary run {q} exceeds limit {limit}")
        self.pos = i + 1
        return q


# --------------------------------------------------------------------- Rice

def rice_parameter(gaps: Sequence[int]) -> int:
    """floor(log2(mean gap)) clamped to [0, 30]."""
    if not gaps:
        return 0
    mean = sum(gaps) / len(gaps)
    if mean < 2:
        return 0
    return min(30, int(mean).bit_length() - 1)


def _rice_limit(b: int) -> int:
    return MAX_U32 >> b


def _rice_put(w: BitWriter, x: int, b: int) -> None:
    if x < 1:
        raise ValueError(f"rice codes need gaps >= 1, got {x}")
    x -= 1
    w.write_unary(x >> b)
    w.write(x, b)


def rice_encode(gaps: Iterable[int], b: int) -> bytes:
    w = BitWriter()
    for x in gaps:
        _rice_put(w, x, b)
    return w.getvalue()


def rice_decode(data: bytes, count: int, b: int, max_quotient: int | None = None) -> List[int]:
    limit = _rice_limit(b) if max_quotient is None else max_quotient
    r = BitReader(data)
    out = []
    for _ in range(count):
        q = r.read_unary(limit)
        out.append(((q << b) | r.read(b)) + 1)
    return out


def collapse_runs(gaps: Sequence[int]) -> List[int]:
    """Symbol stream emitted by Rice-Runs: every maximal run of k ones becomes ``1, k``."""
    out = []
    i = 0
    n = len(gaps)
    while i < n:
        g = gaps[i]
        if g == 1:
            j = i
            while j < n and gaps[j] == 1:
                j += 1
            out.append(1)
            out.append(j - i)
            i = j
        else:
            out.append(g)
            i += 1
    return out


def rice_runs_encode(gaps: Sequence[int], b: int) -> bytes:
    return rice_encode(collapse_runs(gaps), b)


def rice_runs_decode(data: bytes, count: int, b: int, max_quotient: int | None = None) -> List[int]:
    limit = _rice_limit(b) if max_quotient is None else max_quotient
    r = BitReader(data)
    out: List[int] = []
    while len(out) < count:
        x = ((r.read_unary(limit) << b) | r.read(b)) + 1
        if x == 1:
            k = ((r.read_unary(limit) << b) | r.read(b)) + 1
            if len(out) + k > count:
                raise CorruptStreamError("run overflows element count")
            out.extend([1] * k)
        else:
            out.append(x)
    return out


# ------------------------------------------------------------------ Simple9

# (slots, bits) in density order; the selector is the index in this table.
SIMPLE9_MODES = ((28, 1), (14, 2), (9, 3), (7, 4), (5, 5), (4, 7), (3, 9), (2, 14), (1, 28))
SIMPLE9_ESCAPE = (1 << 28) - 1


def simple9_encode(gaps: Sequence[int]) -> List[int]:
    """Greedy Simple9 packing into 32-bit words (selector in the top 4 bits)."""
    words: List[int] = []
    n = len(gaps)
    i = 0
    for g in gaps:
        if g < 1 or g > MAX_U32:
            raise ValueError(f"simple9 needs 1 <= gap < 2^32, got {g}")
    while i < n:
        if gaps[i] >= SIMPLE9_ESCAPE:
            words.append((8 << 28) | SIMPLE9_ESCAPE)
            words.append(gaps[i])
            i += 1
            continue
        for sel, (slots, bits) in enumerate(SIMPLE9_MODES):
            if i + slots > n:
                continue
            limit = 1 << bits
            chunk = gaps[i:i + slots]
            if max(chunk) < limit:
                word = sel << 28
                shift = 0
                for g in chunk:
                    word |= g << shift
                    shift += bits
                words.append(word)
                i += slots
                break
    return words


def simple9_decode(words: Sequence[int], count: int) -> List[int]:
    out: List[int] = []
    i = 0
    nw = len(words)
    while len(out) < count:
        if i >= nw:
            raise CorruptStreamError("truncated simple9 payload")
        w = words[i]
        i += 1
        sel = w >> 28
        if sel > 8:
            raise CorruptStreamError(f"bad simple9 selector {sel}")
        slots, bits = SIMPLE9_MODES[sel]
        mask = (1 << bits) - 1
        if sel == 8 and (w & mask) == SIMPLE9_ESCAPE:
            if i >= nw:
                raise CorruptStreamError("missing simple9 escape word")
            out.append(words[i])
            i += 1
            continue
        take = min(slots, count - len(out))
        for _ in range(take):
            out.append(w & mask)
            w >>= bits
    return out


def simple9_to_bytes(words: Sequence[int]) -> bytes:
    return struct.pack(f"<{len(words)}I", *words)


def simple9_from_bytes(data: bytes) -> List[int]:
    if len(data) % 4:
        raise CorruptStreamError("simple9 payload not word aligned")
    return list(struct.unpack(f"<{len(data) // 4}I", data))


# ------------------------------------------------------------- EncodedList

class Codec(enum.IntEnum):
    VBYTE = 1
    RICE = 2
    RICE_RUNS = 3
    SIMPLE9 = 4


@dataclass(frozen=True)
class EncodedList:
    codec: Codec
    payload: bytes
    count: int
    universe: int
    param: int = 0

    def gaps(self) -> List[int]:
        return decode_gaps(self.codec, self.payload, self.count, self.param)

    def values(self) -> List[int]:
        return from_gaps(self.gaps())


def encode_gaps(codec: Codec, gaps: Sequence[int], universe: int, param: int | None = None) -> EncodedList:
    """Encode a gap list; ``param`` is the Rice parameter (None picks it per list)."""
    if codec is Codec.VBYTE:
        return EncodedList(codec, vbyte_encode(gaps), len(gaps), universe)
    if codec is Codec.RICE:
        b = rice_parameter(gaps) if param is None else param
        return EncodedList(codec, rice_encode(gaps, b), len(gaps), universe, b)
    if codec is Codec.RICE_RUNS:
        b = rice_parameter(collapse_runs(gaps)) if param is None else param
        return EncodedList(codec, rice_runs_encode(gaps, b), len(gaps), universe, b)
    if codec is Codec.SIMPLE9:
        return EncodedList(codec, simple9_to_bytes(simple9_encode(gaps)), len(gaps), universe)
    raise ValueError(f"unknown codec {codec!r}")


def decode_gaps(codec: Codec, payload: bytes, count: int, param: int = 0) -> List[int]:
    if count == 0:
        return []
    if codec is Codec.VBYTE:
        return vbyte_decode(payload, count)
    if codec is Codec.RICE:
        return rice_decode(payload, count, param)
    if codec is Codec.RICE_RUNS:
        return rice_runs_decode(payload, count, param)
    if codec is Codec.SIMPLE9:
        return simple9_decode(simple9_from_bytes(payload), count)
    raise ValueError(f"unknown codec {codec!r}")


# ------------------------------------------------------- fixed-width arrays

def bit_width(max_value: int) -> int:
    return max(1, int(max_value).bit_length())


def pack_fixed(values: Sequence[int], width: int) -> bytes:
    """Pack integers into ``width``-bit fields, MSB-first, zero padded to a byte."""
    if not len(values):
        return b""
    arr = np.asarray(values, dtype=np.uint64)
    if width < 64 and int(arr.max()) >> width:
        raise ValueError(f"value does not fit in {width} bits")
    shifts = np.arange(width - 1, -1, -1, dtype=np.uint64)
    bits = ((arr[:, None] >> shifts[None, :]) & np.uint64(1)).astype(np.uint8)
    return np.packbits(bits.reshape(-1)).tobytes()


def unpack_fixed(data: bytes, width: int, count: int, offset: int = 0) -> List[int]:
    if count == 0:
        return []
    nbytes = (count * width + 7) // 8
    raw = np.frombuffer(data, dtype=np.uint8, count=nbytes, offset=offset)
    bits = np.unpackbits(raw)[: count * width].reshape(count, width).astype(np.uint64)
    weights = np.uint64(1) << np.arange(width - 1, -1, -1, dtype=np.uint64)
    return (bits * weights).sum(axis=1).astype(np.int64).tolist()
