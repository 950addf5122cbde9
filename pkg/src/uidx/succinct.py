"""Plain bitvectors with rank/select, and gap-encoded sparse bitmaps.

Positions are 1-based throughout: ``rank(b, i)`` counts b-bits in
``[1, i]`` and ``select(b, j)`` returns the position of the j-th b-bit.
"""
from __future__ import annotations

import bisect
import struct
from typing import Iterable, List, Sequence

import numpy as np

from .codecs import vbyte_decode_from, vbyte_encode

SUPERBLOCK_BITS = 512
WORD_BITS = 64
_WORDS_PER_SB = SUPERBLOCK_BITS // WORD_BITS


class BitVector:
    """Static bitvector with a two-level rank directory.

    Superblocks of 512 bits hold absolute counts of ones; each 64-bit
    word holds a count relative to its superblock.  ``select`` binary
    searches the directory and finishes with a scan inside one word.
    """

    def __init__(self, bits: Iterable[int] | np.ndarray, n: int | None = None):
        arr = np.asarray(bits if isinstance(bits, np.ndarray) else list(bits), dtype=np.uint8)
        if n is None:
            n = len(arr)
        self.n = int(n)
        nwords = (self.n + WORD_BITS - 1) // WORD_BITS
        padded = np.zeros(nwords * WORD_BITS, dtype=np.uint8)
        padded[:len(arr)] = arr != 0
        # little-endian bit order inside each word: bit i-1 of the vector is bit (i-1)%64
        packed = np.packbits(padded.reshape(-1, 8), axis=1, bitorder="little").reshape(-1)
        self.words = packed.view("<u8").astype(np.uint64) if nwords else np.zeros(0, np.uint64)
        self._build_directory()

    @classmethod
    def from_positions(cls, positions: Iterable[int], n: int) -> "BitVector":
        arr = np.zeros(n, dtype=np.uint8)
        pos = np.fromiter(positions, dtype=np.int64)
        if len(pos):
            arr[pos - 1] = 1
        return cls(arr, n)

    def _build_directory(self) -> None:
        counts = np.array([int(w).bit_count() for w in self.words.tolist()], dtype=np.int64)
        nwords = len(counts)
        nsb = (nwords + _WORDS_PER_SB - 1) // _WORDS_PER_SB
        cum = np.concatenate(([0], np.cumsum(counts)))
        self.superblocks = cum[np.arange(nsb) * _WORDS_PER_SB].astype(np.uint64) if nsb else np.zeros(0, np.uint64)
        rel = cum[:-1] - np.repeat(cum[np.arange(nsb) * _WORDS_PER_SB], _WORDS_PER_SB)[:nwords] if nwords else cum[:0]
        self.blocks = rel.astype(np.uint16)
        self.ones = int(cum[-1])
        # python-level copies for the hot paths
        self._w = self.words.tolist()
        self._cum = (cum[:-1]).tolist()

    def __len__(self) -> int:
        return self.n

    def access(self, i: int) -> int:
        if not 1 <= i <= self.n:
            raise IndexError(f"position {i} out of range [1, {self.n}]")
        i -= 1
        return (self._w[i >> 6] >> (i & 63)) & 1

    def __getitem__(self, i: int) -> int:
        return self.access(i)

    def rank1(self, i: int) -> int:
        if not 0 <= i <= self.n:
            raise IndexError(f"rank position {i} out of range [0, {self.n}]")
        if i == 0:
            return 0
        w = (i - 1) >> 6
        off = (i - 1) & 63
        return self._cum[w] + (self._w[w] & ((2 << off) - 1)).bit_count()

    def rank(self, b: int, i: int) -> int:
        r = self.rank1(i)
        return r if b else i - r

    def select(self, b: int, j: int) -> int:
        total = self.ones if b else self.n - self.ones
        if not 1 <= j <= total:
            raise IndexError(f"select_{b}({j}) out of range [1, {total}]")
        cum = self._cum
        if b:
            # last word whose preceding count is < j
            w = bisect.bisect_left(cum, j) - 1
            word = self._w[w]
            need = j - cum[w]
        else:
            lo, hi = 0, len(cum) - 1
            while lo < hi:
                mid = (lo + hi + 1) // 2
                if mid * 64 - cum[mid] < j:
                    lo = mid
                else:
                    hi = mid - 1
            w = lo
            word = ~self._w[w] & 0xFFFFFFFFFFFFFFFF
            need = j - (w * 64 - cum[w])
        for bit in range(64):
            if (word >> bit) & 1:
                need -= 1
                if need == 0:
                    return w * 64 + bit + 1
        raise AssertionError("rank directory inconsistent")  # pragma: no cover

    def select1(self, j: int) -> int:
        return self.select(1, j)

    def positions(self) -> np.ndarray:
        """1-based positions of all set bits."""
        if not len(self.words):
            return np.zeros(0, dtype=np.int64)
        bits = np.unpackbits(self.words.astype("<u8").view(np.uint8), bitorder="little")[: self.n]
        return np.flatnonzero(bits) + 1

    def to_bits(self) -> List[int]:
        return [self.access(i) for i in range(1, self.n + 1)]

    # serialized form: n, word count, raw words, superblock counts, block counts
    def to_bytes(self) -> bytes:
        head = struct.pack("<QQ", self.n, len(self.words))
        return (head + self.words.astype("<u8").tobytes() + self.superblocks.astype("<u8").tobytes()
                + self.blocks.astype("<u2").tobytes())

    @classmethod
    def from_bytes(cls, data: bytes, offset: int = 0) -> "BitVector":
        n, nw = struct.unpack_from("<QQ", data, offset)
        words = np.frombuffer(data, dtype="<u8", count=nw, offset=offset + 16)
        bits = np.unpackbits(words.view(np.uint8), bitorder="little")[:n]
        return cls(bits, n)

    @staticmethod
    def serialized_size(n: int) -> int:
        nw = (n + WORD_BITS - 1) // WORD_BITS
        nsb = (nw + _WORDS_PER_SB - 1) // _WORDS_PER_SB
        return 16 + 8 * nw + 8 * nsb + 2 * nw

    def nbytes(self) -> int:
        return self.serialized_size(self.n)


class SparseBitmap:
    """Bitmap stored as Vbyte-coded distances between consecutive ones.

    Every ``sample``-th one keeps its absolute position and the byte
    offset of the following gap, so select decodes at most ``sample``
    gaps and rank binary searches the samples first.
    """

    def __init__(self, positions: Sequence[int], n: int, sample: int = 32):
        if sample < 1:
            raise ValueError("sample period must be >= 1")
        self.n = int(n)
        self.sample = sample
        self.ones = len(positions)
        prev = 0
        samples_pos: List[int] = []
        samples_off: List[int] = []
        buf = bytearray()
        for j, p in enumerate(positions):
            if p <= prev or p > self.n:
                raise ValueError("positions must be strictly increasing within [1, n]")
            if j % sample == 0:
                samples_pos.append(p)
                samples_off.append(len(buf))
            else:
                buf += vbyte_encode((p - prev,))
            prev = p
        self.payload = bytes(buf)
        self.sample_pos = samples_pos
        self.sample_off = samples_off

    def select1(self, j: int) -> int:
        if not 1 <= j <= self.ones:
            raise IndexError(f"select_1({j}) out of range [1, {self.ones}]")
        s, r = divmod(j - 1, self.sample)
        p = self.sample_pos[s]
        if r:
            gaps, _ = vbyte_decode_from(self.payload, self.sample_off[s], r)
            p += sum(gaps)
        return p

    def rank1(self, i: int) -> int:
        if not 0 <= i <= self.n:
            raise IndexError(f"rank position {i} out of range [0, {self.n}]")
        s = bisect.bisect_right(self.sample_pos, i) - 1
        if s < 0:
            return 0
        p = self.sample_pos[s]
        j = s * self.sample + 1
        last = min(self.ones, (s + 1) * self.sample)
        off = self.sample_off[s]
        while j < last:
            gaps, off = vbyte_decode_from(self.payload, off, 1)
            p += gaps[0]
            if p > i:
                break
            j += 1
        return j

    def access(self, i: int) -> int:
        r = self.rank1(i)
        return int(r > 0 and self.select1(r) == i)

    def positions(self) -> List[int]:
        out: List[int] = []
        for s, base in enumerate(self.sample_pos):
            cnt = min(self.sample, self.ones - s * self.sample)
            gaps, _ = vbyte_decode_from(self.payload, self.sample_off[s], cnt - 1)
            out.append(base)
            for g in gaps:
                base += g
                out.append(base)
        return out

    def to_bytes(self) -> bytes:
        head = struct.pack("<QQII", self.n, self.ones, self.sample, len(self.payload))
        samples = np.asarray(self.sample_pos, dtype="<u4").tobytes() + np.asarray(self.sample_off, dtype="<u4").tobytes()
        return head + self.payload + samples

    @classmethod
    def from_bytes(cls, data: bytes, offset: int = 0) -> "SparseBitmap":
        n, ones, sample, plen = struct.unpack_from("<QQII", data, offset)
        obj = cls.__new__(cls)
        obj.n, obj.ones, obj.sample = n, ones, sample
        start = offset + 24
        obj.payload = bytes(data[start:start + plen])
        ns = (ones + sample - 1) // sample
        base = start + plen
        obj.sample_pos = np.frombuffer(data, dtype="<u4", count=ns, offset=base).astype(np.int64).tolist()
        obj.sample_off = np.frombuffer(data, dtype="<u4", count=ns, offset=base + 4 * ns).astype(np.int64).tolist()
        return obj

    def nbytes(self) -> int:
        return 24 + len(self.payload) + 8 * len(self.sample_pos)
