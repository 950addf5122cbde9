"""LZ-End parsing with random-access extraction, and the Vbyte-Lzend list store.

A phrase is a copy of some text that ends exactly where an earlier phrase
ends, followed by one explicit byte.  Each phrase keeps only the id of
the phrase where its source ends (0 = no source) and its trailing byte;
phrase lengths live in a sparse bitmap marking phrase ends.

The parser is greedy.  It walks an FM-index of the reversed text so that
extending the current phrase by one byte is one backward-search step,
and keeps the ranks of all phrase ends seen so far to test admissibility.
"""
from __future__ import annotations

import bisect
import struct
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from .codecs import bit_width, pack_fixed, unpack_fixed, vbyte_decode, vbyte_encode
from .succinct import SparseBitmap


def suffix_array(values: np.ndarray) -> np.ndarray:
    """Suffix array by prefix doubling; a suffix that runs out sorts first."""
    n = len(values)
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    rank = values.astype(np.int64) + 1
    idx = np.arange(n)
    k = 1
    while True:
        second = np.zeros(n, dtype=np.int64)
        second[: n - k] = rank[k:] if k < n else second[:0]
        sa = np.lexsort((second, rank))
        r1, r2 = rank[sa], second[sa]
        diff = np.empty(n, dtype=np.int64)
        diff[0] = 1
        diff[1:] = (r1[1:] != r1[:-1]) | (r2[1:] != r2[:-1])
        new = np.empty(n, dtype=np.int64)
        new[sa] = np.cumsum(diff)
        rank = new
        if rank.max() == n or k >= n:
            return sa
        k *= 2


class _MinTree:
    """Point-update / range-min segment tree over ``size`` slots."""

    def __init__(self, size: int, inf: int):
        self.n = 1
        while self.n < size:
            self.n *= 2
        self.inf = inf
        self.t = [inf] * (2 * self.n)

    def update(self, i: int, v: int) -> None:
        i += self.n
        t = self.t
        t[i] = min(t[i], v)
        i >>= 1
        while i:
            m = min(t[2 * i], t[2 * i + 1])
            if t[i] == m:
                break
            t[i] = m
            i >>= 1

    def query(self, lo: int, hi: int) -> int:
        """Minimum over slots ``lo..hi`` inclusive."""
        res = self.inf
        lo += self.n
        hi += self.n + 1
        t = self.t
        while lo < hi:
            if lo & 1:
                res = min(res, t[lo])
                lo += 1
            if hi & 1:
                hi -= 1
                res = min(res, t[hi])
            lo >>= 1
            hi >>= 1
        return res


@dataclass
class LzEndParse:
    """Phrase sources, trailing bytes and the phrase-end bitmap of a text of length ``n``."""

    n: int
    sources: List[int]
    symbols: bytes
    ends: SparseBitmap

    @property
    def phrase_count(self) -> int:
        return len(self.sources)

    def phrase_end(self, q: int) -> int:
        return self.ends.select1(q) if q else 0

    def phrases(self) -> List[Tuple[int, int, int]]:
        """(source id, trailing byte, length) for every phrase."""
        out = []
        prev = 0
        for q, end in enumerate(self.ends.positions(), start=1):
            out.append((self.sources[q - 1], self.symbols[q - 1], end - prev))
            prev = end
        return out

    def _emit_suffix(self, q: int, length: int, out: bytearray) -> None:
        """Append the ``length`` bytes that end where phrase ``q`` ends."""
        ends_cache = {0: 0}

        def end(p: int) -> int:
            e = ends_cache.get(p)
            if e is None:
                e = self.ends.select1(p)
                ends_cache[p] = e
            return e

        src = self.sources
        sym = self.symbols
        stack = [(q, length)]
        while stack:
            q, length = stack.pop()
            if length < 0:
                out.append(sym[q - 1])
                continue
            while length > 0:
                m = min(length, end(q) - end(q - 1))
                stack.append((q, -1))
                if m > 1:
                    stack.append((src[q - 1], m - 1))
                length -= m
                q -= 1

    def extract(self, i: int, j: int) -> bytes:
        """Bytes ``i..j`` (1-based, inclusive) of the parsed text."""
        if not 1 <= i <= j <= self.n:
            raise IndexError(f"range [{i}, {j}] outside [1, {self.n}]")
        p = self.ends.rank1(j - 1) + 1
        jp = self.ends.select1(p)
        out = bytearray()
        self._emit_suffix(p, jp - i + 1, out)
        return bytes(out[: j - i + 1])

    def decode(self) -> bytes:
        return self.extract(1, self.n) if self.n else b""

    def nbytes(self) -> int:
        width = bit_width(len(self.sources))
        return 17 + (width * len(self.sources) + 7) // 8 + len(self.symbols) + self.ends.nbytes()

    def to_bytes(self) -> bytes:
        z = len(self.sources)
        width = bit_width(z)
        return (struct.pack("<QQB", self.n, z, width) + pack_fixed(self.sources, width)
                + self.symbols + self.ends.to_bytes())

    @classmethod
    def from_bytes(cls, data: bytes, offset: int = 0) -> "LzEndParse":
        n, z, width = struct.unpack_from("<QQB", data, offset)
        off = offset + 17
        sources = unpack_fixed(data, width, z, off)
        off += (width * z + 7) // 8
        symbols = bytes(data[off:off + z])
        ends = SparseBitmap.from_bytes(data, off + z)
        return cls(n, sources, symbols, ends)


def lzend_parse(data: bytes, sample: int = 32) -> LzEndParse:
    """Greedy LZ-End parse; among equally long sources the smallest phrase id wins."""
    n = len(data)
    if n == 0:
        raise ValueError("cannot parse an empty input")
    text = np.frombuffer(data, dtype=np.uint8)
    # reversed text plus a terminator smaller than every byte
    arr = np.empty(n + 1, dtype=np.int64)
    arr[:n] = text[::-1].astype(np.int64) + 1
    arr[n] = 0
    sa = suffix_array(arr)
    isa = np.empty(n + 1, dtype=np.int64)
    isa[sa] = np.arange(n + 1)
    bwt = arr[(sa - 1) % (n + 1)]
    counts = np.bincount(arr, minlength=257)
    first = np.concatenate(([0], np.cumsum(counts)[:-1])).tolist()
    occ = [np.flatnonzero(bwt == c).tolist() for c in range(257)]

    # sparse table for range-max over the suffix array
    table = [sa.astype(np.int64)]
    span = 1
    while 2 * span <= n + 1:
        prev = table[-1]
        table.append(np.maximum(prev[:-span], prev[span:]))
        span *= 2

    def range_max(lo: int, hi: int) -> int:
        k = (hi - lo + 1).bit_length() - 1
        t = table[k]
        a = t[lo]
        b = t[hi - (1 << k) + 1]
        return int(a if a > b else b)

    bl = bisect.bisect_left
    marks: List[int] = []
    tree = _MinTree(n + 1, 1 << 62)
    sources: List[int] = []
    symbols = bytearray()
    ends: List[int] = []
    raw = data
    i = 0
    while i < n:
        sp, ep = 0, n
        best = 0
        best_range = (0, 0)
        l = 0
        limit = n - 1 - i
        floor = n - i
        while l < limit:
            c = raw[i + l] + 1
            oc = occ[c]
            sp = first[c] + bl(oc, sp)
            ep = first[c] + bl(oc, ep + 1) - 1
            if sp > ep or range_max(sp, ep) < floor:
                break
            l += 1
            k = bl(marks, sp)
            if k < len(marks) and marks[k] <= ep:
                best = l
                best_range = (sp, ep)
        src = tree.query(*best_range) if best else 0
        end = i + best  # 0-based index of the phrase's last byte
        sources.append(src)
        symbols.append(raw[end])
        ends.append(end + 1)
        r = int(isa[n - 1 - end])
        bisect.insort(marks, r)
        tree.update(r, len(sources))
        i = end + 1
    return LzEndParse(n, sources, bytes(symbols), SparseBitmap(ends, n, sample))


@dataclass
class VbyteLzendStore:
    """All gap lists Vbyte-encoded, concatenated and LZ-End parsed as one text."""

    parse: LzEndParse
    ptr: List[int]  # byte offsets into the Vbyte text, one per list plus a sentinel
    lengths: List[int]

    @classmethod
    def build(cls, gap_lists: Sequence[Sequence[int]], sample: int = 32) -> "VbyteLzendStore":
        buf = bytearray()
        ptr = [0]
        for gaps in gap_lists:
            buf += vbyte_encode(gaps)
            ptr.append(len(buf))
        if not buf:
            buf = bytearray(b"\x80")  # keep the parse non-empty; no list points here
        return cls(lzend_parse(bytes(buf), sample), ptr, [len(g) for g in gap_lists])

    def fetch_list(self, w: int) -> List[int]:
        if not 0 <= w < len(self.lengths):
            return []
        a, b = self.ptr[w], self.ptr[w + 1]
        if a == b:
            return []
        return vbyte_decode(self.parse.extract(a + 1, b), self.lengths[w])
