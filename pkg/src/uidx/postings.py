"""Posting lists and their materialization under every representation.

An index image keeps, per word, a directory entry (where its data starts
and how many postings it has), a payload, and optional search samples.
On disk all sections are length-prefixed and little-endian.
"""
from __future__ import annotations

import bisect
import struct
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .codecs import (Codec, CorruptStreamError, bit_width, decode_gaps, encode_gaps, from_gaps, pack_fixed,
                     to_gaps, unpack_fixed, vbyte_decode_from, vbyte_encode)
from .corpus import ABSENT, NONPOSITIONAL, POSITIONAL, Corpus
from .grammar import CompressedLists, Grammar, repair_compress
from .lzend import LzEndParse, VbyteLzendStore
from .succinct import BitVector

REPRESENTATIONS = ("vbyte", "rice", "rice-runs", "simple9", "vbyte+CM", "vbyte+ST", "hybrid-bitmap",
                   "repair", "repair-skip", "repair-skip-CM", "repair-skip-ST", "vbyte-lzend")
REPR_TAGS = {name: i + 1 for i, name in enumerate(REPRESENTATIONS)}
MODE_TAGS = {NONPOSITIONAL: 0, POSITIONAL: 1}

MAGIC = b"UIDX"
FORMAT_VERSION = 1

FOUND, MISS, END = 1, 0, -1


class UnsupportedRepresentation(ValueError):
    pass


class IndexFormatError(ValueError):
    pass


# ------------------------------------------------------------ posting lists

@dataclass
class PostingLists:
    """``lists[w - 1]`` is the increasing list of word id ``w``."""

    lists: List[List[int]]
    universe: int
    mode: str

    def __len__(self) -> int:
        return len(self.lists)

    def __getitem__(self, w: int) -> List[int]:
        if 1 <= w <= len(self.lists):
            return self.lists[w - 1]
        return []

    def gaps(self, w: int) -> List[int]:
        return to_gaps(self[w])


def build_nonpositional(corpus: Corpus) -> PostingLists:
    lists: List[List[int]] = [[] for _ in range(len(corpus.vocabulary))]
    for d in corpus.documents:
        for t in sorted(set(d.tokens)):
            lists[t - 1].append(d.doc_id)
    return PostingLists(lists, corpus.num_docs, NONPOSITIONAL)


def build_positional(corpus: Corpus) -> PostingLists:
    lists: List[List[int]] = [[] for _ in range(len(corpus.vocabulary))]
    for d, start in zip(corpus.documents, corpus.doc_starts):
        for off, t in enumerate(d.tokens):
            lists[t - 1].append(start + off)
    return PostingLists(lists, corpus.total_tokens, POSITIONAL)


def build_lists(corpus: Corpus) -> PostingLists:
    return build_positional(corpus) if corpus.mode == POSITIONAL else build_nonpositional(corpus)


# ------------------------------------------------------------ parameters

@dataclass(frozen=True)
class IndexParams:
    k: int = 4  # CM: one sample every k*ceil(log2 len) entries
    B: int = 16  # ST: average entries per bucket
    rice_b: Optional[int] = None  # None chooses the Rice parameter per list
    ds: int = 32  # LZ-End phrase-end bitmap sampling

    def __post_init__(self):
        if self.k < 1 or self.B < 1 or self.ds < 1:
            raise ValueError("k, B and ds must be positive")
        if self.rice_b is not None and not 0 <= self.rice_b <= 30:
            raise ValueError("rice_b must be in [0, 30]")


def ceil_log2(x: int) -> int:
    return (x - 1).bit_length() if x > 1 else 0


def cm_step(length: int, k: int) -> int:
    return k * ceil_log2(length)


def cm_sampled(length: int, k: int) -> bool:
    step = cm_step(length, k)
    return step > 0 and length >= 2 * step


def st_step(universe: int, B: int, length: int) -> int:
    """Smallest power of two >= universe*B/length."""
    if length <= 0:
        return 1
    e = 0
    while (length << e) < universe * B:
        e += 1
    return 1 << e


def st_bucket(x: int, step: int) -> int:
    return -(-x // step)


def st_samples_over_C(symbols: Sequence[int], grammar: Grammar, step: int) -> List[Tuple[int, int]]:
    """Bucket samples over one list's span of C.

    Bucket ``b`` covers values ``((b-1)*step, b*step]``; its sample is the
    1-based entry holding the first value above ``(b-1)*step`` together
    with the absolute value preceding that entry.
    """
    out: List[Tuple[int, int]] = []
    s = 0
    nxt = 0  # lower bound (b-1)*step of the next bucket to emit
    for e, sym in enumerate(symbols, start=1):
        w = grammar.phrase_sum(sym)
        while s <= nxt < s + w:
            out.append((s, e))
            nxt += step
        s += w
    return out


# ------------------------------------------------------------ accessors
# Every accessor answers ``probe(d)`` for non-decreasing d: FOUND if d is in
# the list, MISS if not, END once every value is below d.  Accessors that
# also allow random access expose ``__len__``/``__getitem__``.

class PlainList:
    def __init__(self, values: Sequence[int], counters=None):
        self.v = values
        self.i = 0
        self.counters = counters

    def __len__(self) -> int:
        return len(self.v)

    def __getitem__(self, i: int) -> int:
        return self.v[i]

    def values(self) -> List[int]:
        return list(self.v)

    def probe(self, d: int) -> int:
        v = self.v
        n = len(v)
        i = self.i
        if i >= n:
            return END
        # exponential search from the last position
        step = 1
        hi = i
        while hi < n and v[hi] < d:
            i = hi + 1
            hi = i + step
            step *= 2
            if self.counters is not None:
                self.counters.comparisons += 1
        self.i = i = bisect.bisect_left(v, d, i, min(hi, n))
        if i >= n:
            return END
        return FOUND if v[i] == d else MISS


class VbyteBlocks:
    """Vbyte list split into blocks, each with its preceding value and byte offset."""

    def __init__(self, payload: bytes, base: int, count: int, step: int,
                 prev: Sequence[int], offs: Sequence[int], counters=None):
        self.payload = payload
        self.base = base
        self.count = count
        self.step = step
        self.prev = prev
        self.offs = offs
        self.counters = counters
        self._j = -1
        self._blk: List[int] = []
        self._i = 0  # index inside the current block

    def __len__(self) -> int:
        return self.count

    def _load(self, j: int) -> List[int]:
        if j != self._j:
            n = min(self.step, self.count - j * self.step)
            gaps, _ = vbyte_decode_from(self.payload, self.base + self.offs[j], n)
            self._blk = from_gaps(gaps, self.prev[j])
            self._j = j
            self._i = 0
            if self.counters is not None:
                self.counters.terminals += n
        return self._blk

    def __getitem__(self, i: int) -> int:
        if not 0 <= i < self.count:
            raise IndexError(i)
        return self._load(i // self.step)[i % self.step]

    def values(self) -> List[int]:
        gaps, _ = vbyte_decode_from(self.payload, self.base, self.count)
        if self.counters is not None:
            self.counters.terminals += self.count
        return from_gaps(gaps)

    def probe(self, d: int) -> int:
        prev = self.prev
        nb = len(prev)
        j = max(self._j, 0)
        # exponential then binary search for the last block whose preceding value is < d
        step = 1
        lo = j
        while j + step < nb and prev[j + step] < d:
            lo = j + step
            step *= 2
        hi = min(j + step, nb) - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if prev[mid] < d:
                lo = mid
            else:
                hi = mid - 1
        if self.counters is not None:
            self.counters.comparisons += step.bit_length()
        start = self._i if lo == self._j else 0
        blk = self._load(lo)
        i = bisect.bisect_left(blk, d, start)
        self._i = i
        if i >= len(blk):
            return END
        return FOUND if blk[i] == d else MISS


class BitmapList:
    def __init__(self, bv: BitVector, counters=None):
        self.bv = bv
        self.counters = counters

    def __len__(self) -> int:
        return self.bv.ones

    def __getitem__(self, i: int) -> int:
        return self.bv.select1(i + 1)

    def values(self) -> List[int]:
        if self.counters is not None:
            self.counters.terminals += self.bv.ones
        return self.bv.positions().tolist()

    def probe(self, d: int) -> int:
        if d > self.bv.n:
            return END
        if self.counters is not None:
            self.counters.comparisons += 1
        return FOUND if self.bv.access(d) else MISS


class VbyteBuckets:
    """Vbyte list with domain samples: bucket ``b`` gives (preceding value, byte offset, entry index)."""

    def __init__(self, payload: bytes, base: int, count: int, step: int,
                 samples: Sequence[Tuple[int, int, int]], counters=None):
        self.payload = payload
        self.base = base
        self.count = count
        self.step = step
        self.samples = samples
        self.counters = counters
        self.idx = 0
        self.off = base
        self.acc = 0
        self._cur: Optional[Tuple[int, int]] = None  # (value, next offset) of entry idx

    def __len__(self) -> int:
        return self.count

    def values(self) -> List[int]:
        gaps, _ = vbyte_decode_from(self.payload, self.base, self.count)
        if self.counters is not None:
            self.counters.terminals += self.count
        return from_gaps(gaps)

    def probe(self, d: int) -> int:
        b = st_bucket(d, self.step)
        if b > len(self.samples):
            return END
        prev, off, ix = self.samples[b - 1]
        if ix > self.idx:
            self.idx, self.off, self.acc, self._cur = ix, self.base + off, prev, None
        while self.idx < self.count:
            if self._cur is None:
                g, nxt = vbyte_decode_from(self.payload, self.off, 1)
                self._cur = (self.acc + g[0], nxt)
                if self.counters is not None:
                    self.counters.terminals += 1
            v, nxt = self._cur
            if self.counters is not None:
                self.counters.comparisons += 1
            if v >= d:
                return FOUND if v == d else MISS
            self.idx += 1
            self.off = nxt
            self.acc = v
            self._cur = None
        return END


class SkipCursor:
    """Forward search over one Re-Pair list using phrase sums.

    The cursor holds the next top-level entry ``i`` of C, the absolute value
    ``s`` reached so far and a stack of pending symbols from nonterminals
    it has descended into.  A phrase whose last value is below the probe is
    skipped whole; one that reaches past it is split into its children.
    """

    def __init__(self, C: Sequence[int], a: int, b: int, grammar: Grammar, counters=None,
                 cm: Optional[Tuple[int, Sequence[int]]] = None,
                 st: Optional[Tuple[int, Sequence[Tuple[int, int]]]] = None):
        self.C = C
        self.a = a
        self.i = a
        self.end = b
        self.s = 0
        self.pend: List[int] = []
        self.g = grammar
        self.counters = counters
        self.cm = cm
        self.st = st
        self._touched = a  # entries before this index have been counted

    def _jump(self, d: int) -> bool:
        """Reposition from samples; returns False if d lies past the list."""
        cur = self.i - 1 if self.pend else self.i
        if self.cm is not None:
            step, prev = self.cm
            nb = len(prev)
            j = (cur - self.a) // step if cur > self.a else 0
            k = 1
            lo = j
            while j + k < nb and prev[j + k] < d:
                lo = j + k
                k *= 2
            hi = min(j + k, nb) - 1
            while lo < hi:
                mid = (lo + hi + 1) // 2
                if prev[mid] < d:
                    lo = mid
                else:
                    hi = mid - 1
            entry = self.a + lo * step
            if entry > cur:
                self.i, self.s, self.pend = entry, prev[lo], []
        elif self.st is not None:
            step, samples = self.st
            bkt = st_bucket(d, step)
            if bkt > len(samples):
                return False
            prev, e = samples[bkt - 1]
            entry = self.a + e - 1
            if entry > cur:
                self.i, self.s, self.pend = entry, prev, []
        return True

    def search(self, d: int) -> bool:
        """Is ``d`` in the list?  Probes must come in increasing order."""
        if (self.cm is not None or self.st is not None) and not self._jump(d):
            self.i, self.pend = self.end, []
            return False
        g = self.g
        u = g.u
        C = self.C
        pend = self.pend
        cnt = self.counters
        s = self.s
        try:
            while True:
                if pend:
                    sym = pend[-1]
                elif self.i < self.end:
                    sym = C[self.i]
                    if cnt is not None and self.i >= self._touched:
                        cnt.entries += 1
                        self._touched = self.i + 1
                else:
                    return False
                if sym <= u:
                    w = sym
                    if cnt is not None:
                        cnt.terminals += 1
                        cnt.comparisons += 1
                else:
                    w = g.phrase_sum(sym)
                    if cnt is not None:
                        cnt.comparisons += 1
                if s + w <= d:
                    s += w
                    if pend:
                        pend.pop()
                    else:
                        self.i += 1
                    if s == d:
                        return True
                    continue
                if sym <= u:
                    return False
                # overshoot on a nonterminal: replace it by its children
                c0, c1 = g.children(g.position(sym))
                if pend:
                    pend.pop()
                else:
                    self.i += 1
                pend.append(c1)
                pend.append(c0)
        finally:
            self.s = s

    def probe(self, d: int) -> int:
        if self.search(d):
            return FOUND
        if not self.pend and self.i >= self.end:
            return END
        return MISS


# ------------------------------------------------------------ stores

def _vb(x: int) -> bytes:
    return vbyte_encode((x,))


class _Reader:
    """Sequential Vbyte reader over a section."""

    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int = 1) -> List[int]:
        vals, self.pos = vbyte_decode_from(self.data, self.pos, n)
        return vals

    def one(self) -> int:
        return self.take(1)[0]

    def done(self) -> bool:
        return self.pos >= len(self.data)


def _cum(lengths: Sequence[int]) -> List[int]:
    out = [0]
    for x in lengths:
        out.append(out[-1] + x)
    return out


class Store:
    """Per-representation list storage.  ``w`` is a 0-based word index."""

    name = ""
    algorithms: Tuple[str, ...] = ("merge",)

    counts: List[int]

    def length(self, w: int) -> int:
        return self.counts[w] if 0 <= w < len(self.counts) else 0

    def fetch(self, w: int, counters=None) -> List[int]:
        raise NotImplementedError

    def accessor(self, w: int, counters=None):
        return PlainList(self.fetch(w, counters), counters)

    def sections(self) -> Tuple[bytes, bytes, bytes]:
        raise NotImplementedError

    def stats(self) -> Dict[str, int]:
        return {}


class CodecStore(Store):
    def __init__(self, name: str, codec: Codec, payload: bytes, offsets: List[int], counts: List[int],
                 params: List[int]):
        self.name = name
        self.codec = codec
        self.payload = payload
        self.offsets = offsets
        self.counts = counts
        self.params = params

    @classmethod
    def build(cls, name: str, codec: Codec, lists: PostingLists, rice_b: Optional[int]) -> "CodecStore":
        buf = bytearray()
        offsets = [0]
        counts = []
        params = []
        for lst in lists.lists:
            enc = encode_gaps(codec, to_gaps(lst), lists.universe, rice_b)
            buf += enc.payload
            offsets.append(len(buf))
            counts.append(enc.count)
            params.append(enc.param)
        return cls(name, codec, bytes(buf), offsets, counts, params)

    def _has_param(self) -> bool:
        return self.codec in (Codec.RICE, Codec.RICE_RUNS)

    def fetch(self, w: int, counters=None) -> List[int]:
        n = self.length(w)
        if not n:
            return []
        if counters is not None:
            counters.terminals += n
        data = self.payload[self.offsets[w]:self.offsets[w + 1]]
        return from_gaps(decode_gaps(self.codec, data, n, self.params[w]))

    def sections(self):
        d = bytearray()
        for w, n in enumerate(self.counts):
            d += _vb(self.offsets[w + 1] - self.offsets[w]) + _vb(n)
            if self._has_param():
                d.append(self.params[w])
        return bytes(d), self.payload, b""

    @classmethod
    def load(cls, name, codec, nwords, directory, payload, samples):
        r = _Reader(directory)
        sizes, counts, params = [], [], []
        for _ in range(nwords):
            sizes.append(r.one())
            counts.append(r.one())
            if codec in (Codec.RICE, Codec.RICE_RUNS):
                params.append(directory[r.pos])
                r.pos += 1
            else:
                params.append(0)
        return cls(name, codec, payload, _cum(sizes), counts, params)


class VbyteCMStore(CodecStore):
    """Vbyte lists with a sample every k*ceil(log2 len) entries."""

    algorithms = ("merge", "svs", "bys")

    def __init__(self, payload, offsets, counts, k: int, samples: List[Optional[Tuple[List[int], List[int]]]],
                 name: str = "vbyte+CM"):
        super().__init__(name, Codec.VBYTE, payload, offsets, counts, [0] * len(counts))
        self.k = k
        self.samples = samples  # per word: (prev values, byte offsets) with block 0 first, or None

    @staticmethod
    def make_samples(values: Sequence[int], gaps_payload: bytes, k: int):
        n = len(values)
        if not cm_sampled(n, k):
            return None
        step = cm_step(n, k)
        prev = [0]
        offs = [0]
        pos = 0
        # walk the byte stream to find entry offsets
        j = 0
        while j < n:
            if j and j % step == 0:
                prev.append(values[j - 1])
                offs.append(pos)
            while not gaps_payload[pos] & 0x80:
                pos += 1
            pos += 1
            j += 1
        return prev, offs

    @classmethod
    def build(cls, lists: PostingLists, k: int, name: str = "vbyte+CM") -> "VbyteCMStore":
        base = CodecStore.build("vbyte", Codec.VBYTE, lists, None)
        samples = []
        for w, lst in enumerate(lists.lists):
            samples.append(cls.make_samples(lst, base.payload[base.offsets[w]:base.offsets[w + 1]], k))
        return cls(base.payload, base.offsets, base.counts, k, samples, name)

    def accessor(self, w: int, counters=None):
        n = self.length(w)
        smp = self.samples[w] if 0 <= w < len(self.samples) else None
        if smp is None:
            return VbyteBlocks(self.payload, self.offsets[w] if n else 0, n, max(n, 1), [0], [0], counters)
        return VbyteBlocks(self.payload, self.offsets[w], n, cm_step(n, self.k), smp[0], smp[1], counters)

    def sections(self):
        d, p, _ = super().sections()
        s = bytearray()
        for smp in self.samples:
            if smp is None:
                continue
            prev, offs = smp
            for a, b in zip(range(1, len(prev)), range(1, len(offs))):
                s += _vb(prev[a] - prev[a - 1]) + _vb(offs[b] - offs[b - 1])
        return d, p, bytes(s)

    @classmethod
    def load(cls, nwords, k, directory, payload, samples, name="vbyte+CM"):
        base = CodecStore.load("vbyte", Codec.VBYTE, nwords, directory, payload, b"")
        r = _Reader(samples)
        smps = []
        for n in base.counts:
            if not cm_sampled(n, k):
                smps.append(None)
                continue
            nb = -(-n // cm_step(n, k))
            prev, offs = [0], [0]
            for _ in range(nb - 1):
                dp, do = r.take(2)
                prev.append(prev[-1] + dp)
                offs.append(offs[-1] + do)
            smps.append((prev, offs))
        return cls(base.payload, base.offsets, base.counts, k, smps, name)


class VbyteSTStore(CodecStore):
    """Vbyte lists with domain samples of step 2^ceil(log2(u*B/len))."""

    algorithms = ("merge", "lookup")

    def __init__(self, payload, offsets, counts, universe: int, B: int, samples):
        super().__init__("vbyte+ST", Codec.VBYTE, payload, offsets, counts, [0] * len(counts))
        self.universe = universe
        self.B = B
        self.samples = samples  # per word: list of (prev, byte offset, entry index)

    @classmethod
    def build(cls, lists: PostingLists, B: int) -> "VbyteSTStore":
        base = CodecStore.build("vbyte", Codec.VBYTE, lists, None)
        samples = []
        for lst in lists.lists:
            samples.append(cls._samples(lst, st_step(lists.universe, B, len(lst))))
        return cls(base.payload, base.offsets, base.counts, lists.universe, B, samples)

    @staticmethod
    def _samples(values: Sequence[int], step: int):
        out = []
        off = 0
        prev = 0
        nxt = 0
        for j, v in enumerate(values):
            while prev <= nxt < v:
                out.append((prev, off, j))
                nxt += step
            off += len(_vb(v - prev))
            prev = v
        return out

    def accessor(self, w: int, counters=None):
        n = self.length(w)
        return VbyteBuckets(self.payload, self.offsets[w] if n else 0, n, st_step(self.universe, self.B, n),
                            self.samples[w] if n else [], counters)

    def sections(self):
        d, p, _ = super().sections()
        s = bytearray()
        for smp in self.samples:
            s += _vb(len(smp))
            pp = po = pi = 0
            for prev, off, ix in smp:
                s += _vb(prev - pp) + _vb(off - po) + _vb(ix - pi)
                pp, po, pi = prev, off, ix
        return d, p, bytes(s)

    @classmethod
    def load(cls, nwords, universe, B, directory, payload, samples):
        base = CodecStore.load("vbyte", Codec.VBYTE, nwords, directory, payload, b"")
        r = _Reader(samples)
        smps = []
        for _ in range(nwords):
            cnt = r.one()
            cur = []
            pp = po = pi = 0
            for _ in range(cnt):
                a, b, c = r.take(3)
                pp, po, pi = pp + a, po + b, pi + c
                cur.append((pp, po, pi))
            smps.append(cur)
        return cls(base.payload, base.offsets, base.counts, universe, B, smps)


class HybridStore(Store):
    """Lists longer than u/8 become plain bitmaps; the rest are Vbyte with CM samples."""

    name = "hybrid-bitmap"
    algorithms = ("merge", "svs", "bys")

    def __init__(self, universe: int, k: int, is_bitmap: List[bool], bitmaps: Dict[int, BitVector],
                 vb: VbyteCMStore):
        self.universe = universe
        self.k = k
        self.is_bitmap = is_bitmap
        self.bitmaps = bitmaps
        self.vb = vb
        self.counts = vb.counts

    @staticmethod
    def use_bitmap(length: int, universe: int) -> bool:
        return 8 * length > universe

    @classmethod
    def build(cls, lists: PostingLists, k: int) -> "HybridStore":
        u = lists.universe
        flags = [cls.use_bitmap(len(l), u) for l in lists.lists]
        short = PostingLists([[] if f else l for f, l in zip(flags, lists.lists)], u, lists.mode)
        vb = VbyteCMStore.build(short, k)
        vb.counts = [len(l) for l in lists.lists]
        bitmaps = {w: BitVector.from_positions(l, u) for w, (f, l) in enumerate(zip(flags, lists.lists)) if f}
        return cls(u, k, flags, bitmaps, vb)

    def fetch(self, w: int, counters=None) -> List[int]:
        if 0 <= w < len(self.counts) and self.is_bitmap[w]:
            return BitmapList(self.bitmaps[w], counters).values()
        return self.vb.fetch(w, counters)

    def accessor(self, w: int, counters=None):
        if 0 <= w < len(self.counts) and self.is_bitmap[w]:
            return BitmapList(self.bitmaps[w], counters)
        return self.vb.accessor(w, counters)

    def sections(self):
        d = bytearray()
        p = bytearray()
        for w, n in enumerate(self.counts):
            if self.is_bitmap[w]:
                bits = np.zeros(self.universe, dtype=np.uint8)
                bits[self.bitmaps[w].positions() - 1] = 1
                chunk = np.packbits(bits).tobytes()
                d += _vb(1) + _vb(n)
            else:
                chunk = self.vb.payload[self.vb.offsets[w]:self.vb.offsets[w + 1]]
                d += _vb(0) + _vb(len(chunk)) + _vb(n)
            p += chunk
        _, _, s = self.vb.sections()
        return bytes(d), bytes(p), s

    @classmethod
    def load(cls, nwords, universe, k, directory, payload, samples):
        r = _Reader(directory)
        flags, counts, sizes = [], [], []
        bitmaps: Dict[int, BitVector] = {}
        vb_payload = bytearray()
        vb_sizes = []
        pos = 0
        bmsize = (universe + 7) // 8
        for w in range(nwords):
            f = r.one()
            if f:
                n = r.one()
                bits = np.unpackbits(np.frombuffer(payload, dtype=np.uint8, count=bmsize, offset=pos))[:universe]
                bitmaps[w] = BitVector(bits, universe)
                pos += bmsize
                vb_sizes.append(0)
            else:
                size, n = r.take(2)
                vb_payload += payload[pos:pos + size]
                pos += size
                vb_sizes.append(size)
            flags.append(bool(f))
            counts.append(n)
        # rebuild the Vbyte part as its own store
        d = bytearray()
        for f, size, n in zip(flags, vb_sizes, counts):
            d += _vb(size) + _vb(0 if f else n)
        vb = VbyteCMStore.load(nwords, k, bytes(d), bytes(vb_payload), samples)
        vb.counts = counts
        return cls(universe, k, flags, bitmaps, vb)


class RepairStore(Store):
    """All lists compressed by one Re-Pair grammar, with optional skipping data and samples."""

    def __init__(self, name: str, cl: CompressedLists, grammar: Grammar, k: int, B: int, universe: int,
                 cm: Optional[List[Optional[List[int]]]] = None,
                 st: Optional[List[List[Tuple[int, int]]]] = None):
        self.name = name
        self.cl = cl
        self.grammar = grammar
        self.counts = cl.lengths
        self.k = k
        self.B = B
        self.universe = universe
        self.cm = cm
        self.st = st
        if name == "repair":
            self.algorithms = ("merge",)
        elif name == "repair-skip":
            self.algorithms = ("merge", "skip")
        elif name == "repair-skip-CM":
            self.algorithms = ("merge", "skip", "svs")
        else:
            self.algorithms = ("merge", "skip", "lookup")

    @classmethod
    def build(cls, name: str, lists: PostingLists, k: int, B: int) -> "RepairStore":
        skipping = name != "repair"
        cl, g = repair_compress([to_gaps(l) for l in lists.lists], skipping=skipping)
        cm = st = None
        if name == "repair-skip-CM":
            cm = [cls._cm_samples(cl.symbols(w), g, k) for w in range(len(lists.lists))]
        elif name == "repair-skip-ST":
            st = [st_samples_over_C(cl.symbols(w), g, st_step(lists.universe, B, len(l)))
                  for w, l in enumerate(lists.lists)]
        return cls(name, cl, g, k, B, lists.universe, cm, st)

    @staticmethod
    def _cm_samples(symbols: Sequence[int], g: Grammar, k: int) -> Optional[List[int]]:
        n = len(symbols)
        if not cm_sampled(n, k):
            return None
        step = cm_step(n, k)
        prev = [0]
        s = 0
        for j, sym in enumerate(symbols):
            if j and j % step == 0:
                prev.append(s)
            s += g.phrase_sum(sym)
        return prev

    def fetch(self, w: int, counters=None) -> List[int]:
        if not 0 <= w < len(self.counts) or not self.counts[w]:
            return []
        gaps = self.cl.expand_list(self.grammar, w)
        if counters is not None:
            a, b = self.cl.span(w)
            counters.entries += b - a
            counters.terminals += len(gaps)
        return from_gaps(gaps)

    def cursor(self, w: int, counters=None, samples: bool = True) -> SkipCursor:
        a, b = self.cl.span(w)
        cm = st = None
        n = b - a
        if samples and self.cm is not None and self.cm[w] is not None:
            cm = (cm_step(n, self.k), self.cm[w])
        if samples and self.st is not None and self.counts[w]:
            st = (st_step(self.universe, self.B, self.counts[w]), self.st[w])
        return SkipCursor(self.cl.C, a, b, self.grammar, counters, cm, st)

    def stats(self):
        return {"n_prime": len(self.cl.C), "rules": self.grammar.rule_count, "R_B": len(self.grammar),
                "max_terminal": self.grammar.u}

    def sections(self):
        g = self.grammar
        d = bytearray()
        for w, n in enumerate(self.counts):
            a, b = self.cl.span(w)
            d += _vb(b - a) + _vb(n)
        wr = bit_width(max(g.values, default=0))
        wc = bit_width(max(self.cl.C, default=0))
        head = struct.pack("<QQQQBB", g.u, len(g), len(g.values), len(self.cl.C), wr, wc)
        rb = np.packbits(np.asarray(g.shape.to_bits(), dtype=np.uint8)).tobytes() if len(g) else b""
        p = head + rb + pack_fixed(g.values, wr) + pack_fixed(self.cl.C, wc)
        s = bytearray()
        if self.cm is not None:
            for prev in self.cm:
                if prev is None:
                    continue
                for j in range(1, len(prev)):
                    s += _vb(prev[j] - prev[j - 1])
        if self.st is not None:
            for smp in self.st:
                s += _vb(len(smp))
                pp = pe = 0
                for prev, e in smp:
                    s += _vb(prev - pp) + _vb(e - pe)
                    pp, pe = prev, e
        return bytes(d), p, bytes(s)

    @classmethod
    def load(cls, name, nwords, universe, k, B, directory, payload, samples):
        r = _Reader(directory)
        spans, counts = [], []
        for _ in range(nwords):
            a, n = r.take(2)
            spans.append(a)
            counts.append(n)
        u, nrb, nvals, nc, wr, wc = struct.unpack_from("<QQQQBB", payload, 0)
        off = struct.calcsize("<QQQQBB")
        rbbytes = (nrb + 7) // 8
        bits = np.unpackbits(np.frombuffer(payload, dtype=np.uint8, count=rbbytes, offset=off))[:nrb]
        off += rbbytes
        values = unpack_fixed(payload, wr, nvals, off)
        off += (wr * nvals + 7) // 8
        C = unpack_fixed(payload, wc, nc, off)
        shape = BitVector(bits, nrb)
        g = Grammar(shape, values, u, shape.ones, name != "repair")
        cl = CompressedLists(C, _cum(spans), counts)
        cm = st = None
        rs = _Reader(samples)
        if name == "repair-skip-CM":
            cm = []
            for w in range(nwords):
                n = spans[w]
                if not cm_sampled(n, k):
                    cm.append(None)
                    continue
                nb = -(-n // cm_step(n, k))
                prev = [0]
                for x in rs.take(nb - 1):
                    prev.append(prev[-1] + x)
                cm.append(prev)
        elif name == "repair-skip-ST":
            st = []
            for _ in range(nwords):
                cnt = rs.one()
                cur = []
                pp = pe = 0
                for _ in range(cnt):
                    a, b = rs.take(2)
                    pp, pe = pp + a, pe + b
                    cur.append((pp, pe))
                st.append(cur)
        return cls(name, cl, g, k, B, universe, cm, st)


class LzendStore(Store):
    name = "vbyte-lzend"

    def __init__(self, store: VbyteLzendStore):
        self.store = store
        self.counts = store.lengths

    @classmethod
    def build(cls, lists: PostingLists, ds: int) -> "LzendStore":
        return cls(VbyteLzendStore.build([to_gaps(l) for l in lists.lists], ds))

    def fetch(self, w: int, counters=None) -> List[int]:
        gaps = self.store.fetch_list(w)
        if counters is not None:
            counters.terminals += len(gaps)
        return from_gaps(gaps)

    def stats(self):
        return {"phrases": self.store.parse.phrase_count, "text_bytes": self.store.parse.n}

    def sections(self):
        d = bytearray()
        for w, n in enumerate(self.counts):
            d += _vb(self.store.ptr[w + 1] - self.store.ptr[w]) + _vb(n)
        return bytes(d), self.store.parse.to_bytes(), b""

    @classmethod
    def load(cls, nwords, directory, payload, samples):
        r = _Reader(directory)
        sizes, counts = [], []
        for _ in range(nwords):
            a, n = r.take(2)
            sizes.append(a)
            counts.append(n)
        return cls(VbyteLzendStore(LzEndParse.from_bytes(payload), _cum(sizes), counts))


_CODECS = {"vbyte": Codec.VBYTE, "rice": Codec.RICE, "rice-runs": Codec.RICE_RUNS, "simple9": Codec.SIMPLE9}


def build_store(lists: PostingLists, representation: str, params: IndexParams) -> Store:
    if representation not in REPR_TAGS:
        raise UnsupportedRepresentation(
            f"unknown representation {representation!r}; choose from {', '.join(REPRESENTATIONS)}")
    if representation == "rice-runs" and lists.mode == POSITIONAL:
        raise UnsupportedRepresentation("rice-runs needs runs of consecutive ids, which positional lists do not have;"
                                        " use it with --mode nonpos")
    if representation in _CODECS:
        return CodecStore.build(representation, _CODECS[representation], lists,
                                params.rice_b if representation.startswith("rice") else None)
    if representation == "vbyte+CM":
        return VbyteCMStore.build(lists, params.k)
    if representation == "vbyte+ST":
        return VbyteSTStore.build(lists, params.B)
    if representation == "hybrid-bitmap":
        return HybridStore.build(lists, params.k)
    if representation.startswith("repair"):
        return RepairStore.build(representation, lists, params.k, params.B)
    return LzendStore.build(lists, params.ds)


def load_store(representation: str, nwords: int, universe: int, params: IndexParams,
               directory: bytes, payload: bytes, samples: bytes) -> Store:
    if representation in _CODECS:
        return CodecStore.load(representation, _CODECS[representation], nwords, directory, payload, samples)
    if representation == "vbyte+CM":
        return VbyteCMStore.load(nwords, params.k, directory, payload, samples)
    if representation == "vbyte+ST":
        return VbyteSTStore.load(nwords, universe, params.B, directory, payload, samples)
    if representation == "hybrid-bitmap":
        return HybridStore.load(nwords, universe, params.k, directory, payload, samples)
    if representation.startswith("repair"):
        return RepairStore.load(representation, nwords, universe, params.k, params.B, directory, payload, samples)
    if representation == "vbyte-lzend":
        return LzendStore.load(nwords, directory, payload, samples)
    raise IndexFormatError(f"unknown representation {representation!r}")


# ------------------------------------------------------------ index image

@dataclass
class IndexImage:
    mode: str
    representation: str
    params: IndexParams
    terms: List[str]
    doc_starts: List[int]
    num_docs: int
    total_tokens: int
    universe: int
    original_byte_size: int
    store: Store
    _ids: Dict[str, int] = field(init=False, repr=False)
    _sections: Optional[Tuple[bytes, ...]] = field(default=None, repr=False)

    def __post_init__(self):
        self._ids = {t: i + 1 for i, t in enumerate(self.terms)}

    @property
    def algorithms(self) -> Tuple[str, ...]:
        return self.store.algorithms

    def term_id(self, term: str) -> int:
        return self._ids.get(term, ABSENT)

    def length(self, w: int) -> int:
        return self.store.length(w - 1) if w > 0 else 0

    def fetch(self, w: int, counters=None) -> List[int]:
        if w <= 0 or w > len(self.terms):
            return []
        return self.store.fetch(w - 1, counters)

    def accessor(self, w: int, counters=None):
        return self.store.accessor(w - 1, counters)

    # serialization
    def _all_sections(self) -> Tuple[bytes, bytes, bytes, bytes, bytes]:
        if self._sections is None:
            vocab = bytearray(_vb(len(self.terms)))
            for t in self.terms:
                raw = t.encode("utf-8")
                vocab += _vb(len(raw)) + raw
            directory, payload, samples = self.store.sections()
            starts = vbyte_encode(to_gaps(self.doc_starts))
            self._sections = (bytes(vocab), directory, payload, samples, starts)
        return self._sections

    def section_sizes(self) -> Dict[str, int]:
        names = ("vocabulary", "directory", "payload", "samples", "doc_starts")
        return dict(zip(names, map(len, self._all_sections())))

    def index_bytes(self) -> int:
        """Bytes spent on the lists themselves: directory, payload and samples."""
        s = self.section_sizes()
        return s["directory"] + s["payload"] + s["samples"]

    def space_pct(self) -> float:
        return 100.0 * self.index_bytes() / self.original_byte_size

    def to_bytes(self) -> bytes:
        p = self.params
        head = MAGIC + struct.pack("<BBBHHbHQQQQ", FORMAT_VERSION, MODE_TAGS[self.mode],
                                   REPR_TAGS[self.representation], p.k, p.B,
                                   -1 if p.rice_b is None else p.rice_b, p.ds,
                                   self.num_docs, self.total_tokens, self.universe, self.original_byte_size)
        body = b"".join(struct.pack("<Q", len(s)) + s for s in self._all_sections())
        return head + body

    def save(self, path) -> int:
        data = self.to_bytes()
        with open(path, "wb") as fh:
            fh.write(data)
        return len(data)

    @classmethod
    def from_bytes(cls, data: bytes) -> "IndexImage":
        if data[:4] != MAGIC:
            raise IndexFormatError("not an index image (bad magic)")
        fmt = "<BBBHHbHQQQQ"
        try:
            (ver, mode, rtag, k, B, rb, ds, ndocs, ntok, u, osize) = struct.unpack_from(fmt, data, 4)
        except struct.error as e:
            raise IndexFormatError("truncated header") from e
        if ver != FORMAT_VERSION:
            raise IndexFormatError(f"unsupported format version {ver}")
        modes = {v: m for m, v in MODE_TAGS.items()}
        tags = {v: r for r, v in REPR_TAGS.items()}
        if mode not in modes or rtag not in tags:
            raise IndexFormatError("bad mode or representation tag")
        off = 4 + struct.calcsize(fmt)
        secs = []
        for _ in range(5):
            if off + 8 > len(data):
                raise IndexFormatError("truncated section table")
            (n,) = struct.unpack_from("<Q", data, off)
            off += 8
            if off + n > len(data):
                raise IndexFormatError("truncated section")
            secs.append(bytes(data[off:off + n]))
            off += n
        vocab, directory, payload, samples, starts = secs
        try:
            r = _Reader(vocab)
            terms = []
            for _ in range(r.one()):
                ln = r.one()
                terms.append(vocab[r.pos:r.pos + ln].decode("utf-8"))
                r.pos += ln
            params = IndexParams(k, B, None if rb < 0 else rb, ds)
            store = load_store(tags[rtag], len(terms), u, params, directory, payload, samples)
            doc_starts = from_gaps(vbyte_decode_from(starts, 0, ndocs)[0])
        except (CorruptStreamError, struct.error, IndexError, UnicodeDecodeError) as e:
            raise IndexFormatError(f"corrupt index image: {e}") from e
        img = cls(modes[mode], tags[rtag], params, terms, doc_starts, ndocs, ntok, u, osize, store)
        img._sections = (vocab, directory, payload, samples, starts)
        return img

    @classmethod
    def load(cls, path) -> "IndexImage":
        with open(path, "rb") as fh:
            return cls.from_bytes(fh.read())


def materialize(corpus: Corpus, lists: PostingLists, representation: str,
                params: IndexParams = IndexParams()) -> IndexImage:
    store = build_store(lists, representation, params)
    return IndexImage(lists.mode, representation, params, list(corpus.vocabulary.terms), list(corpus.doc_starts),
                      corpus.num_docs, corpus.total_tokens, lists.universe, corpus.original_byte_size, store)


def build_index(corpus: Corpus, representation: str, params: IndexParams = IndexParams()) -> IndexImage:
    return materialize(corpus, build_lists(corpus), representation, params)
