"""Intersections, Re-Pair skipping search, phrase queries and position translation."""
from __future__ import annotations

import bisect
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

from .corpus import ABSENT, POSITIONAL
from .postings import END, FOUND, IndexImage, RepairStore, SkipCursor

ALGORITHMS = ("merge", "svs", "bys", "lookup", "skip")
SVS_RATIO = 20


class AlgorithmError(ValueError):
    pass


@dataclass
class WorkCounters:
    entries: int = 0  # distinct C entries read
    terminals: int = 0  # gaps decoded or terminals examined
    comparisons: int = 0

    def add(self, other: "WorkCounters") -> None:
        self.entries += other.entries
        self.terminals += other.terminals
        self.comparisons += other.comparisons


# ------------------------------------------------------------ plain lists

def merge_intersect(a: Sequence[int], b: Sequence[int], counters: Optional[WorkCounters] = None) -> List[int]:
    out = []
    i = j = 0
    na, nb = len(a), len(b)
    steps = 0
    while i < na and j < nb:
        x, y = a[i], b[j]
        steps += 1
        if x == y:
            out.append(x)
            i += 1
            j += 1
        elif x < y:
            i += 1
        else:
            j += 1
    if counters is not None:
        counters.comparisons += steps
    return out


def exponential_search(seq: Sequence[int], x: int, lo: int = 0) -> int:
    """First index >= lo holding a value >= x, probing lo+1, lo+2, lo+4, ..."""
    n = len(seq)
    if lo >= n or seq[lo] >= x:
        return lo
    step = 1
    prev = lo
    while lo + step < n and seq[lo + step] < x:
        prev = lo + step
        step *= 2
    hi = min(lo + step, n)
    # seq[prev] < x and (hi == n or seq[hi] >= x)
    a, b = prev + 1, hi
    while a < b:
        mid = (a + b) // 2
        if seq[mid] < x:
            a = mid + 1
        else:
            b = mid
    return a


def svs_intersect(short: Sequence[int], long, counters: Optional[WorkCounters] = None,
                  ratio: int = SVS_RATIO) -> List[int]:
    """Search the long list for each element of the short one, resuming where the last search ended.

    ``long`` is either a plain sequence or an accessor with ``probe``.
    When the long list is not at least ``ratio`` times longer a merge is
    cheaper and is used instead.
    """
    if not len(short) or not len(long):
        return []
    if len(long) < ratio * len(short):
        lv = long.values() if hasattr(long, "values") and hasattr(long, "probe") else long
        return merge_intersect(short, lv, counters)
    if hasattr(long, "probe"):
        return probe_intersect(short, long, 0)
    out = []
    j = 0
    n = len(long)
    for x in short:
        j = exponential_search(long, x, j)
        if counters is not None:
            counters.comparisons += max(1, (j + 1).bit_length())
        if j >= n:
            break
        if long[j] == x:
            out.append(x)
            j += 1
    return out


def _lower_bound(seq, x: int, lo: int, hi: int) -> int:
    while lo < hi:
        mid = (lo + hi) // 2
        if seq[mid] < x:
            lo = mid + 1
        else:
            hi = mid
    return lo


def bys_intersect(a, b, counters: Optional[WorkCounters] = None) -> List[int]:
    """Binary-search the longer list for the median of the shorter and recurse on both halves."""
    if len(a) > len(b):
        a, b = b, a
    out: List[int] = []
    # explicit stack of (a range, b range, pending median); medians emitted in order
    stack: List[Tuple[int, int, int, int, int]] = [(0, len(a), 0, len(b), -1)]
    while stack:
        alo, ahi, blo, bhi, emit = stack.pop()
        if emit >= 0:
            out.append(emit)
            continue
        if alo >= ahi or blo >= bhi:
            continue
        m = (alo + ahi) // 2
        x = a[m]
        p = _lower_bound(b, x, blo, bhi)
        if counters is not None:
            counters.comparisons += max(1, (bhi - blo).bit_length())
        hit = p < bhi and b[p] == x
        stack.append((m + 1, ahi, p + 1 if hit else p, bhi, -1))
        if hit:
            stack.append((0, 0, 0, 0, x))
        stack.append((alo, m, blo, p, -1))
    return out


def multi_intersect(lists: Sequence[Sequence[int]], pairwise: Callable = svs_intersect,
                    counters: Optional[WorkCounters] = None) -> List[int]:
    """Intersect shortest first, folding the candidate into each longer list."""
    if not lists:
        return []
    if any(len(l) == 0 for l in lists):
        return []
    order = sorted(lists, key=len)
    cand = list(order[0])
    for other in order[1:]:
        if not cand:
            break
        cand = pairwise(cand, other, counters) if counters is not None else pairwise(cand, other)
    return cand


def probe_intersect(cand: Sequence[int], acc, offset: int = 0) -> List[int]:
    """Keep the candidates ``c`` whose ``c + offset`` the accessor reports present."""
    out = []
    for c in cand:
        r = acc.probe(c + offset)
        if r == FOUND:
            out.append(c)
        elif r == END:
            break
    return out


# ------------------------------------------------------------ Re-Pair lists

def skip_search(cursor: SkipCursor, d: int) -> bool:
    """Advance ``cursor`` to ``d``; True iff ``d`` is in its list."""
    return cursor.search(d)


def repair_intersect(candidate: Sequence[int], store: RepairStore, w: int, counters: Optional[WorkCounters] = None,
                     samples: bool = True, offset: int = 0) -> List[int]:
    """Intersect an uncompressed candidate with Re-Pair list ``w`` (0-based).

    Plain Re-Pair has no phrase sums, so the list is expanded and merged.
    Otherwise the skipping cursor walks C, seeded by CM or ST samples when
    ``samples`` is set and the store has them.
    """
    if not candidate:
        return []
    if not store.grammar.skipping:
        lst = store.fetch(w, counters)
        if offset:
            shifted = [c + offset for c in candidate]
            return [c - offset for c in merge_intersect(shifted, lst, counters)]
        return merge_intersect(candidate, lst, counters)
    cur = store.cursor(w, counters, samples)
    return probe_intersect(candidate, cur, offset)


# ------------------------------------------------------------ queries over an index

def check_algorithm(image: IndexImage, algorithm: str) -> None:
    if algorithm not in image.algorithms:
        raise AlgorithmError(f"algorithm {algorithm!r} is not available for representation "
                             f"{image.representation!r}; valid: {', '.join(image.algorithms)}")


def _pairwise(image: IndexImage, cand: List[int], w: int, offset: int, algorithm: str,
              counters: Optional[WorkCounters]) -> List[int]:
    store = image.store
    if isinstance(store, RepairStore):
        if algorithm == "merge":
            lst = store.fetch(w - 1, counters)
            shifted = [c + offset for c in cand]
            return [c - offset for c in merge_intersect(shifted, lst, counters)]
        return repair_intersect(cand, store, w - 1, counters, samples=algorithm != "skip", offset=offset)
    shifted = [c + offset for c in cand]
    if algorithm == "merge":
        res = merge_intersect(shifted, image.fetch(w, counters), counters)
    elif algorithm == "svs":
        res = svs_intersect(shifted, image.accessor(w, counters), counters)
    elif algorithm == "bys":
        res = bys_intersect(shifted, image.accessor(w, counters), counters)
    elif algorithm == "lookup":
        res = probe_intersect(shifted, image.accessor(w, counters))
    else:
        raise AlgorithmError(f"unknown algorithm {algorithm!r}")
    return [c - offset for c in res] if offset else res


def intersect_terms(image: IndexImage, terms: Sequence[Tuple[int, int]], algorithm: str = "merge",
                    counters: Optional[WorkCounters] = None) -> List[int]:
    """Values ``p`` with ``p + off`` in the list of ``w`` for every (w, off) pair.

    Lists are processed in increasing order of their stored lengths; the
    shortest is decoded and becomes the candidate set.
    """
    check_algorithm(image, algorithm)
    if not terms:
        return []
    if any(w == ABSENT or image.length(w) == 0 for w, _ in terms):
        return []
    order = sorted(terms, key=lambda t: (image.length(t[0]), t[1]))
    w0, off0 = order[0]
    cand = [v - off0 for v in image.fetch(w0, counters) if v > off0]
    for w, off in order[1:]:
        if not cand:
            break
        cand = _pairwise(image, cand, w, off, algorithm, counters)
    return cand


def conjunctive_query(image: IndexImage, ids: Sequence[int], algorithm: str = "merge",
                      counters: Optional[WorkCounters] = None) -> List[int]:
    return intersect_terms(image, [(w, 0) for w in ids], algorithm, counters)


def phrase_query(image: IndexImage, ids: Sequence[int], algorithm: str = "merge",
                 counters: Optional[WorkCounters] = None) -> List[int]:
    """Positions where ``ids[0]`` starts an occurrence of the whole phrase."""
    if image.mode != POSITIONAL:
        raise AlgorithmError("phrase queries need a positional index")
    return intersect_terms(image, [(w, j) for j, w in enumerate(ids)], algorithm, counters)


def evaluate(image: IndexImage, ids: Sequence[int], algorithm: str = "merge",
             counters: Optional[WorkCounters] = None) -> List[int]:
    """One-word queries return the list; longer ones are phrases (positional) or conjunctions."""
    if len(ids) == 1:
        check_algorithm(image, algorithm)
        return image.fetch(ids[0], counters) if ids[0] != ABSENT else []
    if image.mode == POSITIONAL:
        return phrase_query(image, ids, algorithm, counters)
    return conjunctive_query(image, ids, algorithm, counters)


def translate(positions: Sequence[int], doc_starts: Sequence[int],
              total_tokens: Optional[int] = None) -> List[Tuple[int, int]]:
    """Map increasing absolute positions to (document, 1-based offset).

    Each position is located by exponential search from the document of
    the previous one.
    """
    out = []
    d = 0  # 0-based index into doc_starts
    n = len(doc_starts)
    for p in positions:
        if p < 1 or (total_tokens is not None and p > total_tokens):
            raise ValueError(f"position {p} outside the collection")
        # find the largest d with doc_starts[d] <= p, starting from the previous d
        lo = d
        step = 1
        while lo + step < n and doc_starts[lo + step] <= p:
            lo += step
            step *= 2
        hi = min(lo + step, n)
        d = bisect.bisect_right(doc_starts, p, lo, hi) - 1
        out.append((d + 1, p - doc_starts[d] + 1))
    return out
