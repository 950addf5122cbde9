"""Re-Pair compression of concatenated gap lists and its compact dictionary.

The dictionary is a forest: ``R_B`` holds the preorder tree shapes
(1 = internal node, 0 = leaf) and ``R_S`` the values.  A nonterminal is
identified by the 1-based position of its node in ``R_B``; in ``C`` and in
leaves it is stored as ``u + position`` where ``u`` is the largest
terminal, so every value ``<= u`` is a terminal gap.

With skipping enabled ``R_S`` is aligned with ``R_B``: 0-positions carry
leaf values and 1-positions carry phrase sums.  Without it ``R_S`` only
holds leaf values and is addressed through ``rank_0``.
"""
from __future__ import annotations

import heapq
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

from .succinct import BitVector


class UnsupportedOperation(RuntimeError):
    pass


Rule = Tuple[int, int]


def repair_rules(lists: Sequence[Sequence[int]]) -> Tuple[List[List[int]], List[Rule], int]:
    """Run Re-Pair over several lists without letting pairs cross list borders.

    Returns the reduced lists, the rules in creation order and ``u``.  In
    the output, rule ``k`` is referenced by the temporary id ``u + 1 + k``.
    Ties between equally frequent pairs go to the lexicographically
    smallest pair.
    """
    seq: List[int] = []
    nxt: List[int] = []
    prv: List[int] = []
    starts: List[int] = []
    for lst in lists:
        base = len(seq)
        starts.append(base)
        m = len(lst)
        for k, v in enumerate(lst):
            if v < 1:
                raise ValueError("gap values must be positive")
            seq.append(v)
            prv.append(base + k - 1 if k else -1)
            nxt.append(base + k + 1 if k + 1 < m else -1)
    u = max(seq) if seq else 0

    occ: Dict[Rule, set] = defaultdict(set)
    for i, j in enumerate(nxt):
        if j != -1:
            occ[(seq[i], seq[j])].add(i)

    def count(pair: Rule) -> int:
        s = occ.get(pair)
        if not s:
            return 0
        if pair[0] != pair[1]:
            return len(s)
        # overlapping occurrences inside runs (x x x) only count once
        c = 0
        blocked = -2
        for i in sorted(s):
            if i != blocked:
                c += 1
                blocked = nxt[i]
        return c

    heap = []
    for pair in occ:
        c = count(pair)
        if c >= 2:
            heap.append((-c, pair[0], pair[1]))
    heapq.heapify(heap)

    rules: List[Rule] = []
    while heap:
        negc, a, b = heapq.heappop(heap)
        c = count((a, b))
        if c != -negc:
            if c >= 2:
                heapq.heappush(heap, (-c, a, b))
            continue
        x = u + 1 + len(rules)
        rules.append((a, b))
        dirty = set()
        for i in sorted(occ.pop((a, b))):
            if seq[i] != a:
                continue
            j = nxt[i]
            if j == -1 or seq[j] != b:
                continue
            p = prv[i]
            n = nxt[j]
            if p != -1:
                s = occ.get((seq[p], a))
                if s:
                    s.discard(p)
            if n != -1:
                s = occ.get((b, seq[n]))
                if s:
                    s.discard(j)
            seq[i] = x
            seq[j] = 0
            nxt[i] = n
            if n != -1:
                prv[n] = i
            if p != -1:
                key = (seq[p], x)
                occ[key].add(p)
                dirty.add(key)
            if n != -1:
                key = (x, seq[n])
                occ[key].add(i)
                dirty.add(key)
        for pair in dirty:
            c = count(pair)
            if c >= 2:
                heapq.heappush(heap, (-c, pair[0], pair[1]))

    reduced: List[List[int]] = []
    for w, lst in enumerate(lists):
        out = []
        if lst:
            i = starts[w]
            while i != -1:
                out.append(seq[i])
                i = nxt[i]
        reduced.append(out)
    return reduced, rules, u


@dataclass
class Grammar:
    """Compact Re-Pair dictionary (``R_B`` shape bitmap plus ``R_S`` values)."""

    shape: BitVector
    values: List[int]
    u: int
    rule_count: int
    skipping: bool
    _bits: bytes = field(init=False, repr=False)
    _kids: Dict[int, Tuple[int, int]] = field(init=False, repr=False, default_factory=dict)
    _ends: Dict[int, int] = field(init=False, repr=False, default_factory=dict)

    def __post_init__(self) -> None:
        # 1-based byte view of R_B for scanning (index 0 unused)
        self._bits = b"\x00" + bytes(self.shape.to_bits())
        if self.skipping:
            self._rs = [0] + list(self.values)
        else:
            self._rs = list(self.values)

    def __len__(self) -> int:
        return self.shape.n

    def is_terminal(self, sym: int) -> bool:
        return sym <= self.u

    def position(self, sym: int) -> int:
        """R_B position of a nonterminal symbol."""
        pos = sym - self.u
        if not 1 <= pos <= self.shape.n or not self._bits[pos]:
            raise ValueError(f"symbol {sym} is not a valid nonterminal")
        return pos

    def leaf(self, q: int) -> int:
        """Encoded value of the leaf at R_B position ``q``."""
        if self.skipping:
            return self._rs[q]
        return self._rs[self.shape.rank(0, q) - 1]

    def phrase_sum(self, sym: int) -> int:
        if sym <= self.u:
            return sym
        if not self.skipping:
            raise UnsupportedOperation("phrase sums need a grammar built with skipping data")
        return self._rs[self.position(sym)]

    def subtree_end(self, q: int) -> int:
        """Last R_B position of the subtree rooted at ``q``."""
        bits = self._bits
        if not bits[q]:
            return q
        end = self._ends.get(q)
        if end is None:
            need = 1
            p = q
            while need:
                need += 1 if bits[p] else -1
                p += 1
            end = p - 1
            self._ends[q] = end
        return end

    def children(self, pos: int) -> Tuple[int, int]:
        """Encoded symbols of the two children of the node at ``pos``."""
        kids = self._kids.get(pos)
        if kids is None:
            bits = self._bits
            c0 = pos + 1
            c1 = self.subtree_end(c0) + 1
            s0 = self.u + c0 if bits[c0] else self.leaf(c0)
            s1 = self.u + c1 if bits[c1] else self.leaf(c1)
            kids = (s0, s1)
            self._kids[pos] = kids
        return kids

    def rules(self) -> Dict[int, Tuple[int, int]]:
        """Every nonterminal position mapped to its right-hand side."""
        return {p: self.children(p) for p in range(1, self.shape.n + 1) if self._bits[p]}

    def expand_into(self, sym: int, out: List[int]) -> None:
        u = self.u
        if sym <= u:
            out.append(sym)
            return
        bits = self._bits
        leaf = self.leaf
        append = out.append
        stack = [(self.position(sym), 1)]
        while stack:
            q, need = stack.pop()
            while need:
                if bits[q]:
                    need += 1
                    q += 1
                    continue
                need -= 1
                v = leaf(q)
                q += 1
                if v <= u:
                    append(v)
                else:
                    if need:
                        stack.append((q, need))
                    stack.append((v - u, 1))
                    break

    def expand_symbol(self, sym: int) -> List[int]:
        out: List[int] = []
        self.expand_into(sym, out)
        return out

    def nbytes(self) -> int:
        width = max(1, max(self.values, default=0).bit_length())
        rank_dir = 0 if self.skipping else self.shape.nbytes() - (self.shape.n + 7) // 8
        return (self.shape.n + 7) // 8 + rank_dir + (width * len(self.values) + 7) // 8 + 16


@dataclass
class CompressedLists:
    """Reduced sequence ``C`` with per-list spans and uncompressed lengths."""

    C: List[int]
    ptr: List[int]
    lengths: List[int]

    def span(self, w: int) -> Tuple[int, int]:
        return self.ptr[w], self.ptr[w + 1]

    def symbols(self, w: int) -> List[int]:
        a, b = self.span(w)
        return self.C[a:b]

    def expand_list(self, grammar: Grammar, w: int) -> List[int]:
        out: List[int] = []
        a, b = self.span(w)
        for sym in self.C[a:b]:
            grammar.expand_into(sym, out)
        return out

    def nbytes(self, grammar: Grammar) -> int:
        width = max(1, max(self.C, default=0).bit_length())
        ptr_width = max(1, len(self.C).bit_length())
        len_width = max(1, max(self.lengths, default=0).bit_length())
        return (width * len(self.C) + ptr_width * len(self.ptr) + len_width * len(self.lengths) + 7) // 8


def build_dictionary(rules: Sequence[Rule], u: int, skipping: bool) -> Tuple[Grammar, Dict[int, int]]:
    """Lay the rules out as a forest and return it with a map rule-index -> R_B position.

    Trees are emitted from the most recent rule backwards; a rule whose tree
    has not been placed yet is inlined at its first use as a child.
    """
    nrules = len(rules)
    sums = [0] * nrules
    for k, (a, b) in enumerate(rules):
        sums[k] = (a if a <= u else sums[a - u - 1]) + (b if b <= u else sums[b - u - 1])

    placed: Dict[int, int] = {}
    bits: List[int] = []
    vals: List[int] = []  # aligned with bits
    for root in range(nrules - 1, -1, -1):
        if root in placed:
            continue
        stack = [(True, root)]
        while stack:
            is_rule, item = stack.pop()
            if is_rule:
                placed[item] = len(bits) + 1
                bits.append(1)
                vals.append(sums[item])
                a, b = rules[item]
                stack.append((False, b))
                stack.append((False, a))
            elif item <= u:
                bits.append(0)
                vals.append(item)
            else:
                k = item - u - 1
                if k in placed:
                    bits.append(0)
                    vals.append(u + placed[k])
                else:
                    stack.append((True, k))

    if skipping:
        values = vals
    else:
        values = [v for bit, v in zip(bits, vals) if not bit]
    grammar = Grammar(BitVector(bits), values, u, nrules, skipping)
    return grammar, placed


def repair_compress(lists: Sequence[Sequence[int]], skipping: bool = True) -> Tuple[CompressedLists, Grammar]:
    """Compress gap lists with one shared grammar.

    Empty lists get empty spans.  Symbols in ``C`` are terminals (``<= u``)
    or ``u + R_B position`` for nonterminals.
    """
    reduced, rules, u = repair_rules(lists)
    grammar, placed = build_dictionary(rules, u, skipping)
    C: List[int] = []
    ptr = [0]
    for red in reduced:
        for s in red:
            C.append(s if s <= u else u + placed[s - u - 1])
        ptr.append(len(C))
    return CompressedLists(C, ptr, [len(lst) for lst in lists]), grammar
