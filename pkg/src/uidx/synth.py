"""Synthetic versioned collections: articles whose consecutive versions differ by small edits."""
from __future__ import annotations

from typing import List, Optional

import numpy as np

_ONSETS = ["b", "c", "d", "f", "g", "h", "j", "k", "l", "m", "n", "p", "r", "s", "t", "v", "w", "z",
           "br", "ch", "dr", "fl", "gr", "kl", "pr", "sh", "st", "tr"]
_NUCLEI = ["a", "e", "i", "o", "u", "ai", "ea", "ou", "y"]
_CODAS = ["", "", "n", "r", "s", "l", "m", "x", "nd", "rk"]
_PUNCT = [", ", ". ", "; ", " (", ") "]


def pseudo_words(count: int, seed: int = 0) -> List[str]:
    """``count`` distinct pronounceable letter strings."""
    rng = np.random.default_rng(seed)
    seen = set()
    out = []
    while len(out) < count:
        k = 1 + int(rng.integers(3))
        w = "".join(_ONSETS[rng.integers(len(_ONSETS))] + _NUCLEI[rng.integers(len(_NUCLEI))]
                    for _ in range(k)) + _CODAS[rng.integers(len(_CODAS))]
        if w not in seen and len(w) > 2:
            seen.add(w)
            out.append(w)
    return out


class _Zipf:
    def __init__(self, n: int, s: float, rng: np.random.Generator):
        p = 1.0 / np.arange(1, n + 1) ** s
        self.cdf = np.cumsum(p / p.sum())
        self.rng = rng

    def draw(self, size: Optional[int] = None):
        u = self.rng.random(size)
        r = np.searchsorted(self.cdf, u)
        return np.minimum(r, len(self.cdf) - 1)


def render(tokens: List[int], words: List[str]) -> str:
    """Negative token ids are punctuation marks, the rest index ``words``."""
    out = []
    prev_word = False
    for t in tokens:
        if t < 0:
            out.append(_PUNCT[-t - 1])
            prev_word = False
        else:
            if prev_word:
                out.append(" ")
            out.append(words[t])
            prev_word = True
    return "".join(out).strip() + "\n"


def versioned_collection(articles: int = 100, versions: int = 50, mutation: float = 0.01,
                         length: int = 300, vocab_size: int = 100000, zipf: float = 1.05,
                         topic_words: int = 150, topic_share: float = 0.3, punctuation: float = 0.06,
                         block: float = 1.0,
                         seed: int = 0) -> List[str]:
    """Documents ordered article by article, each article's versions consecutive.

    Every article draws its first version from a global Zipf vocabulary
    mixed with a small article-specific word pool.  Each later version
    copies the previous one and edits about ``mutation`` of its tokens
    (substitution, insertion or deletion, equally likely) in spans of
    ``block`` tokens on average.
    """
    rng = np.random.default_rng(seed)
    words = pseudo_words(vocab_size, seed)
    zipf_draw = _Zipf(vocab_size, zipf, rng)

    def fresh(pool: np.ndarray) -> int:
        if rng.random() < punctuation:
            return -1 - int(rng.integers(len(_PUNCT)))
        if len(pool) and rng.random() < topic_share:
            return int(pool[rng.integers(len(pool))])
        return int(zipf_draw.draw())

    docs: List[str] = []
    for _ in range(articles):
        pool = rng.integers(0, vocab_size, size=topic_words)
        n = max(10, int(rng.normal(length, length / 4)))
        cur = [fresh(pool) for _ in range(n)]
        docs.append(render(cur, words))
        for _ in range(versions - 1):
            budget = rng.binomial(len(cur), mutation)
            while budget > 0:
                span = min(budget, 1 + int(rng.poisson(max(0.0, block - 1))))
                budget -= span
                op = int(rng.integers(3))
                at = int(rng.integers(len(cur) + 1))
                if op == 0 and at < len(cur):
                    cur[at:at + span] = [fresh(pool) for _ in range(span)]
                elif op == 1 or len(cur) <= span:
                    cur[at:at] = [fresh(pool) for _ in range(span)]
                else:
                    at = min(at, len(cur) - span)
                    del cur[at:at + span]
            docs.append(render(cur, words))
    return docs


def random_collection(docs: int = 200, length: int = 50, vocab_size: int = 500, seed: int = 0) -> List[str]:
    """Non-repetitive documents of Zipf-distributed words."""
    rng = np.random.default_rng(seed)
    words = pseudo_words(vocab_size, seed)
    z = _Zipf(vocab_size, 1.0, rng)
    out = []
    for _ in range(docs):
        n = max(1, int(rng.integers(length // 2, length * 3 // 2 + 1)))
        out.append(render([int(t) for t in z.draw(n)], words))
    return out
