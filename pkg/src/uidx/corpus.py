"""Collection ingestion, vocabulary and query sets."""
from __future__ import annotations

import io
import os
import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, TextIO, Union

import numpy as np

NONPOSITIONAL = "nonpos"
POSITIONAL = "pos"
MODES = (NONPOSITIONAL, POSITIONAL)

DOC_SEPARATOR = 0  # reserved token id placed between consecutive documents
ABSENT = -1  # id of a query term missing from the vocabulary

RECORD_MARKER = "\x01"

WORD_LOW = "word-low"
WORD_HIGH = "word-high"
CONJUNCTIVE = "conjunctive"
PHRASE = "phrase"
QUERY_KINDS = (WORD_LOW, WORD_HIGH, CONJUNCTIVE, PHRASE)

_WORD = re.compile(r"\w+")
_POS_TOKEN = re.compile(r"\w+|\W+")


class CorpusError(ValueError):
    pass


class QueryParseError(ValueError):
    def __init__(self, path: str, lineno: int, msg: str):
        super().__init__(f"{path}:{lineno}: {msg}")
        self.lineno = lineno


def load_stopwords(path: Optional[str] = None) -> frozenset:
    if path is None:
        text = resources.files("uidx").joinpath("data/stopwords.txt").read_text(encoding="utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    return frozenset(w.strip().lower() for w in text.split() if w.strip())


def tokenize(text: str, mode: str, stopwords: frozenset = frozenset()) -> List[str]:
    """Split text into index terms.

    Non-positional: case-folded words minus stopwords.  Positional: the
    original words and separators, except that a lone space between two
    words is dropped (spaceless words).
    """
    if mode == NONPOSITIONAL:
        return [w for w in _WORD.findall(text.lower()) if w not in stopwords]
    if mode == POSITIONAL:
        return [t for t in _POS_TOKEN.findall(text) if t != " "]
    raise ValueError(f"unknown parsing mode {mode!r}")


def detokenize(terms: Sequence[str]) -> str:
    """Inverse of positional tokenization for a token run."""
    out = []
    prev_word = False
    for t in terms:
        is_word = bool(_WORD.fullmatch(t))
        if is_word and prev_word:
            out.append(" ")
        out.append(t)
        prev_word = is_word
    return "".join(out)


def is_word(term: str) -> bool:
    return bool(_WORD.fullmatch(term))


@dataclass(frozen=True)
class Document:
    doc_id: int
    tokens: tuple


@dataclass
class Vocabulary:
    terms: List[str] = field(default_factory=list)
    ids: Dict[str, int] = field(default_factory=dict)
    cf: List[int] = field(default_factory=list)
    df: List[int] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.terms)

    def __contains__(self, term: str) -> bool:
        return term in self.ids

    def id(self, term: str) -> int:
        return self.ids.get(term, ABSENT)

    def term(self, token_id: int) -> str:
        return self.terms[token_id - 1]

    def add(self, term: str) -> int:
        tid = self.ids.get(term)
        if tid is None:
            self.terms.append(term)
            self.cf.append(0)
            self.df.append(0)
            tid = len(self.terms)
            self.ids[term] = tid
        return tid

    @classmethod
    def from_terms(cls, terms: Sequence[str]) -> "Vocabulary":
        v = cls()
        for t in terms:
            v.add(t)
        return v


@dataclass
class Corpus:
    documents: List[Document]
    vocabulary: Vocabulary
    doc_starts: List[int]
    total_tokens: int
    original_byte_size: int
    mode: str

    @property
    def num_docs(self) -> int:
        return len(self.documents)

    def text(self) -> List[int]:
        """The concatenation of all documents with a separator token between them."""
        out: List[int] = []
        for d in self.documents:
            if out:
                out.append(DOC_SEPARATOR)
            out.extend(d.tokens)
        return out


def read_records(source: Union[str, os.PathLike, TextIO, Iterable[str]], marker: str = RECORD_MARKER) -> Iterator[str]:
    """Yield documents from a stream where a line holding only ``marker`` ends a record."""
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8") as fh:
            yield from read_records(fh, marker)
        return
    buf: List[str] = []
    for line in source:
        if line.rstrip("\r\n") == marker:
            yield "".join(buf)
            buf = []
        else:
            buf.append(line)
    if buf and "".join(buf).strip():
        yield "".join(buf)


def write_records(records: Iterable[str], path: Union[str, os.PathLike], marker: str = RECORD_MARKER) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for r in records:
            fh.write(r)
            if not r.endswith("\n"):
                fh.write("\n")
            fh.write(marker + "\n")


def ingest(records: Iterable[str], mode: str = NONPOSITIONAL, stopwords: Optional[Iterable[str]] = None,
           max_tokens: Optional[int] = None) -> Corpus:
    """Tokenize documents and build the vocabulary.

    ``stopwords`` defaults to the shipped list in non-positional mode and
    is ignored in positional mode, where the text is indexed as is.
    """
    if mode not in MODES:
        raise ValueError(f"unknown parsing mode {mode!r}")
    if mode == NONPOSITIONAL:
        stop = load_stopwords() if stopwords is None else frozenset(w.lower() for w in stopwords)
    else:
        stop = frozenset()
    vocab = Vocabulary()
    docs: List[Document] = []
    starts: List[int] = []
    pos = 1
    nbytes = 0
    for rec in records:
        nbytes += len(rec.encode("utf-8"))
        terms = tokenize(rec, mode, stop)
        if max_tokens is not None and len(terms) > max_tokens:
            raise CorpusError(f"document {len(docs) + 1} has {len(terms)} tokens (max {max_tokens})")
        ids = tuple(vocab.add(t) for t in terms)
        for t in ids:
            vocab.cf[t - 1] += 1
        for t in set(ids):
            vocab.df[t - 1] += 1
        if docs:
            pos += 1  # separator
        starts.append(pos)
        docs.append(Document(len(docs) + 1, ids))
        pos += len(ids)
    if not docs or nbytes == 0:
        raise CorpusError("empty corpus")
    if len(docs) >= 1 << 32 or pos - 1 >= 1 << 32:
        raise CorpusError("collection exceeds the 32-bit document/position universe")
    return Corpus(docs, vocab, starts, pos - 1, nbytes, mode)


# ------------------------------------------------------------------ queries

@dataclass
class QuerySet:
    kind: str
    queries: List[List[int]]
    terms: List[List[str]]

    def __len__(self) -> int:
        return len(self.queries)

    def __iter__(self):
        return iter(self.queries)


def _check_arity(kind: Optional[str], n: int) -> Optional[str]:
    if kind in (WORD_LOW, WORD_HIGH) and n != 1:
        return f"{kind} queries take exactly one term, got {n}"
    if kind in (CONJUNCTIVE, PHRASE) and n < 2:
        return f"{kind} queries take at least two terms, got {n}"
    return None


def parse_query_line(line: str, mode: str) -> List[str]:
    if mode == POSITIONAL:
        return tokenize(line, POSITIONAL)
    return [t.lower() for t in line.split()]


def load_queries(path: Union[str, os.PathLike], vocabulary: Vocabulary, kind: Optional[str] = None,
                 mode: str = NONPOSITIONAL) -> QuerySet:
    """Read one query per line.  Unknown terms map to ``ABSENT``."""
    if kind is not None and kind not in QUERY_KINDS:
        raise ValueError(f"unknown query kind {kind!r}")
    with open(path, encoding="utf-8") as fh:
        lines = [ln.rstrip("\r\n") for ln in fh]
    while lines and not lines[-1].strip():
        lines.pop()
    queries: List[List[int]] = []
    terms: List[List[str]] = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            raise QueryParseError(str(path), lineno, "empty line")
        q = parse_query_line(line, mode)
        if not q:
            raise QueryParseError(str(path), lineno, "no terms")
        err = _check_arity(kind, len(q))
        if err:
            raise QueryParseError(str(path), lineno, err)
        terms.append(q)
        queries.append([vocabulary.id(t) for t in q])
    if kind is None:
        kind = PHRASE if mode == POSITIONAL else CONJUNCTIVE
        if terms and all(len(t) == 1 for t in terms):
            kind = WORD_LOW
    return QuerySet(kind, queries, terms)


def write_queries(qs: QuerySet, path: Union[str, os.PathLike], mode: str = NONPOSITIONAL) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for t in qs.terms:
            fh.write((detokenize(t) if mode == POSITIONAL else " ".join(t)) + "\n")


def generate_queries(corpus: Corpus, kind: str, count: int = 1000, seed: int = 0,
                     threshold: int = 1000, length: int = 2) -> QuerySet:
    """Random query sets in the style of the benchmark protocol.

    Word sets pick vocabulary words occurring fewer (``word-low``) or more
    (``word-high``) than ``threshold`` times; conjunctive and phrase sets
    take ``length`` consecutive tokens from a random document position.
    """
    rng = np.random.default_rng(seed)
    vocab = corpus.vocabulary
    if kind in (WORD_LOW, WORD_HIGH):
        cand = [i + 1 for i, (t, cf) in enumerate(zip(vocab.terms, vocab.cf))
                if is_word(t) and (cf < threshold if kind == WORD_LOW else cf > threshold)]
        if not cand:
            raise ValueError(f"no {kind} candidates with threshold {threshold}")
        picks = rng.choice(len(cand), size=count)
        qs = [[cand[int(p)]] for p in picks]
    elif kind in (CONJUNCTIVE, PHRASE):
        if length < 2:
            raise ValueError("conjunctive and phrase queries need at least two terms")
        usable = [d for d in corpus.documents if len(d.tokens) >= length]
        if not usable:
            raise ValueError(f"no document has {length} tokens")
        qs = []
        tries = 0
        while len(qs) < count:
            tries += 1
            if tries > 100 * count:
                raise ValueError("could not draw enough phrases")
            d = usable[int(rng.integers(len(usable)))]
            s = int(rng.integers(len(d.tokens) - length + 1))
            q = list(d.tokens[s:s + length])
            words = [vocab.term(t) for t in q]
            if corpus.mode == POSITIONAL and any("\n" in w or "\r" in w for w in words):
                continue
            if corpus.mode == POSITIONAL and (not is_word(words[0]) and words[0].startswith(" ")
                                              or not is_word(words[-1]) and words[-1].endswith(" ")):
                # would not survive a text round trip through a query file
                continue
            qs.append(q)
    else:
        raise ValueError(f"unknown query kind {kind!r}")
    return QuerySet(kind, qs, [[vocab.term(t) for t in q] for q in qs])


def corpus_from_text(text: str, mode: str = NONPOSITIONAL, marker: str = RECORD_MARKER, **kw) -> Corpus:
    return ingest(read_records(io.StringIO(text), marker), mode, **kw)
