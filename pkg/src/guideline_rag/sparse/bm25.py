"""Okapi BM25 index and scoring.

IDF uses the non-negative form ln((N - n + 0.5)/(n + 0.5) + 1). epsilon acts
as a floor: any IDF below epsilon times the mean positive IDF of the
vocabulary is raised to that floor, so very common terms keep a small but
non-vanishing weight.
"""

from __future__ import annotations

import json
import math
from bisect import bisect_left
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from ..chunking import Chunk
from ..errors import EmptyCorpus, EmptyQuery, OrdinalOutOfRange
from ..io_utils import atomic_write_text
from ..ranking import RankedList, ranked_list_from_scores
from .preprocess import preprocess

_FORMAT = "bm25-index"
_VERSION = 1


@dataclass(frozen=True)
class Bm25Params:
    k1: float = 1.7
    b: float = 0.83
    epsilon: float = 0.05

    def __post_init__(self) -> None:
        if self.k1 <= 0:
            raise ValueError(f"k1 must be positive, got {self.k1}")
        if not 0 <= self.b <= 1:
            raise ValueError(f"b must lie in [0, 1], got {self.b}")
        if self.epsilon < 0:
            raise ValueError(f"epsilon must be non-negative, got {self.epsilon}")


@dataclass
class SparseIndex:
    # postings: term -> [(chunk ordinal, term frequency)], ordinals ascending
    postings: dict[str, list[tuple[int, int]]]
    doc_lengths: list[int]
    avgdl: float
    n_docs: int
    doc_freq: dict[str, int]
    params: Bm25Params
    chunk_ids: list[str]
    _mean_raw_idf: float | None = field(default=None, repr=False)

    @property
    def mean_raw_idf(self) -> float:
        if self._mean_raw_idf is None:
            positive = [
                v
                for n in self.doc_freq.values()
                if (v := raw_idf(n, self.n_docs)) > 0
            ]
            self._mean_raw_idf = sum(positive) / len(positive) if positive else 0.0
        return self._mean_raw_idf

    @property
    def idf_floor(self) -> float:
        return self.params.epsilon * self.mean_raw_idf


def raw_idf(n: int, n_docs: int) -> float:
    """Unfloored inverse document frequency for a term in n of n_docs chunks."""
    return math.log((n_docs - n + 0.5) / (n + 0.5) + 1.0)


def idf(term: str, index: SparseIndex) -> float:
    value = raw_idf(index.doc_freq.get(term, 0), index.n_docs)
    return max(value, index.idf_floor)


def build_index(chunks: list[Chunk], params: Bm25Params | None = None) -> SparseIndex:
    if not chunks:
        raise EmptyCorpus("cannot build a BM25 index over zero chunks")
    params = params or Bm25Params()
    postings: dict[str, list[tuple[int, int]]] = {}
    doc_lengths: list[int] = []
    for ordinal, chunk in enumerate(chunks):
        terms = preprocess(chunk.text)
        doc_lengths.append(len(terms))
        for term, tf in sorted(Counter(terms).items()):
            postings.setdefault(term, []).append((ordinal, tf))
    n_docs = len(chunks)
    return SparseIndex(
        postings=postings,
        doc_lengths=doc_lengths,
        avgdl=sum(doc_lengths) / n_docs,
        n_docs=n_docs,
        doc_freq={term: len(entries) for term, entries in postings.items()},
        params=params,
        chunk_ids=[chunk.chunk_id for chunk in chunks],
    )


def _term_frequency(index: SparseIndex, term: str, ordinal: int) -> int:
    entries = index.postings.get(term, [])
    pos = bisect_left(entries, (ordinal,))
    if pos < len(entries) and entries[pos][0] == ordinal:
        return entries[pos][1]
    return 0


def bm25_score(query_terms: list[str], chunk_ordinal: int, index: SparseIndex) -> float:
    if not 0 <= chunk_ordinal < index.n_docs:
        raise OrdinalOutOfRange(
            f"ordinal {chunk_ordinal} outside [0, {index.n_docs})"
        )
    k1, b = index.params.k1, index.params.b
    norm = 1 - b + b * index.doc_lengths[chunk_ordinal] / index.avgdl
    score = 0.0
    for term in query_terms:
        tf = _term_frequency(index, term, chunk_ordinal)
        if tf:
            score += idf(term, index) * tf * (k1 + 1) / (tf + k1 * norm)
    return score


def search_sparse(query: str, index: SparseIndex, top_k: int) -> RankedList:
    terms = preprocess(query)
    if not terms:
        raise EmptyQuery(f"query reduces to no searchable terms: {query!r}")
    k1, b = index.params.k1, index.params.b
    scores: dict[int, float] = {}
    for term in terms:
        entries = index.postings.get(term)
        if not entries:
            continue
        weight = idf(term, index)
        for ordinal, tf in entries:
            norm = 1 - b + b * index.doc_lengths[ordinal] / index.avgdl
            scores[ordinal] = scores.get(ordinal, 0.0) + (
                weight * tf * (k1 + 1) / (tf + k1 * norm)
            )
    scored = [
        (index.chunk_ids[ordinal], score)
        for ordinal, score in scores.items()
        if score > 0
    ]
    return ranked_list_from_scores(scored, source="sparse", top_k=top_k)


# --- persistence -------------------------------------------------------------


def save_sparse_index(index: SparseIndex, path: str | Path) -> None:
    payload = {
        "format": _FORMAT,
        "version": _VERSION,
        "params": {
            "k1": index.params.k1,
            "b": index.params.b,
            "epsilon": index.params.epsilon,
        },
        "chunk_ids": index.chunk_ids,
        "doc_lengths": index.doc_lengths,
        "postings": {
            term: [[o, tf] for o, tf in entries]
            for term, entries in index.postings.items()
        },
    }
    atomic_write_text(path, json.dumps(payload, ensure_ascii=False))


def load_sparse_index(path: str | Path) -> SparseIndex:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("format") != _FORMAT:
        raise ValueError(f"not a BM25 index file: {path}")
    if payload.get("version") != _VERSION:
        raise ValueError(f"unsupported BM25 index version: {payload.get('version')}")
    postings = {
        term: [(int(o), int(tf)) for o, tf in entries]
        for term, entries in payload["postings"].items()
    }
    doc_lengths = [int(x) for x in payload["doc_lengths"]]
    n_docs = len(doc_lengths)
    return SparseIndex(
        postings=postings,
        doc_lengths=doc_lengths,
        avgdl=sum(doc_lengths) / n_docs if n_docs else 0.0,
        n_docs=n_docs,
        doc_freq={term: len(entries) for term, entries in postings.items()},
        params=Bm25Params(**payload["params"]),
        chunk_ids=list(payload["chunk_ids"]),
    )
