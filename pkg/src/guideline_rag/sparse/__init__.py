"""Keyword retrieval: preprocessing, BM25 scoring, parameter tuning."""

from .bm25 import (
    Bm25Params,
    SparseIndex,
    build_index,
    bm25_score,
    idf,
    load_sparse_index,
    raw_idf,
    save_sparse_index,
    search_sparse,
)
from .preprocess import STOP_WORDS, lemmatize, preprocess
from .tuning import tune_params

__all__ = [
    "Bm25Params",
    "SparseIndex",
    "STOP_WORDS",
    "bm25_score",
    "build_index",
    "idf",
    "lemmatize",
    "load_sparse_index",
    "preprocess",
    "raw_idf",
    "save_sparse_index",
    "search_sparse",
    "tune_params",
]
