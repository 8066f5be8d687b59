"""BM25 scoring against a from-scratch reference implementation."""

from __future__ import annotations

import math
import random
import time

import pytest

from guideline_rag.chunking import Chunk, chunk_corpus
from guideline_rag.errors import (
    EmptyCorpus,
    EmptyQuery,
    EmptyValidationSet,
    OrdinalOutOfRange,
)
from guideline_rag.pipeline import PipelineConfig
from guideline_rag.sparse import (
    Bm25Params,
    bm25_score,
    build_index,
    idf,
    load_sparse_index,
    preprocess,
    raw_idf,
    save_sparse_index,
    search_sparse,
    tune_params,
)

from conftest import synthetic_corpus


def mk_chunk(chunk_id: str, text: str) -> Chunk:
    return Chunk(
        chunk_id=chunk_id,
        doc_id=chunk_id.split("#")[0],
        heading_path=[],
        text=text,
        token_count=len(text.split()),
    )


class ReferenceBm25:
    """Naive BM25 scorer recomputed from chunk texts, no inverted index.

    Scores every chunk by looping over the query terms, so term order and
    multiplicity contribute exactly as in the closed-form definition.
    """

    def __init__(self, chunks: list[Chunk], params: Bm25Params | None = None):
        self.params = params or Bm25Params()
        self.chunk_ids = [c.chunk_id for c in chunks]
        self.term_counts: list[dict[str, int]] = []
        df: dict[str, int] = {}
        for chunk in chunks:
            counts: dict[str, int] = {}
            for term in preprocess(chunk.text):
                counts[term] = counts.get(term, 0) + 1
            self.term_counts.append(counts)
            for term in sorted(counts):
                df[term] = df.get(term, 0) + 1
        self.df = df
        self.n_docs = len(chunks)
        self.lengths = [sum(c.values()) for c in self.term_counts]
        self.avgdl = sum(self.lengths) / self.n_docs
        positive = [
            v for n in df.values() if (v := self._raw_idf(n)) > 0
        ]
        mean = sum(positive) / len(positive) if positive else 0.0
        self.floor = self.params.epsilon * mean

    def _raw_idf(self, n: int) -> float:
        return math.log((self.n_docs - n + 0.5) / (n + 0.5) + 1.0)

    def idf(self, term: str) -> float:
        return max(self._raw_idf(self.df.get(term, 0)), self.floor)

    def score(self, query_terms: list[str], ordinal: int) -> float:
        k1, b = self.params.k1, self.params.b
        norm = 1 - b + b * self.lengths[ordinal] / self.avgdl
        total = 0.0
        for term in query_terms:
            tf = self.term_counts[ordinal].get(term, 0)
            if tf:
                total += self.idf(term) * tf * (k1 + 1) / (tf + k1 * norm)
        return total

    def search(self, query: str, top_k: int) -> list[tuple[str, float]]:
        terms = preprocess(query)
        scored = []
        for ordinal in range(self.n_docs):
            s = self.score(terms, ordinal)
            if s > 0:
                scored.append((self.chunk_ids[ordinal], s))
        scored.sort(key=lambda pair: (-pair[1], pair[0]))
        return scored[:top_k]


@pytest.fixture(scope="module")
def corpus_chunks() -> list[Chunk]:
    chunks = chunk_corpus(synthetic_corpus(12, seed=29), PipelineConfig().chunker)
    assert len(chunks) >= 50
    return chunks


@pytest.fixture(scope="module")
def indexed(corpus_chunks):
    return build_index(corpus_chunks), ReferenceBm25(corpus_chunks)


def _sample_queries(chunks: list[Chunk], n: int, seed: int) -> list[str]:
    rng = random.Random(seed)
    queries = []
    for _ in range(n):
        source = rng.choice(chunks).text.split()
        words = [rng.choice(source) for _ in range(rng.randint(2, 6))]
        if rng.random() < 0.3:
            words.append(words[0])  # repeated term
        if rng.random() < 0.2:
            words.append("zzunseenzz")
        queries.append(" ".join(words))
    return queries


class TestOrderingEquivalence:
    def test_matches_reference_on_sampled_queries(self, indexed, corpus_chunks):
        index, reference = indexed
        queries = _sample_queries(corpus_chunks, n=120, seed=5)
        started = time.monotonic()
        for query in queries:
            got = search_sparse(query, index, top_k=index.n_docs)
            want = reference.search(query, top_k=index.n_docs)
            assert [(e.chunk_id, e.score) for e in got.entries] == want, query
        assert time.monotonic() - started < 10.0

    def test_matches_reference_truncated(self, indexed, corpus_chunks):
        index, reference = indexed
        for query in _sample_queries(corpus_chunks, n=20, seed=6):
            got = search_sparse(query, index, top_k=7)
            want = reference.search(query, top_k=7)
            assert [(e.chunk_id, e.score) for e in got.entries] == want

    def test_ranks_are_one_based_and_dense(self, indexed):
        index, _ = indexed
        ranked = search_sparse("patient dose review", index, top_k=10)
        assert [e.rank for e in ranked.entries] == list(
            range(1, len(ranked.entries) + 1)
        )

    def test_bm25_score_agrees_with_search(self, indexed):
        index, _ = indexed
        terms = preprocess("patient dose review")
        ranked = search_sparse("patient dose review", index, top_k=index.n_docs)
        by_id = {e.chunk_id: e.score for e in ranked.entries}
        for ordinal, chunk_id in enumerate(index.chunk_ids):
            expected = by_id.get(chunk_id, 0.0)
            assert bm25_score(terms, ordinal, index) == expected


class TestIdf:
    def test_unseen_term_in_ten_docs(self):
        chunks = [
            mk_chunk(f"NG1#{i}", f"statin dosing review cycle {i}") for i in range(10)
        ]
        index = build_index(chunks)
        assert index.n_docs == 10
        assert idf("warfarin", index) == pytest.approx(math.log(22.0), abs=1e-9)

    def test_everywhere_term_in_ten_docs(self):
        # every vocabulary term is in all ten chunks, so the floor sits at
        # 0.05 * ln(22/21) and cannot mask the raw value
        chunks = [mk_chunk(f"NG1#{i}", "statin dosing review") for i in range(10)]
        index = build_index(chunks)
        assert index.doc_freq["statin"] == 10
        assert idf("statin", index) == pytest.approx(math.log(22.0 / 21.0), abs=1e-9)

    def test_raw_idf_formula(self):
        for n, n_docs in [(0, 10), (3, 10), (10, 10), (1, 1), (7, 50)]:
            expected = math.log((n_docs - n + 0.5) / (n + 0.5) + 1.0)
            assert raw_idf(n, n_docs) == expected

    def test_floor_lifts_common_terms(self):
        # "common" is in all 40 chunks; each tail term is in exactly one, so
        # the mean positive IDF is large and the floor overtakes ln(41.5/40.5)
        chunks = [mk_chunk(f"NG1#{i}", f"common tailword{i}") for i in range(40)]
        index = build_index(chunks)
        assert raw_idf(40, 40) < index.idf_floor
        assert idf("common", index) == index.idf_floor
        assert idf("tailword3", index) > index.idf_floor

    def test_zero_epsilon_disables_floor(self):
        chunks = [mk_chunk(f"NG1#{i}", f"common tailword{i}") for i in range(40)]
        index = build_index(chunks, Bm25Params(epsilon=0.0))
        assert index.idf_floor == 0.0
        assert idf("common", index) == raw_idf(40, 40)


class TestScoring:
    def test_repeated_query_term_adds_repeated_contribution(self, indexed):
        index, _ = indexed
        once = search_sparse("patient", index, top_k=1).entries[0]
        twice = search_sparse("patient patient", index, top_k=1).entries[0]
        assert twice.chunk_id == once.chunk_id
        assert twice.score == pytest.approx(2 * once.score)

    def test_zero_score_chunks_excluded(self):
        chunks = [
            mk_chunk("NG1#0", "lisinopril dosing"),
            mk_chunk("NG1#1", "metformin titration"),
        ]
        index = build_index(chunks)
        ranked = search_sparse("lisinopril", index, top_k=10)
        assert [e.chunk_id for e in ranked.entries] == ["NG1#0"]

    def test_tie_breaks_ascend_by_chunk_id(self):
        text = "identical words for every chunk"
        chunks = [mk_chunk(f"NG1#{i}", text) for i in (3, 1, 2, 0)]
        index = build_index(chunks)
        ranked = search_sparse("identical words", index, top_k=10)
        assert [e.chunk_id for e in ranked.entries] == [
            "NG1#0",
            "NG1#1",
            "NG1#2",
            "NG1#3",
        ]
        assert len({e.score for e in ranked.entries}) == 1

    def test_longer_chunk_scores_lower_for_same_tf(self):
        chunks = [
            mk_chunk("NG1#0", "apixaban review"),
            mk_chunk("NG1#1", "apixaban review " + "filler " * 30),
        ]
        index = build_index(chunks)
        ranked = search_sparse("apixaban", index, top_k=2)
        assert [e.chunk_id for e in ranked.entries] == ["NG1#0", "NG1#1"]

    def test_ordinal_out_of_range(self, indexed):
        index, _ = indexed
        with pytest.raises(OrdinalOutOfRange):
            bm25_score(["patient"], index.n_docs, index)
        with pytest.raises(OrdinalOutOfRange):
            bm25_score(["patient"], -1, index)

    def test_empty_query_rejected(self, indexed):
        index, _ = indexed
        with pytest.raises(EmptyQuery):
            search_sparse("the of and", index, top_k=5)

    def test_empty_corpus_rejected(self):
        with pytest.raises(EmptyCorpus):
            build_index([])


class TestParams:
    def test_defaults(self):
        params = Bm25Params()
        assert (params.k1, params.b, params.epsilon) == (1.7, 0.83, 0.05)

    @pytest.mark.parametrize(
        "kwargs",
        [{"k1": 0.0}, {"k1": -1.0}, {"b": -0.1}, {"b": 1.1}, {"epsilon": -0.01}],
    )
    def test_invalid_params_rejected(self, kwargs):
        with pytest.raises(ValueError):
            Bm25Params(**kwargs)


class TestPersistence:
    def test_save_load_roundtrip(self, indexed, tmp_path, corpus_chunks):
        index, _ = indexed
        path = tmp_path / "bm25.idx"
        save_sparse_index(index, path)
        loaded = load_sparse_index(path)
        assert loaded.postings == index.postings
        assert loaded.doc_lengths == index.doc_lengths
        assert loaded.chunk_ids == index.chunk_ids
        assert loaded.params == index.params
        for query in _sample_queries(corpus_chunks, n=10, seed=9):
            a = search_sparse(query, index, top_k=10)
            b = search_sparse(query, loaded, top_k=10)
            assert [(e.chunk_id, e.score) for e in a.entries] == [
                (e.chunk_id, e.score) for e in b.entries
            ]

    def test_saved_bytes_stable(self, indexed, tmp_path):
        index, _ = indexed
        first, second = tmp_path / "a.idx", tmp_path / "b.idx"
        save_sparse_index(index, first)
        save_sparse_index(index, second)
        assert first.read_bytes() == second.read_bytes()

    def test_load_rejects_other_formats(self, tmp_path):
        path = tmp_path / "bogus.idx"
        path.write_text('{"format": "dense-store", "version": 1}')
        with pytest.raises(ValueError):
            load_sparse_index(path)

    def test_load_rejects_future_version(self, indexed, tmp_path):
        import json

        index, _ = indexed
        path = tmp_path / "bm25.idx"
        save_sparse_index(index, path)
        payload = json.loads(path.read_text())
        payload["version"] = 99
        path.write_text(json.dumps(payload))
        with pytest.raises(ValueError):
            load_sparse_index(path)


class TestTuning:
    def test_empty_validation_set_rejected(self, corpus_chunks):
        with pytest.raises(EmptyValidationSet):
            tune_params(corpus_chunks, [])

    def test_ties_go_to_defaults(self, corpus_chunks):
        # a query matching a single chunk on a unique term ranks it first at
        # every grid point, so every point ties and the defaults must win
        chunks = corpus_chunks + [mk_chunk("NG999#0", "zanamivir inhalation pathway")]
        validation = [("zanamivir", "NG999#0")]
        best = tune_params(chunks, validation)
        assert best == Bm25Params()

    def test_prefers_higher_mrr(self):
        # target chunk repeats the query term; distractors carry one copy
        # inside much longer text. Stronger length normalisation (higher b)
        # separates them, so the best grid point must beat b=0.6 on MRR.
        target = mk_chunk("NG1#0", "dapagliflozin " * 5)
        distractors = [
            mk_chunk(f"NG1#{i}", "dapagliflozin " + "filler " * (i * 10))
            for i in range(1, 4)
        ]
        chunks = [target] + distractors
        validation = [("dapagliflozin dapagliflozin", "NG1#0")]
        best = tune_params(chunks, validation)
        index = build_index(chunks, best)
        assert search_sparse("dapagliflozin", index, top_k=1).entries[0].chunk_id == "NG1#0"

    def test_custom_grid_restricts_search(self, corpus_chunks):
        grid = {"k1": [1.2], "b": [0.75], "epsilon": [0.05]}
        validation = [("patient dose", corpus_chunks[0].chunk_id)]
        best = tune_params(corpus_chunks, validation, grid=grid)
        assert best == Bm25Params(k1=1.2, b=0.75, epsilon=0.05)
