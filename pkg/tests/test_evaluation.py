"""Two-stage evaluation: rank metrics, judged metrics, datasets, and cost."""

from __future__ import annotations

import json
import random
from pathlib import Path

import pytest

from guideline_rag.chunking import Chunk
from guideline_rag.dense import HashEmbeddingClient
from guideline_rag.errors import (
    EmptyEvalSet,
    EmptyInput,
    ExcludedSection,
    JudgeUnparseable,
)
from guideline_rag.evaluation import (
    DEFAULT_PRICES_PER_MILLION,
    CostModel,
    QaPair,
    QueryChunkPair,
    compute_retrieval_report,
    context_precision,
    context_precision_detail,
    context_recall,
    estimate_cost,
    evaluate_generation,
    faithfulness,
    faithfulness_detail,
    gen_synthetic_query,
    build_synthetic_pairs,
    load_standin_qa,
    read_pairs_jsonl,
    read_qa_jsonl,
    reciprocal_rank,
    response_relevancy,
    response_relevancy_detail,
    split_pairs,
    write_pairs_jsonl,
    write_qa_jsonl,
)
from guideline_rag.evaluation.judges import _CORRECTION
from guideline_rag.evaluation.synthetic import QUERY_GEN_SYSTEM
from guideline_rag.ranking import RankedList, ranked_list_from_scores

from conftest import ScriptedJudge

GOLDENS = Path(__file__).parent / "goldens"


def ranked_with_correct_at(correct: str, rank: int | None, depth: int = 20) -> RankedList:
    """A ranking of `depth` filler ids with `correct` forced to `rank`."""
    ids = [f"filler#{i:04d}" for i in range(depth)]
    if rank is not None:
        ids[rank - 1] = correct
    scored = [(cid, float(depth - i)) for i, cid in enumerate(ids)]
    return ranked_list_from_scores(scored, source="test")


class TestRankMetrics:
    def test_reciprocal_rank(self):
        assert reciprocal_rank(ranked_with_correct_at("c", 1), "c") == 1.0
        assert reciprocal_rank(ranked_with_correct_at("c", 2), "c") == 0.5
        assert reciprocal_rank(ranked_with_correct_at("c", None), "c") == 0.0

    def test_report_on_known_ranks(self):
        pairs = [QueryChunkPair(f"q{i}", f"c{i}") for i in range(3)]
        ranks = {"q0": 1, "q1": 2, "q2": 4}

        def ranker(query):
            return ranked_with_correct_at(f"c{query[1]}", ranks[query])

        report = compute_retrieval_report(pairs, ranker)
        assert report.mrr == pytest.approx((1 + 1 / 2 + 1 / 4) / 3)
        assert report.recall_at[1] == pytest.approx(1 / 3)
        assert report.recall_at[5] == pytest.approx(1.0)
        assert report.recall_at[10] == pytest.approx(1.0)
        assert report.median_rank == 2.0
        assert report.mean_rank == pytest.approx(7 / 3)
        assert report.max_rank == 4
        assert report.n_queries == 3
        assert report.not_found_count == 0

    def test_missing_chunk_excluded_from_rank_stats(self):
        pairs = [QueryChunkPair("q0", "c0"), QueryChunkPair("q1", "c1")]

        def ranker(query):
            return ranked_with_correct_at("c0", 2 if query == "q0" else None)

        report = compute_retrieval_report(pairs, ranker)
        assert report.mrr == pytest.approx(0.25)
        assert report.not_found_count == 1
        assert report.median_rank == 2.0
        assert report.max_rank == 2
        assert report.per_query[1]["rank"] is None

    def test_all_missing_reports_none_ranks(self):
        pairs = [QueryChunkPair("q", "never")]
        report = compute_retrieval_report(pairs, lambda q: ranked_with_correct_at("x", 1))
        assert report.mrr == 0.0
        assert report.median_rank is None
        assert report.mean_rank is None
        assert report.max_rank is None
        assert report.not_found_count == 1

    def test_per_query_can_be_dropped(self):
        pairs = [QueryChunkPair("q", "c")]
        report = compute_retrieval_report(
            pairs, lambda q: ranked_with_correct_at("c", 1), keep_per_query=False
        )
        assert report.per_query == []

    def test_empty_eval_set_rejected(self):
        with pytest.raises(EmptyEvalSet):
            compute_retrieval_report([], lambda q: ranked_with_correct_at("c", 1))

    def test_to_dict_uses_string_cutoffs(self):
        pairs = [QueryChunkPair("q", "c")]
        report = compute_retrieval_report(pairs, lambda q: ranked_with_correct_at("c", 1))
        data = report.to_dict()
        assert set(data["recall_at"]) == {"1", "5", "10", "15"}
        assert data["mrr"] == 1.0

    def test_improving_one_rank_never_hurts(self):
        # moving any single query's correct chunk up a rank must not lower
        # MRR or any recall cutoff
        rng = random.Random(97)
        for _ in range(1000):
            n = rng.randint(1, 8)
            ranks: list[int | None] = [
                rng.choice([None] + list(range(1, 19))) for _ in range(n)
            ]
            target = rng.randrange(n)
            improved = list(ranks)
            improved[target] = (
                18 if ranks[target] is None else max(1, ranks[target] - 1)
            )
            pairs = [QueryChunkPair(f"q{i}", f"c{i}") for i in range(n)]

            def make_ranker(assignment):
                return lambda q: ranked_with_correct_at(
                    f"c{q[1:]}", assignment[int(q[1:])]
                )

            before = compute_retrieval_report(
                pairs, make_ranker(ranks), keep_per_query=False
            )
            after = compute_retrieval_report(
                pairs, make_ranker(improved), keep_per_query=False
            )
            assert after.mrr >= before.mrr
            for k in before.recall_at:
                assert after.recall_at[k] >= before.recall_at[k]


class TestSplitsAndPairFiles:
    def test_split_is_deterministic_and_order_preserving(self):
        pairs = [QueryChunkPair(f"q{i}", f"c{i}") for i in range(20)]
        a = split_pairs(pairs)
        b = split_pairs(pairs)
        assert a == b
        assert [p.query for p in a] == [p.query for p in pairs]
        assert sum(p.split == "validation" for p in a) == 3  # round(20 * 0.15)

    def test_split_fraction_controls_validation_size(self):
        pairs = [QueryChunkPair(f"q{i}", f"c{i}") for i in range(10)]
        relabeled = split_pairs(pairs, validation_fraction=0.5)
        assert sum(p.split == "validation" for p in relabeled) == 5

    def test_unknown_split_rejected(self):
        with pytest.raises(ValueError):
            QueryChunkPair("q", "c", split="train")

    def test_pairs_jsonl_roundtrip(self, tmp_path):
        pairs = split_pairs([QueryChunkPair(f"q{i}", f"c{i}") for i in range(7)])
        path = tmp_path / "pairs.jsonl"
        write_pairs_jsonl(pairs, path)
        assert read_pairs_jsonl(path) == pairs


def judge_cfg():
    from guideline_rag.generation import get_model_config

    return get_model_config("gpt-4.1-mini")


def statements_reply(statements):
    return json.dumps({"statements": statements})


def verdicts_reply(verdicts):
    return json.dumps(
        {
            "statements": [
                {"statement": f"s{i}", "reason": "r", "verdict": v}
                for i, v in enumerate(verdicts)
            ]
        }
    )


class TestFaithfulness:
    def test_supported_over_total(self):
        judge = ScriptedJudge(
            [statements_reply(["s0", "s1", "s2"]), verdicts_reply([1, 0, 1])]
        )
        value = faithfulness("q", "answer text", ["ctx a", "ctx b"], judge)
        assert value == pytest.approx(2 / 3)
        assert len(judge.calls) == 2

    def test_call_payloads(self):
        judge = ScriptedJudge([statements_reply(["s0"]), verdicts_reply([1])])
        faithfulness("the question", "the answer", ["ctx a", "ctx b"], judge)
        statements_call, verdicts_call = judge.calls
        assert statements_call[1] == 'question: "the question"\nanswer: "the answer"'
        assert verdicts_call[1] == (
            'context: "ctx a\\n\\nctx b"\nstatements: ["s0"]'
        )

    def test_no_statements_is_undefined(self):
        judge = ScriptedJudge([statements_reply([])])
        result = faithfulness_detail("q", "Hmm.", ["ctx"], judge)
        assert result.value is None
        assert len(judge.calls) == 1

    def test_dropped_verdict_counts_unsupported(self):
        judge = ScriptedJudge(
            [statements_reply(["s0", "s1", "s2"]), verdicts_reply([1, 1])]
        )
        assert faithfulness("q", "a", ["ctx"], judge) == pytest.approx(2 / 3)

    def test_code_fenced_reply_accepted_without_retry(self):
        fenced = f"```json\n{statements_reply(['s0'])}\n```"
        judge = ScriptedJudge([fenced, verdicts_reply([1])])
        assert faithfulness("q", "a", ["ctx"], judge) == 1.0
        assert len(judge.calls) == 2

    def test_malformed_reply_retried_once_with_correction(self):
        judge = ScriptedJudge(
            ["not json at all", statements_reply(["s0"]), verdicts_reply([0])]
        )
        assert faithfulness("q", "a", ["ctx"], judge) == 0.0
        assert len(judge.calls) == 3
        assert judge.calls[1][1].endswith(_CORRECTION)
        assert judge.calls[1][1].startswith('question: "q"')

    def test_unparseable_after_retry_raises(self):
        judge = ScriptedJudge(["garbage", "still garbage"])
        with pytest.raises(JudgeUnparseable):
            faithfulness("q", "a", ["ctx"], judge)

    def test_out_of_range_verdict_is_schema_error(self):
        judge = ScriptedJudge([statements_reply(["s0"])] + [verdicts_reply([2])] * 2)
        with pytest.raises(JudgeUnparseable):
            faithfulness("q", "a", ["ctx"], judge)


def relevancy_reply(question, noncommittal=0):
    return json.dumps({"question": question, "noncommittal": noncommittal})


class TestResponseRelevancy:
    def test_identical_reverse_questions_score_one(self):
        question = "What dose of metformin is recommended?"
        judge = ScriptedJudge([relevancy_reply(question)] * 3)
        value = response_relevancy(question, "answer", judge, HashEmbeddingClient())
        assert value == pytest.approx(1.0, abs=1e-6)
        assert len(judge.calls) == 3
        assert judge.calls[0][1] == 'response: "answer"'

    def test_different_questions_score_below_one(self):
        judge = ScriptedJudge(
            [
                relevancy_reply("What is the metformin dose?"),
                relevancy_reply("How often should renal function be checked?"),
                relevancy_reply("Entirely unrelated question about weather?"),
            ]
        )
        value = response_relevancy(
            "What is the metformin dose?", "answer", judge, HashEmbeddingClient()
        )
        assert value is not None and value < 1.0

    def test_any_noncommittal_zeroes_the_metric(self):
        judge = ScriptedJudge(
            [
                relevancy_reply("good question"),
                relevancy_reply("I do not know", noncommittal=1),
                relevancy_reply("another question"),
            ]
        )
        value = response_relevancy("q", "I cannot say.", judge, HashEmbeddingClient())
        assert value == 0.0

    def test_n_questions_controls_call_count(self):
        judge = ScriptedJudge([relevancy_reply("q")] * 2)
        result = response_relevancy_detail(
            "q", "a", judge, HashEmbeddingClient(), n_questions=2
        )
        assert len(judge.calls) == 2
        assert len(result.detail) == 2
        assert all("similarity" in g for g in result.detail)


def precision_reply(verdict):
    return json.dumps({"reason": "r", "verdict": verdict})


class TestContextPrecision:
    @pytest.mark.parametrize(
        "verdicts,expected",
        [
            ([1, 0], 1.0),
            ([0, 1], 0.5),
            ([0, 0], 0.0),
            ([1, 1], 1.0),
            ([1, 0, 1], (1.0 + 2 / 3) / 2),
        ],
    )
    def test_rank_weighted_precision(self, verdicts, expected):
        judge = ScriptedJudge([precision_reply(v) for v in verdicts])
        contexts = [f"ctx {i}" for i in range(len(verdicts))]
        value = context_precision("q", "a", contexts, "ref", judge)
        assert value == pytest.approx(expected)

    def test_judges_against_reference_when_given(self):
        judge = ScriptedJudge([precision_reply(1)])
        context_precision("q", "generated", ["ctx"], "the reference", judge)
        assert '"the reference"' in judge.calls[0][1]
        assert '"generated"' not in judge.calls[0][1]

    def test_falls_back_to_answer_without_reference(self):
        judge = ScriptedJudge([precision_reply(1)])
        context_precision("q", "generated", ["ctx"], "", judge)
        assert '"generated"' in judge.calls[0][1]

    def test_requires_contexts(self):
        with pytest.raises(EmptyInput):
            context_precision("q", "a", [], "ref", ScriptedJudge([]))

    def test_one_call_per_context(self):
        judge = ScriptedJudge([precision_reply(1)] * 4)
        result = context_precision_detail(
            "q", "a", [f"c{i}" for i in range(4)], "ref", judge
        )
        assert len(judge.calls) == 4
        assert len(result.detail) == 4


def recall_reply(attributions):
    return json.dumps(
        {
            "classifications": [
                {"statement": f"s{i}", "reason": "r", "attributed": a}
                for i, a in enumerate(attributions)
            ]
        }
    )


class TestContextRecall:
    def test_attributed_over_total(self):
        judge = ScriptedJudge([recall_reply([1, 0, 1])])
        assert context_recall("q", ["ctx"], "ref answer", judge) == pytest.approx(2 / 3)
        assert len(judge.calls) == 1

    def test_empty_classification_is_undefined(self):
        judge = ScriptedJudge([recall_reply([])])
        assert context_recall("q", ["ctx"], "ref", judge) is None

    def test_requires_reference(self):
        with pytest.raises(EmptyInput):
            context_recall("q", ["ctx"], "", ScriptedJudge([]))

    def test_contexts_joined_for_the_judge(self):
        judge = ScriptedJudge([recall_reply([1])])
        context_recall("q", ["ctx a", "ctx b"], "ref", judge)
        assert '"ctx a\\n\\nctx b"' in judge.calls[0][1]


class TestEvaluateGeneration:
    def _replies_for_item(self, n_contexts):
        return (
            [precision_reply(1)] * n_contexts
            + [recall_reply([1, 1])]
            + [relevancy_reply("What is the question?")] * 3
            + [statements_reply(["s0", "s1"]), verdicts_reply([1, 1])]
        )

    def test_full_run_aggregates(self):
        pair = QaPair("What is the question?", "Reference.", "NG1, Section 1")
        judge = ScriptedJudge(self._replies_for_item(n_contexts=2))

        def run(question):
            return "Generated answer.", ["ctx a", "ctx b"]

        report = evaluate_generation(
            [pair], run, judge, HashEmbeddingClient(), cfg=judge_cfg()
        )
        assert report.n_items == 1
        assert report.context_precision == pytest.approx(1.0)
        assert report.context_recall == pytest.approx(1.0)
        assert report.faithfulness == pytest.approx(1.0)
        assert report.response_relevancy == pytest.approx(1.0, abs=1e-6)
        item = report.per_item[0]
        assert item["question"] == pair.question
        assert item["source_ref"] == "NG1, Section 1"
        assert item["answer"] == "Generated answer."

    def test_undefined_metrics_skipped_in_aggregate(self):
        pairs = [
            QaPair("q one?", "Ref.", "NG1"),
            QaPair("q two?", "Ref.", "NG1"),
        ]
        # second item yields zero statements, so only the first counts
        replies = (
            [precision_reply(1), recall_reply([1]), relevancy_reply("q one?")]
            + [relevancy_reply("q one?")] * 2
            + [statements_reply(["s0"]), verdicts_reply([0])]
            + [precision_reply(0), recall_reply([0]), relevancy_reply("q two?")]
            + [relevancy_reply("q two?")] * 2
            + [statements_reply([])]
        )
        judge = ScriptedJudge(replies)
        report = evaluate_generation(
            pairs, lambda q: ("a", ["ctx"]), judge, HashEmbeddingClient()
        )
        assert report.faithfulness == pytest.approx(0.0)  # only item one defined
        assert report.context_recall == pytest.approx(0.5)
        assert report.per_item[1]["faithfulness"]["value"] is None

    def test_empty_set_rejected(self):
        with pytest.raises(EmptyEvalSet):
            evaluate_generation(
                [], lambda q: ("a", []), ScriptedJudge([]), HashEmbeddingClient()
            )

    def test_qa_pair_requires_fields(self):
        with pytest.raises(ValueError):
            QaPair("", "ref", "src")
        with pytest.raises(ValueError):
            QaPair("q", "", "src")
        with pytest.raises(ValueError):
            QaPair("q", "ref", "")


class TestSyntheticQueries:
    def test_system_prompt_matches_golden(self):
        golden = (
            (GOLDENS / "query_gen_system.txt").read_text(encoding="utf-8").rstrip("\n")
        )
        assert QUERY_GEN_SYSTEM == golden

    def test_system_prompt_carries_example_queries(self):
        for example in [
            "What are the treatment options for managing hypertension in pregnant women?",
            "How should blood glucose be monitored in diabetes patients?",
            "When should antibiotics be prescribed for respiratory infections?",
        ]:
            assert example in QUERY_GEN_SYSTEM

    def _chunk(self, chunk_id, heading_path):
        return Chunk(
            chunk_id=chunk_id,
            doc_id=chunk_id.split("#")[0],
            heading_path=heading_path,
            text="Offer a statin to adults with a QRISK over 10%.",
            token_count=10,
        )

    def test_query_generated_and_stripped(self):
        judge = ScriptedJudge(["  What QRISK score warrants a statin?\n"])
        chunk = self._chunk("NG1#0000", ["Cardiovascular disease"])
        query = gen_synthetic_query(chunk, judge, cfg=judge_cfg())
        assert query == "What QRISK score warrants a statin?"
        system_text, user_text = judge.calls[0]
        assert system_text == QUERY_GEN_SYSTEM
        assert user_text.startswith("Document Excerpt: Offer a statin")
        assert user_text.endswith(
            "Generate a realistic search query for this NICE guideline content."
        )

    def test_boilerplate_sections_refused(self):
        chunk = self._chunk("NG1#0001", ["Update information"])
        with pytest.raises(ExcludedSection):
            gen_synthetic_query(chunk, ScriptedJudge([]), cfg=judge_cfg())

    def test_build_pairs_skips_excluded_chunks(self):
        chunks = [
            self._chunk("NG1#0000", ["Recommendations"]),
            self._chunk("NG1#0001", ["Appendix"]),
            self._chunk("NG1#0002", ["Recommendations", "1.2 Treatment"]),
        ]
        judge = ScriptedJudge(["Query one?", "Query two?"])
        pairs = build_synthetic_pairs(chunks, judge, cfg=judge_cfg())
        assert pairs == [("Query one?", "NG1#0000"), ("Query two?", "NG1#0002")]


class TestStandinDataset:
    def test_loads_schema_valid_pairs(self):
        pairs = load_standin_qa()
        assert 10 <= len(pairs) <= 20
        for pair in pairs:
            assert isinstance(pair, QaPair)
            assert pair.question.endswith("?")
            assert pair.reference_answer
            assert pair.source_ref

    def test_qa_jsonl_roundtrip(self, tmp_path):
        pairs = load_standin_qa()
        path = tmp_path / "qa.jsonl"
        write_qa_jsonl(pairs, path)
        assert read_qa_jsonl(path) == pairs


class TestCostModel:
    def test_ten_chunk_estimate(self):
        breakdown = estimate_cost(10)
        by_name = {c.name: c for c in breakdown.components}
        assert by_name["embedding"].tokens == 100
        assert by_name["rerank"].tokens == 9000
        assert by_name["llm_input"].tokens == 5750
        assert by_name["llm_output"].tokens == 500
        assert breakdown.total_tokens == 15_350
        assert breakdown.total_cost == pytest.approx(0.008993, abs=1e-9)

    def test_zero_chunk_estimate(self):
        breakdown = estimate_cost(0)
        by_name = {c.name: c.tokens for c in breakdown.components}
        assert by_name["llm_input"] == 750
        assert breakdown.total_tokens == 10_350

    def test_default_prices(self):
        assert DEFAULT_PRICES_PER_MILLION == {
            "embedding": 0.18,
            "rerank": 0.05,
            "llm_input": 1.10,
            "llm_output": 4.40,
        }

    def test_cost_scales_linearly_with_context(self):
        costs = [estimate_cost(n).total_cost for n in range(5)]
        deltas = [b - a for a, b in zip(costs, costs[1:])]
        for delta in deltas:
            assert delta == pytest.approx(500 * 1.10 / 1e6)

    def test_negative_context_rejected(self):
        with pytest.raises(ValueError):
            estimate_cost(-1)

    def test_missing_price_rejected(self):
        with pytest.raises(ValueError):
            CostModel(prices_per_million={"embedding": 0.18})

    def test_negative_price_rejected(self):
        prices = dict(DEFAULT_PRICES_PER_MILLION, rerank=-0.01)
        with pytest.raises(ValueError):
            CostModel(prices_per_million=prices)

    def test_to_dict_structure(self):
        data = estimate_cost(2).to_dict()
        assert data["n_context_chunks"] == 2
        assert [c["name"] for c in data["components"]] == [
            "embedding",
            "rerank",
            "llm_input",
            "llm_output",
        ]
        assert data["total_tokens"] == sum(c["tokens"] for c in data["components"])
