"""Two-stage evaluation: retrieval rank metrics and judged generation metrics."""

from .cost import (
    DEFAULT_PRICES_PER_MILLION,
    CostBreakdown,
    CostComponent,
    CostModel,
    estimate_cost,
)
from .datasets import load_standin_qa, read_qa_jsonl, write_qa_jsonl
from .judges import (
    DEFAULT_JUDGE_MODEL,
    GenerationReport,
    MetricResult,
    QaPair,
    context_precision,
    context_precision_detail,
    context_recall,
    context_recall_detail,
    evaluate_generation,
    faithfulness,
    faithfulness_detail,
    judge_json,
    response_relevancy,
    response_relevancy_detail,
)
from .retrieval import (
    RECALL_CUTOFFS,
    QueryChunkPair,
    RetrievalReport,
    compute_retrieval_report,
    read_pairs_jsonl,
    reciprocal_rank,
    split_pairs,
    write_pairs_jsonl,
)
from .synthetic import QUERY_GEN_SYSTEM, build_synthetic_pairs, gen_synthetic_query

__all__ = [
    "DEFAULT_JUDGE_MODEL",
    "DEFAULT_PRICES_PER_MILLION",
    "RECALL_CUTOFFS",
    "QUERY_GEN_SYSTEM",
    "CostBreakdown",
    "CostComponent",
    "CostModel",
    "GenerationReport",
    "MetricResult",
    "QaPair",
    "QueryChunkPair",
    "RetrievalReport",
    "build_synthetic_pairs",
    "compute_retrieval_report",
    "context_precision",
    "context_precision_detail",
    "context_recall",
    "context_recall_detail",
    "estimate_cost",
    "evaluate_generation",
    "faithfulness",
    "faithfulness_detail",
    "gen_synthetic_query",
    "judge_json",
    "load_standin_qa",
    "read_pairs_jsonl",
    "read_qa_jsonl",
    "reciprocal_rank",
    "response_relevancy",
    "response_relevancy_detail",
    "split_pairs",
    "write_pairs_jsonl",
    "write_qa_jsonl",
]
