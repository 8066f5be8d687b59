"""LLM-judged generation metrics with domain-tuned judge prompts.

Each metric drives a judge model through a fixed prompt asset and parses a
strict JSON reply; one corrective retry is allowed before the call fails as
unparseable. Metric values are in [0, 1]; a metric that has nothing to
score (an answer yielding zero statements, a reference with no sentences)
reports None and the item is skipped in aggregation rather than counted
as zero.
"""

from __future__ import annotations

import json
import re
from collections.abc import Callable
from dataclasses import dataclass, field
from importlib.resources import files
from typing import TypeVar

from ..dense.clients import EmbeddingClient
from ..dense.store import dot, embed
from ..errors import EmptyEvalSet, EmptyInput, JudgeUnparseable
from ..generation.chat import ChatClient
from ..generation.models import ModelConfig, get_model_config

T = TypeVar("T")

_CODE_FENCE_RE = re.compile(r"^```(?:json)?\s*\n?|\n?```\s*$")

_CORRECTION = (
    "Your previous reply was not valid JSON matching the required schema. "
    "Reply again with only the JSON object, no surrounding text."
)


def _load_asset(name: str) -> str:
    return (
        files("guideline_rag.evaluation")
        .joinpath(f"assets/{name}")
        .read_text(encoding="utf-8")
        .rstrip("\n")
    )


JUDGE_FAITHFULNESS_STATEMENTS = _load_asset("judge_faithfulness_statements.txt")
JUDGE_FAITHFULNESS_VERDICTS = _load_asset("judge_faithfulness_verdicts.txt")
JUDGE_RELEVANCY = _load_asset("judge_relevancy.txt")
JUDGE_CONTEXT_PRECISION = _load_asset("judge_context_precision.txt")
JUDGE_CONTEXT_RECALL = _load_asset("judge_context_recall.txt")

DEFAULT_JUDGE_MODEL = "gpt-4.1-mini"


@dataclass(frozen=True)
class QaPair:
    question: str
    reference_answer: str
    source_ref: str

    def __post_init__(self) -> None:
        if not (self.question and self.reference_answer and self.source_ref):
            raise ValueError("QaPair fields must all be non-empty")


@dataclass
class MetricResult:
    value: float | None  # None: undefined for this item, skipped in aggregation
    detail: list[dict] = field(default_factory=list)


def _parse_json_object(text: str) -> dict:
    cleaned = _CODE_FENCE_RE.sub("", text.strip()).strip()
    data = json.loads(cleaned)
    if not isinstance(data, dict):
        raise ValueError(f"expected a JSON object, got {type(data).__name__}")
    return data


def judge_json(
    judge: ChatClient,
    cfg: ModelConfig,
    system_text: str,
    user_text: str,
    extract: Callable[[dict], T],
) -> T:
    """One judge call with a single corrective retry on malformed output."""
    reply = judge.complete(system_text, user_text, cfg).text
    try:
        return extract(_parse_json_object(reply))
    except (ValueError, KeyError, TypeError):
        pass
    reply = judge.complete(
        system_text, f"{user_text}\n\n{_CORRECTION}", cfg
    ).text
    try:
        return extract(_parse_json_object(reply))
    except (ValueError, KeyError, TypeError) as exc:
        raise JudgeUnparseable(
            f"judge output unusable after retry: {exc}; got {reply[:200]!r}"
        ) from exc


def _as_verdict(value) -> int:
    verdict = int(value)
    if verdict not in (0, 1):
        raise ValueError(f"verdict must be 0 or 1, got {value!r}")
    return verdict


# --- faithfulness -------------------------------------------------------------


def faithfulness_detail(
    question: str,
    answer: str,
    contexts: list[str],
    judge: ChatClient,
    cfg: ModelConfig | None = None,
) -> MetricResult:
    """supported statements / total statements, via two judge calls."""
    cfg = cfg or get_model_config(DEFAULT_JUDGE_MODEL)
    statements = judge_json(
        judge,
        cfg,
        JUDGE_FAITHFULNESS_STATEMENTS,
        f"question: {json.dumps(question)}\nanswer: {json.dumps(answer)}",
        extract=lambda d: [str(s) for s in d["statements"]],
    )
    if not statements:
        return MetricResult(None, [{"skipped": "answer yielded no statements"}])
    context_text = "\n\n".join(contexts)
    verdicts = judge_json(
        judge,
        cfg,
        JUDGE_FAITHFULNESS_VERDICTS,
        f"context: {json.dumps(context_text)}\n"
        f"statements: {json.dumps(statements)}",
        extract=lambda d: [
            {
                "statement": str(item["statement"]),
                "reason": str(item.get("reason", "")),
                "verdict": _as_verdict(item["verdict"]),
            }
            for item in d["statements"]
        ],
    )
    # A statement the judge dropped counts as unsupported.
    supported = sum(v["verdict"] for v in verdicts)
    return MetricResult(supported / len(statements), verdicts)


def faithfulness(
    question: str,
    answer: str,
    contexts: list[str],
    judge: ChatClient,
    cfg: ModelConfig | None = None,
) -> float | None:
    return faithfulness_detail(question, answer, contexts, judge, cfg).value


# --- response relevancy -------------------------------------------------------


def response_relevancy_detail(
    question: str,
    answer: str,
    judge: ChatClient,
    embedder: EmbeddingClient,
    n_questions: int = 3,
    cfg: ModelConfig | None = None,
) -> MetricResult:
    """Mean cosine between the question and judge-generated reverse questions."""
    cfg = cfg or get_model_config(DEFAULT_JUDGE_MODEL)
    generated = []
    for _ in range(n_questions):
        generated.append(
            judge_json(
                judge,
                cfg,
                JUDGE_RELEVANCY,
                f"response: {json.dumps(answer)}",
                extract=lambda d: {
                    "question": str(d["question"]),
                    "noncommittal": _as_verdict(d["noncommittal"]),
                },
            )
        )
    if not generated:
        return MetricResult(None, [{"skipped": "no reverse questions generated"}])
    if any(g["noncommittal"] for g in generated):
        return MetricResult(0.0, generated)
    vectors = embed([question] + [g["question"] for g in generated], embedder)
    similarities = [dot(vectors[0], v) for v in vectors[1:]]
    for g, s in zip(generated, similarities):
        g["similarity"] = s
    return MetricResult(sum(similarities) / len(similarities), generated)


def response_relevancy(
    question: str,
    answer: str,
    judge: ChatClient,
    embedder: EmbeddingClient,
    n_questions: int = 3,
    cfg: ModelConfig | None = None,
) -> float | None:
    return response_relevancy_detail(
        question, answer, judge, embedder, n_questions, cfg
    ).value


# --- context precision --------------------------------------------------------


def context_precision_detail(
    question: str,
    answer: str,
    contexts: list[str],
    reference: str,
    judge: ChatClient,
    cfg: ModelConfig | None = None,
) -> MetricResult:
    """Rank-weighted mean precision at each useful-context position.

    Usefulness is judged against the reference answer when one is given,
    otherwise against the generated answer.
    """
    if not contexts:
        raise EmptyInput("context precision needs at least one context chunk")
    cfg = cfg or get_model_config(DEFAULT_JUDGE_MODEL)
    target = reference or answer
    records = []
    for context in contexts:
        records.append(
            judge_json(
                judge,
                cfg,
                JUDGE_CONTEXT_PRECISION,
                f"question: {json.dumps(question)}\n"
                f"context: {json.dumps(context)}\n"
                f"answer: {json.dumps(target)}",
                extract=lambda d: {
                    "reason": str(d.get("reason", "")),
                    "verdict": _as_verdict(d["verdict"]),
                },
            )
        )
    hits = 0
    weighted = 0.0
    for position, record in enumerate(records, start=1):
        if record["verdict"]:
            hits += 1
            weighted += hits / position
    return MetricResult(weighted / hits if hits else 0.0, records)


def context_precision(
    question: str,
    answer: str,
    contexts: list[str],
    reference: str,
    judge: ChatClient,
    cfg: ModelConfig | None = None,
) -> float:
    result = context_precision_detail(question, answer, contexts, reference, judge, cfg)
    assert result.value is not None
    return result.value


# --- context recall -----------------------------------------------------------


def context_recall_detail(
    question: str,
    contexts: list[str],
    reference_answer: str,
    judge: ChatClient,
    cfg: ModelConfig | None = None,
) -> MetricResult:
    """attributed reference sentences / total reference sentences."""
    if not reference_answer:
        raise EmptyInput("context recall needs a reference answer")
    cfg = cfg or get_model_config(DEFAULT_JUDGE_MODEL)
    context_text = "\n\n".join(contexts)
    classifications = judge_json(
        judge,
        cfg,
        JUDGE_CONTEXT_RECALL,
        f"question: {json.dumps(question)}\n"
        f"context: {json.dumps(context_text)}\n"
        f"answer: {json.dumps(reference_answer)}",
        extract=lambda d: [
            {
                "statement": str(item["statement"]),
                "reason": str(item.get("reason", "")),
                "attributed": _as_verdict(item["attributed"]),
            }
            for item in d["classifications"]
        ],
    )
    if not classifications:
        return MetricResult(None, [{"skipped": "no sentences classified"}])
    attributed = sum(c["attributed"] for c in classifications)
    return MetricResult(attributed / len(classifications), classifications)


def context_recall(
    question: str,
    contexts: list[str],
    reference_answer: str,
    judge: ChatClient,
    cfg: ModelConfig | None = None,
) -> float | None:
    return context_recall_detail(question, contexts, reference_answer, judge, cfg).value


# --- report assembly ----------------------------------------------------------


@dataclass
class GenerationReport:
    context_precision: float | None
    context_recall: float | None
    response_relevancy: float | None
    faithfulness: float | None
    n_items: int
    per_item: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "context_precision": self.context_precision,
            "context_recall": self.context_recall,
            "response_relevancy": self.response_relevancy,
            "faithfulness": self.faithfulness,
            "n_items": self.n_items,
            "per_item": self.per_item,
        }


def _mean_defined(values: list[float | None]) -> float | None:
    defined = [v for v in values if v is not None]
    return sum(defined) / len(defined) if defined else None


def evaluate_generation(
    qa_pairs: list[QaPair],
    run: Callable[[str], tuple[str, list[str]]],
    judge: ChatClient,
    embedder: EmbeddingClient,
    cfg: ModelConfig | None = None,
    n_questions: int = 3,
) -> GenerationReport:
    """Judge every QA pair against the system's answer and contexts.

    `run` maps a question to (answer text, retrieved context texts).
    """
    if not qa_pairs:
        raise EmptyEvalSet("no QA pairs to evaluate")
    per_item = []
    scores: dict[str, list[float | None]] = {
        "context_precision": [],
        "context_recall": [],
        "response_relevancy": [],
        "faithfulness": [],
    }
    for pair in qa_pairs:
        answer, contexts = run(pair.question)
        precision = context_precision_detail(
            pair.question, answer, contexts, pair.reference_answer, judge, cfg
        )
        recall = context_recall_detail(
            pair.question, contexts, pair.reference_answer, judge, cfg
        )
        relevancy = response_relevancy_detail(
            pair.question, answer, judge, embedder, n_questions, cfg
        )
        faith = faithfulness_detail(pair.question, answer, contexts, judge, cfg)
        scores["context_precision"].append(precision.value)
        scores["context_recall"].append(recall.value)
        scores["response_relevancy"].append(relevancy.value)
        scores["faithfulness"].append(faith.value)
        per_item.append(
            {
                "question": pair.question,
                "source_ref": pair.source_ref,
                "answer": answer,
                "context_precision": {"value": precision.value, "detail": precision.detail},
                "context_recall": {"value": recall.value, "detail": recall.detail},
                "response_relevancy": {"value": relevancy.value, "detail": relevancy.detail},
                "faithfulness": {"value": faith.value, "detail": faith.detail},
            }
        )
    return GenerationReport(
        context_precision=_mean_defined(scores["context_precision"]),
        context_recall=_mean_defined(scores["context_recall"]),
        response_relevancy=_mean_defined(scores["response_relevancy"]),
        faithfulness=_mean_defined(scores["faithfulness"]),
        n_items=len(qa_pairs),
        per_item=per_item,
    )
