"""Rank-based retrieval metrics over labelled query/chunk pairs.

A query whose correct chunk never appears in the ranking contributes a
reciprocal rank of 0 and is excluded from the rank statistics; it is
surfaced through not_found_count instead of a fabricated worst rank.
"""

from __future__ import annotations

import json
import random
import statistics
from collections.abc import Callable
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import EmptyEvalSet
from ..ranking import RankedList

RECALL_CUTOFFS = (1, 5, 10, 15)


@dataclass(frozen=True)
class QueryChunkPair:
    query: str
    correct_chunk_id: str
    split: str = "test"  # "validation" | "test"

    def __post_init__(self) -> None:
        if self.split not in ("validation", "test"):
            raise ValueError(f"unknown split: {self.split!r}")


@dataclass
class RetrievalReport:
    mrr: float
    recall_at: dict[int, float]
    median_rank: float | None
    mean_rank: float | None
    max_rank: int | None
    n_queries: int
    not_found_count: int
    per_query: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "mrr": self.mrr,
            "recall_at": {str(k): v for k, v in self.recall_at.items()},
            "median_rank": self.median_rank,
            "mean_rank": self.mean_rank,
            "max_rank": self.max_rank,
            "n_queries": self.n_queries,
            "not_found_count": self.not_found_count,
            "per_query": self.per_query,
        }


def reciprocal_rank(ranked: RankedList, correct: str) -> float:
    rank = ranked.rank_of(correct)
    return 1.0 / rank if rank is not None else 0.0


def compute_retrieval_report(
    pairs: list[QueryChunkPair],
    ranker: Callable[[str], RankedList],
    cutoffs: tuple[int, ...] = RECALL_CUTOFFS,
    keep_per_query: bool = True,
) -> RetrievalReport:
    if not pairs:
        raise EmptyEvalSet("no query/chunk pairs to evaluate")
    rr_total = 0.0
    hits = {k: 0 for k in cutoffs}
    found_ranks: list[int] = []
    per_query: list[dict] = []
    for pair in pairs:
        ranked = ranker(pair.query)
        rank = ranked.rank_of(pair.correct_chunk_id)
        rr_total += 1.0 / rank if rank is not None else 0.0
        if rank is not None:
            found_ranks.append(rank)
            for k in cutoffs:
                if rank <= k:
                    hits[k] += 1
        if keep_per_query:
            per_query.append(
                {
                    "query": pair.query,
                    "correct_chunk_id": pair.correct_chunk_id,
                    "rank": rank,
                }
            )
    n = len(pairs)
    return RetrievalReport(
        mrr=rr_total / n,
        recall_at={k: hits[k] / n for k in cutoffs},
        median_rank=float(statistics.median(found_ranks)) if found_ranks else None,
        mean_rank=sum(found_ranks) / len(found_ranks) if found_ranks else None,
        max_rank=max(found_ranks) if found_ranks else None,
        n_queries=n,
        not_found_count=n - len(found_ranks),
        per_query=per_query,
    )


def split_pairs(
    pairs: list[QueryChunkPair],
    validation_fraction: float = 0.15,
    seed: int = 13,
) -> list[QueryChunkPair]:
    """Deterministically relabel pairs into validation/test splits."""
    order = list(range(len(pairs)))
    random.Random(seed).shuffle(order)
    n_validation = round(len(pairs) * validation_fraction)
    validation_indexes = set(order[:n_validation])
    return [
        QueryChunkPair(
            query=p.query,
            correct_chunk_id=p.correct_chunk_id,
            split="validation" if i in validation_indexes else "test",
        )
        for i, p in enumerate(pairs)
    ]


def write_pairs_jsonl(pairs: list[QueryChunkPair], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for p in pairs:
            record = {
                "query": p.query,
                "correct_chunk_id": p.correct_chunk_id,
                "split": p.split,
            }
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def read_pairs_jsonl(path: str | Path) -> list[QueryChunkPair]:
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                record = json.loads(line)
                pairs.append(
                    QueryChunkPair(
                        query=record["query"],
                        correct_chunk_id=record["correct_chunk_id"],
                        split=record.get("split", "test"),
                    )
                )
    return pairs
