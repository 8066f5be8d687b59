"""Ranked result lists shared by the sparse, dense, fusion and rerank stages."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class RankedEntry:
    chunk_id: str
    score: float
    rank: int  # 1-based


@dataclass
class RankedList:
    """An ordered retrieval result from one strategy.

    Invariants: scores are non-increasing, ranks are consecutive from 1,
    and chunk ids are unique.
    """

    entries: list[RankedEntry] = field(default_factory=list)
    source: str = ""
    warning: str | None = None

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def chunk_ids(self) -> list[str]:
        return [e.chunk_id for e in self.entries]

    def rank_of(self, chunk_id: str) -> int | None:
        """1-based rank of ``chunk_id``, or None if absent."""
        for e in self.entries:
            if e.chunk_id == chunk_id:
                return e.rank
        return None

    def validate(self) -> None:
        """Assert the structural invariants; raises ValueError on violation."""
        seen: set[str] = set()
        prev_score: float | None = None
        for i, e in enumerate(self.entries):
            if e.rank != i + 1:
                raise ValueError(f"rank {e.rank} at position {i}; expected {i + 1}")
            if prev_score is not None and e.score > prev_score:
                raise ValueError(f"score increases at rank {e.rank}")
            if e.chunk_id in seen:
                raise ValueError(f"duplicate chunk id {e.chunk_id!r}")
            seen.add(e.chunk_id)
            prev_score = e.score


def ranked_list_from_scores(
    scored: list[tuple[str, float]], source: str, top_k: int | None = None
) -> RankedList:
    """Sort (chunk_id, score) pairs into a RankedList.

    Descending score, ties broken by ascending chunk id; truncated to
    ``top_k`` entries when given.
    """
    ordered = sorted(scored, key=lambda t: (-t[1], t[0]))
    if top_k is not None:
        ordered = ordered[:top_k]
    entries = [
        RankedEntry(chunk_id=cid, score=score, rank=i + 1)
        for i, (cid, score) in enumerate(ordered)
    ]
    return RankedList(entries=entries, source=source)
