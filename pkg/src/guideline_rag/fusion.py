"""Weighted Reciprocal Rank Fusion of ranked lists from multiple retrievers.

Each strategy contributes w/(k + rank) for every chunk it ranked; chunks a
strategy did not return contribute nothing for that strategy. Only ranks
matter, so score scales across heterogeneous retrievers are irrelevant.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import EmptyInput, MissingWeight
from .ranking import RankedList, ranked_list_from_scores

# Fusion weights: the dense retriever is trusted five to one over BM25;
# two cooperating dense retrievers are weighted two to one.
DENSE_SPARSE_WEIGHTS = {"dense": 5.0, "sparse": 1.0}
DENSE_DENSE_WEIGHT_RATIO = (2.0, 1.0)


@dataclass(frozen=True)
class FusionConfig:
    weights: dict[str, float] = field(
        default_factory=lambda: dict(DENSE_SPARSE_WEIGHTS)
    )
    k: float = 40.0
    depth: int = 100  # ranks consumed per strategy before fusing

    def __post_init__(self) -> None:
        if self.k <= 0:
            raise ValueError(f"k must be positive, got {self.k}")
        if self.depth < 1:
            raise ValueError(f"depth must be at least 1, got {self.depth}")
        for source, weight in self.weights.items():
            if weight <= 0:
                raise ValueError(f"weight for {source!r} must be positive, got {weight}")


def dense_pair_config(
    primary_source: str, secondary_source: str, k: float = 40.0
) -> FusionConfig:
    w_primary, w_secondary = DENSE_DENSE_WEIGHT_RATIO
    return FusionConfig(
        weights={primary_source: w_primary, secondary_source: w_secondary}, k=k
    )


def wrrf_fuse(lists: list[RankedList], cfg: FusionConfig | None = None) -> RankedList:
    """Fuse ranked lists into one, scored by weighted reciprocal rank."""
    cfg = cfg or FusionConfig()
    if not lists:
        raise EmptyInput("nothing to fuse")
    for ranked in lists:
        if ranked.source not in cfg.weights:
            raise MissingWeight(f"no fusion weight for source {ranked.source!r}")
    scores: dict[str, float] = {}
    for ranked in lists:
        weight = cfg.weights[ranked.source]
        for entry in ranked.entries:
            if entry.rank > cfg.depth:
                break
            scores[entry.chunk_id] = scores.get(entry.chunk_id, 0.0) + (
                weight / (cfg.k + entry.rank)
            )
    return ranked_list_from_scores(list(scores.items()), source="wrrf")
