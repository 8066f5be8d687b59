"""Grid search over BM25 parameters against a labelled validation set."""

from __future__ import annotations

from itertools import product

from ..chunking import Chunk
from ..errors import EmptyQuery, EmptyValidationSet
from .bm25 import Bm25Params, build_index, search_sparse

DEFAULT_GRID: dict[str, list[float]] = {
    "k1": [0.9, 1.2, 1.5, 1.7, 2.0],
    "b": [0.6, 0.75, 0.83, 0.9],
    "epsilon": [0.05],
}


def _mrr(index, validation: list[tuple[str, str]]) -> float:
    total = 0.0
    for query, correct_id in validation:
        try:
            ranked = search_sparse(query, index, top_k=index.n_docs)
        except EmptyQuery:
            continue
        rank = ranked.rank_of(correct_id)
        if rank is not None:
            total += 1.0 / rank
    return total / len(validation)


def tune_params(
    chunks: list[Chunk],
    validation: list[tuple[str, str]],
    grid: dict[str, list[float]] | None = None,
) -> Bm25Params:
    """Return the grid point with the best validation MRR.

    Term statistics do not depend on the parameters, so the index is built
    once and rescored per grid point. Ties go to the point closest to the
    defaults, then to the lexicographically smallest point.
    """
    if not validation:
        raise EmptyValidationSet("parameter tuning needs at least one labelled query")
    grid = grid or DEFAULT_GRID
    defaults = Bm25Params()
    index = build_index(chunks, defaults)

    candidates = []
    for k1, b, epsilon in product(
        grid.get("k1", [defaults.k1]),
        grid.get("b", [defaults.b]),
        grid.get("epsilon", [defaults.epsilon]),
    ):
        params = Bm25Params(k1=k1, b=b, epsilon=epsilon)
        index.params = params
        score = _mrr(index, validation)
        distance = (
            abs(k1 - defaults.k1) + abs(b - defaults.b) + abs(epsilon - defaults.epsilon)
        )
        candidates.append((-score, distance, k1, b, epsilon))

    _, _, k1, b, epsilon = min(candidates)
    return Bm25Params(k1=k1, b=b, epsilon=epsilon)
