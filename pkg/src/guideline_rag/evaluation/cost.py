"""Per-query cost estimate for the full retrieval-and-generation pipeline.

Token counts are planning-level approximations: a fixed query size, a fixed
average chunk size, and a fixed prompt overhead for the system prompt and
formatting. Prices are USD per million tokens.
"""

from __future__ import annotations

from dataclasses import dataclass, field


DEFAULT_PRICES_PER_MILLION = {
    "embedding": 0.18,
    "rerank": 0.05,
    "llm_input": 1.10,
    "llm_output": 4.40,
}


@dataclass(frozen=True)
class CostModel:
    prices_per_million: dict[str, float] = field(
        default_factory=lambda: dict(DEFAULT_PRICES_PER_MILLION)
    )
    query_tokens: int = 100
    chunk_tokens: int = 500
    prompt_overhead_tokens: int = 650
    answer_tokens: int = 500
    rerank_candidates: int = 15

    def __post_init__(self) -> None:
        missing = set(DEFAULT_PRICES_PER_MILLION) - set(self.prices_per_million)
        if missing:
            raise ValueError(f"prices missing for: {sorted(missing)}")
        for name, price in self.prices_per_million.items():
            if price < 0:
                raise ValueError(f"negative price for {name}: {price}")


@dataclass(frozen=True)
class CostComponent:
    name: str
    tokens: int
    price_per_million: float

    @property
    def cost(self) -> float:
        return self.tokens * self.price_per_million / 1_000_000


@dataclass(frozen=True)
class CostBreakdown:
    components: tuple[CostComponent, ...]
    n_context_chunks: int

    @property
    def total_tokens(self) -> int:
        return sum(c.tokens for c in self.components)

    @property
    def total_cost(self) -> float:
        return sum(c.cost for c in self.components)

    def to_dict(self) -> dict:
        return {
            "n_context_chunks": self.n_context_chunks,
            "components": [
                {
                    "name": c.name,
                    "tokens": c.tokens,
                    "price_per_million": c.price_per_million,
                    "cost": c.cost,
                }
                for c in self.components
            ],
            "total_tokens": self.total_tokens,
            "total_cost": self.total_cost,
        }


def estimate_cost(
    n_context_chunks: int, prices: CostModel | None = None
) -> CostBreakdown:
    """Estimate tokens and USD for one query answered with n context chunks."""
    if n_context_chunks < 0:
        raise ValueError("n_context_chunks must be non-negative")
    model = prices or CostModel()
    per_million = model.prices_per_million
    embedding_tokens = model.query_tokens
    rerank_tokens = model.rerank_candidates * (model.query_tokens + model.chunk_tokens)
    llm_input_tokens = (
        model.prompt_overhead_tokens
        + model.query_tokens
        + n_context_chunks * model.chunk_tokens
    )
    components = (
        CostComponent("embedding", embedding_tokens, per_million["embedding"]),
        CostComponent("rerank", rerank_tokens, per_million["rerank"]),
        CostComponent("llm_input", llm_input_tokens, per_million["llm_input"]),
        CostComponent("llm_output", model.answer_tokens, per_million["llm_output"]),
    )
    return CostBreakdown(components=components, n_context_chunks=n_context_chunks)
