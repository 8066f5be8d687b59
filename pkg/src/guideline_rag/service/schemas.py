"""Request/response models for the HTTP API.

Run as a module to regenerate the published schema file:

    python3 -m guideline_rag.service.schemas docs/api-schemas.json
"""

from __future__ import annotations

from pydantic import BaseModel, Field, model_validator


class AskRequest(BaseModel):
    query: str = Field(min_length=1)
    context_size: int | None = Field(default=None, ge=1, le=50)


class TokenUsage(BaseModel):
    input: int
    output: int


class AnswerBody(BaseModel):
    text: str
    model_id: str
    used_chunk_ids: list[str]
    is_null_response: bool
    latency_ms: int
    token_usage: TokenUsage


class RetrievedEntry(BaseModel):
    chunk_id: str
    score: float
    rank: int
    heading_path: list[str]


class CostComponentBody(BaseModel):
    name: str
    tokens: int
    price_per_million: float
    cost: float


class CostEstimateBody(BaseModel):
    n_context_chunks: int
    components: list[CostComponentBody]
    total_tokens: int
    total_cost: float


class AskResponse(BaseModel):
    answer: AnswerBody
    retrieved: list[RetrievedEntry]
    retrieval_warning: str | None = None
    timings_ms: dict[str, float]
    cost_estimate: CostEstimateBody


class ChunkResponse(BaseModel):
    chunk_id: str
    doc_id: str
    heading_path: list[str]
    text: str
    token_count: int
    indivisible: bool


class HealthResponse(BaseModel):
    status: str
    corpus_docs: int
    chunk_count: int
    index_versions: dict[str, str]


class EvalPairBody(BaseModel):
    query: str = Field(min_length=1)
    correct_chunk_id: str = Field(min_length=1)


class EvalRetrievalRequest(BaseModel):
    pairs: list[EvalPairBody] | None = None
    pairs_path: str | None = None
    strategy: str = "hybrid"
    top_k: int = Field(default=100, ge=1)

    @model_validator(mode="after")
    def _exactly_one_source(self) -> "EvalRetrievalRequest":
        if (self.pairs is None) == (self.pairs_path is None):
            raise ValueError("provide exactly one of pairs or pairs_path")
        return self


class EvalRunResponse(BaseModel):
    run_id: str
    status: str  # pending | running | done | failed
    report: dict | None = None
    error: str | None = None


class ErrorDetail(BaseModel):
    stage: str
    code: str
    message: str


class ErrorResponse(BaseModel):
    error: ErrorDetail


API_SCHEMAS = {
    "AskRequest": AskRequest,
    "AskResponse": AskResponse,
    "ChunkResponse": ChunkResponse,
    "HealthResponse": HealthResponse,
    "EvalRetrievalRequest": EvalRetrievalRequest,
    "EvalRunResponse": EvalRunResponse,
    "ErrorResponse": ErrorResponse,
}


def dump_schemas() -> dict:
    return {name: model.model_json_schema() for name, model in API_SCHEMAS.items()}


if __name__ == "__main__":
    import json
    import sys
    from pathlib import Path

    out = Path(sys.argv[1] if len(sys.argv) > 1 else "docs/api-schemas.json")
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(dump_schemas(), indent=2, sort_keys=True) + "\n")
    print(f"wrote {out}")
