"""HTTP JSON API over the engine.

Errors use one shape everywhere: {"error": {"stage", "code", "message"}}.
4xx means the request was at fault, 5xx means an upstream client or the
deployment was. Indexes load read-only at startup and are shared across
requests; evaluation runs execute in the background and are polled by id.
"""

from __future__ import annotations

from functools import partial
from pathlib import Path

import anyio
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from .. import __version__
from ..errors import (
    ClientUnavailable,
    ContextOverflow,
    EmbeddingFailed,
    EmptyEvalSet,
    EmptyQuery,
    GuidelineRagError,
    IndexMissing,
    JudgeUnparseable,
    PipelineStageError,
)
from ..evaluation.retrieval import QueryChunkPair, read_pairs_jsonl
from ..pipeline import STRATEGIES, Engine, PipelineConfig
from .runs import RunRegistry
from .schemas import (
    AskRequest,
    AskResponse,
    ChunkResponse,
    ErrorResponse,
    EvalRetrievalRequest,
    EvalRunResponse,
    HealthResponse,
)

_STATUS_BY_CAUSE = {
    EmptyQuery: 400,
    ValueError: 400,
    ContextOverflow: 400,
    EmptyEvalSet: 400,
    ClientUnavailable: 502,
    EmbeddingFailed: 502,
    JudgeUnparseable: 502,
    IndexMissing: 503,
}

_ERROR_RESPONSES = {
    400: {"model": ErrorResponse},
    404: {"model": ErrorResponse},
    502: {"model": ErrorResponse},
    503: {"model": ErrorResponse},
}


def _status_for(cause: Exception) -> int:
    for kind, status in _STATUS_BY_CAUSE.items():
        if isinstance(cause, kind):
            return status
    return 500


def _error_response(
    status: int, stage: str, cause: Exception, code: str | None = None
) -> JSONResponse:
    return JSONResponse(
        status_code=status,
        content={
            "error": {
                "stage": stage,
                "code": code or type(cause).__name__,
                "message": str(cause),
            }
        },
    )


def create_app(
    engine: Engine | None = None,
    cfg: PipelineConfig | None = None,
    workers: int = 8,
) -> FastAPI:
    """Assemble the service; a missing index is not fatal until it is needed.

    Indexes are immutable once loaded, so requests share them read-only;
    ``workers`` bounds how many ask() calls may run concurrently.
    """
    if engine is None and cfg is not None:
        try:
            engine = Engine.load(cfg)
        except IndexMissing:
            engine = None
    runs_dir: Path | None = cfg.paths.runs_dir if cfg else None

    app = FastAPI(title="guideline-rag", version=__version__)
    app.state.engine = engine
    app.state.runs = RunRegistry(runs_dir)
    app.state.ask_limiter = anyio.CapacityLimiter(workers)

    @app.exception_handler(PipelineStageError)
    async def stage_error(request: Request, exc: PipelineStageError) -> JSONResponse:
        return _error_response(_status_for(exc.cause), exc.stage, exc.cause)

    @app.exception_handler(GuidelineRagError)
    async def engine_error(request: Request, exc: GuidelineRagError) -> JSONResponse:
        return _error_response(_status_for(exc), "service", exc)

    @app.exception_handler(RequestValidationError)
    async def invalid_request(
        request: Request, exc: RequestValidationError
    ) -> JSONResponse:
        return _error_response(422, "request", exc, code="ValidationError")

    def _require_engine() -> Engine:
        if app.state.engine is None:
            raise IndexMissing("no index artifacts loaded; run a build first")
        return app.state.engine

    @app.get("/api/health", response_model=HealthResponse)
    async def health() -> HealthResponse:
        if app.state.engine is None:
            return HealthResponse(
                status="empty", corpus_docs=0, chunk_count=0, index_versions={}
            )
        return HealthResponse(status="ok", **app.state.engine.health_info())

    @app.post("/api/ask", response_model=AskResponse, responses=_ERROR_RESPONSES)
    async def ask(request: AskRequest) -> AskResponse:
        engine = _require_engine()
        result = await anyio.to_thread.run_sync(
            partial(engine.ask, request.query, request.context_size),
            limiter=app.state.ask_limiter,
        )
        payload = result.to_dict()
        for entry in payload["retrieved"]:
            chunk = engine.get_chunk(entry["chunk_id"])
            entry["heading_path"] = list(chunk.heading_path) if chunk else []
        return AskResponse(**payload)

    @app.get(
        "/api/chunks/{chunk_id}",
        response_model=ChunkResponse,
        responses=_ERROR_RESPONSES,
    )
    async def get_chunk(chunk_id: str) -> ChunkResponse | JSONResponse:
        chunk = _require_engine().get_chunk(chunk_id)
        if chunk is None:
            return _error_response(
                404, "service", KeyError(f"unknown chunk {chunk_id!r}"), code="NotFound"
            )
        return ChunkResponse(
            chunk_id=chunk.chunk_id,
            doc_id=chunk.doc_id,
            heading_path=list(chunk.heading_path),
            text=chunk.text,
            token_count=chunk.token_count,
            indivisible=chunk.indivisible,
        )

    @app.post(
        "/api/eval/retrieval",
        response_model=EvalRunResponse,
        status_code=202,
        responses=_ERROR_RESPONSES,
    )
    async def start_eval(request: EvalRetrievalRequest) -> EvalRunResponse:
        engine = _require_engine()
        if request.strategy not in STRATEGIES:
            raise PipelineStageError(
                "eval", ValueError(f"unknown strategy {request.strategy!r}")
            )
        if request.pairs is not None:
            pairs = [
                QueryChunkPair(query=p.query, correct_chunk_id=p.correct_chunk_id)
                for p in request.pairs
            ]
        else:
            assert request.pairs_path is not None
            if not Path(request.pairs_path).exists():
                raise PipelineStageError(
                    "eval", ValueError(f"pairs file not found: {request.pairs_path}")
                )
            pairs = read_pairs_jsonl(request.pairs_path)
        if not pairs:
            raise PipelineStageError("eval", EmptyEvalSet("no pairs supplied"))
        run = app.state.runs.start_retrieval(engine, pairs, request.strategy, request.top_k)
        return EvalRunResponse(**run.to_dict())

    @app.get(
        "/api/eval/runs/{run_id}",
        response_model=EvalRunResponse,
        responses=_ERROR_RESPONSES,
    )
    async def get_run(run_id: str) -> EvalRunResponse | JSONResponse:
        run = app.state.runs.get(run_id)
        if run is None:
            return _error_response(
                404, "service", KeyError(f"unknown run {run_id!r}"), code="NotFound"
            )
        return EvalRunResponse(**run.to_dict())

    return app
