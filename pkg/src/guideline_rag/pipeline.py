"""End-to-end engine: configuration, artifact builds, and the ask flow.

The engine wires the retrieval stages together in a fixed order (sparse and
dense search, fusion, rerank, prompt assembly, generation) and records
per-stage wall-clock timings. Any stage failure is re-raised as a
PipelineStageError carrying the stage label, so callers can report where a
query died without string-matching tracebacks.
"""

from __future__ import annotations

import json
import logging
import os
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .chunking import Chunk, ChunkerConfig, chunk_corpus, read_chunks_jsonl, write_chunks_jsonl
from .corpus import load_corpus_dir
from .dense import (
    HashEmbeddingClient,
    HttpEmbeddingClient,
    VectorStore,
    build_vector_store,
    load_vector_store,
    save_vector_store,
    search_dense,
)
from .dense.clients import EmbeddingClient
from .errors import GuidelineRagError, IndexMissing, PipelineStageError
from .evaluation.cost import CostBreakdown, estimate_cost
from .fusion import FusionConfig, wrrf_fuse
from .generation import (
    Answer,
    ChatClient,
    DeterministicChatClient,
    EchoChatClient,
    HttpChatClient,
    ModelConfig,
    PromptBundle,
    UnavailableChatClient,
    build_rag_prompt,
    generate_answer,
)
from .generation.models import MODEL_REGISTRY, get_model_config
from .ranking import RankedEntry, RankedList
from .rerank import (
    HashRerankClient,
    HttpRerankClient,
    IdentityRerankClient,
    RerankClient,
    RerankConfig,
    ReversalRerankClient,
    UnavailableRerankClient,
    rerank,
)
from .sparse import (
    Bm25Params,
    SparseIndex,
    build_index,
    load_sparse_index,
    save_sparse_index,
    search_sparse,
)

log = logging.getLogger(__name__)

EMBEDDING_KEY_ENV = "GUIDELINE_RAG_EMBEDDING_API_KEY"
CHAT_KEY_ENV = "GUIDELINE_RAG_CHAT_API_KEY"
RERANK_KEY_ENV = "GUIDELINE_RAG_RERANK_API_KEY"

STRATEGIES = ("sparse", "dense", "hybrid", "reranked")


@dataclass
class EmbeddingSettings:
    provider: str = "hash"  # "hash" | "http"
    model_id: str = "hash-64"
    dimension: int = 64
    base_url: str = ""


@dataclass
class RerankSettings:
    provider: str = "identity"  # "identity" | "reversal" | "hash" | "http" | "unavailable"
    model_id: str = "rerank-2"
    top_n: int = 15
    base_url: str = ""


@dataclass
class GenerationSettings:
    provider: str = "stub"  # "stub" | "echo" | "http" | "unavailable"
    model_id: str = "gpt-4.1"
    context_size: int = 10
    base_url: str = ""
    echo_response: str = "echo"


@dataclass
class PipelinePaths:
    corpus_dir: Path = Path("corpus")
    artifacts_dir: Path = Path("artifacts")

    def __post_init__(self) -> None:
        self.corpus_dir = Path(self.corpus_dir)
        self.artifacts_dir = Path(self.artifacts_dir)

    @property
    def chunks_path(self) -> Path:
        return self.artifacts_dir / "chunks.jsonl"

    @property
    def sparse_index_path(self) -> Path:
        return self.artifacts_dir / "bm25.idx"

    @property
    def dense_store_path(self) -> Path:
        return self.artifacts_dir / "dense.vec"

    @property
    def runs_dir(self) -> Path:
        return self.artifacts_dir / "runs"


@dataclass
class PipelineConfig:
    chunker: ChunkerConfig = field(default_factory=ChunkerConfig)
    bm25: Bm25Params = field(default_factory=Bm25Params)
    embedding: EmbeddingSettings = field(default_factory=EmbeddingSettings)
    fusion: FusionConfig = field(default_factory=FusionConfig)
    rerank: RerankSettings = field(default_factory=RerankSettings)
    generation: GenerationSettings = field(default_factory=GenerationSettings)
    paths: PipelinePaths = field(default_factory=PipelinePaths)

    def __post_init__(self) -> None:
        if self.generation.context_size < 1:
            raise ValueError("context_size must be at least 1")
        if self.generation.context_size not in (5, 10):
            log.warning(
                "context_size %d is outside the evaluated settings {5, 10}",
                self.generation.context_size,
            )


def _section(data: dict, name: str, known: set[str]) -> dict:
    section = data.get(name, {})
    unknown = set(section) - known
    if unknown:
        raise ValueError(f"unknown keys in [{name}]: {sorted(unknown)}")
    return section


def load_config(path: str | Path | None = None) -> PipelineConfig:
    """Build a PipelineConfig from a TOML file; defaults when path is None.

    Secrets never live in the file: API keys are read from environment
    variables at client construction time.
    """
    if path is None:
        return PipelineConfig()
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    unknown = set(data) - {
        "chunker", "bm25", "embedding", "fusion", "rerank", "generation", "paths",
    }
    if unknown:
        raise ValueError(f"unknown config sections: {sorted(unknown)}")
    chunker = ChunkerConfig(
        **_section(data, "chunker", {"max_tokens", "min_tokens", "overlap_tokens", "tokenizer_id"})
    )
    bm25 = Bm25Params(**_section(data, "bm25", {"k1", "b", "epsilon"}))
    embedding = EmbeddingSettings(
        **_section(data, "embedding", {"provider", "model_id", "dimension", "base_url"})
    )
    fusion_raw = _section(data, "fusion", {"k", "depth", "weights"})
    fusion_kwargs = {k: fusion_raw[k] for k in ("k", "depth") if k in fusion_raw}
    if "weights" in fusion_raw:
        fusion_kwargs["weights"] = dict(fusion_raw["weights"])
    fusion = FusionConfig(**fusion_kwargs)
    rerank_settings = RerankSettings(
        **_section(data, "rerank", {"provider", "model_id", "top_n", "base_url"})
    )
    generation = GenerationSettings(
        **_section(
            data,
            "generation",
            {"provider", "model_id", "context_size", "base_url", "echo_response"},
        )
    )
    paths = PipelinePaths(**_section(data, "paths", {"corpus_dir", "artifacts_dir"}))
    return PipelineConfig(
        chunker=chunker,
        bm25=bm25,
        embedding=embedding,
        fusion=fusion,
        rerank=rerank_settings,
        generation=generation,
        paths=paths,
    )


def make_embedding_client(settings: EmbeddingSettings) -> EmbeddingClient:
    if settings.provider == "hash":
        return HashEmbeddingClient(dimension=settings.dimension, model_id=settings.model_id)
    if settings.provider == "http":
        return HttpEmbeddingClient(
            model_id=settings.model_id,
            base_url=settings.base_url,
            api_key=os.environ.get(EMBEDDING_KEY_ENV),
            dimension=settings.dimension or None,
        )
    raise ValueError(f"unknown embedding provider: {settings.provider!r}")


def make_rerank_client(settings: RerankSettings) -> RerankClient:
    if settings.provider == "identity":
        return IdentityRerankClient()
    if settings.provider == "reversal":
        return ReversalRerankClient()
    if settings.provider == "hash":
        return HashRerankClient()
    if settings.provider == "unavailable":
        return UnavailableRerankClient()
    if settings.provider == "http":
        return HttpRerankClient(
            model_id=settings.model_id,
            base_url=settings.base_url,
            api_key=os.environ.get(RERANK_KEY_ENV),
        )
    raise ValueError(f"unknown rerank provider: {settings.provider!r}")


def make_chat_client(settings: GenerationSettings) -> ChatClient:
    if settings.provider == "stub":
        return DeterministicChatClient()
    if settings.provider == "echo":
        return EchoChatClient(settings.echo_response)
    if settings.provider == "unavailable":
        return UnavailableChatClient()
    if settings.provider == "http":
        return HttpChatClient(
            base_url=settings.base_url,
            api_key=os.environ.get(CHAT_KEY_ENV),
        )
    raise ValueError(f"unknown chat provider: {settings.provider!r}")


def resolve_model_config(model_id: str) -> ModelConfig:
    if model_id in MODEL_REGISTRY:
        return get_model_config(model_id)
    # Stub model ids get a permissive default window.
    return ModelConfig(model_id=model_id, max_context_tokens=1_000_000)


@dataclass
class AskResult:
    answer: Answer
    retrieved: RankedList
    timings_ms: dict[str, float]
    cost_estimate: CostBreakdown

    def to_dict(self, include_timings: bool = True) -> dict:
        answer = {
            "text": self.answer.text,
            "model_id": self.answer.model_id,
            "used_chunk_ids": list(self.answer.used_chunk_ids),
            "is_null_response": self.answer.is_null_response,
            "token_usage": {
                "input": self.answer.token_usage[0],
                "output": self.answer.token_usage[1],
            },
        }
        if include_timings:
            answer["latency_ms"] = self.answer.latency_ms
        out = {
            "answer": answer,
            "retrieved": [
                {"chunk_id": e.chunk_id, "score": e.score, "rank": e.rank}
                for e in self.retrieved.entries
            ],
            "retrieval_warning": self.retrieved.warning,
            "cost_estimate": self.cost_estimate.to_dict(),
        }
        if include_timings:
            out["timings_ms"] = dict(self.timings_ms)
        return out

    def to_json(self, include_timings: bool = True) -> str:
        return json.dumps(
            self.to_dict(include_timings=include_timings),
            ensure_ascii=False,
            sort_keys=True,
        )


def build_all(corpus_dir: str | Path, cfg: PipelineConfig) -> dict[str, Path]:
    """Ingest a corpus directory and write all index artifacts.

    Idempotent: every artifact is written atomically, so a re-run replaces
    files in place and a crash leaves the previous versions intact.
    """
    docs = load_corpus_dir(corpus_dir)
    chunks = chunk_corpus(docs, cfg.chunker)
    paths = cfg.paths
    paths.artifacts_dir.mkdir(parents=True, exist_ok=True)
    write_chunks_jsonl(chunks, paths.chunks_path)
    index = build_index(chunks, replace(cfg.bm25))
    save_sparse_index(index, paths.sparse_index_path)
    store = build_vector_store(chunks, make_embedding_client(cfg.embedding))
    save_vector_store(store, paths.dense_store_path)
    return {
        "chunks": paths.chunks_path,
        "sparse": paths.sparse_index_path,
        "dense": paths.dense_store_path,
    }


def _truncate(ranked: RankedList, top_k: int) -> RankedList:
    return RankedList(
        entries=list(ranked.entries[:top_k]),
        source=ranked.source,
        warning=ranked.warning,
    )


class Engine:
    """Loaded indexes plus clients; executes searches and the ask flow."""

    def __init__(
        self,
        cfg: PipelineConfig,
        chunks: list[Chunk],
        sparse_index: SparseIndex,
        store: VectorStore,
        embedding_client: EmbeddingClient | None = None,
        rerank_client: RerankClient | None = None,
        chat_client: ChatClient | None = None,
    ):
        self.cfg = cfg
        self.chunks = chunks
        self.chunks_by_id = {c.chunk_id: c for c in chunks}
        self.sparse_index = sparse_index
        self.store = store
        self.embedding_client = embedding_client or make_embedding_client(cfg.embedding)
        self.rerank_client = rerank_client or make_rerank_client(cfg.rerank)
        self.chat_client = chat_client or make_chat_client(cfg.generation)

    @classmethod
    def load(cls, cfg: PipelineConfig, **clients) -> "Engine":
        paths = cfg.paths
        missing = [
            str(p)
            for p in (paths.chunks_path, paths.sparse_index_path, paths.dense_store_path)
            if not p.exists()
        ]
        if missing:
            raise IndexMissing(f"missing artifacts: {', '.join(missing)}")
        return cls(
            cfg,
            chunks=read_chunks_jsonl(paths.chunks_path),
            sparse_index=load_sparse_index(paths.sparse_index_path),
            store=load_vector_store(paths.dense_store_path),
            **clients,
        )

    @classmethod
    def from_chunks(cls, cfg: PipelineConfig, chunks: list[Chunk], **clients) -> "Engine":
        """In-memory engine over prebuilt chunks; nothing touches disk."""
        embedding_client = clients.pop("embedding_client", None) or make_embedding_client(
            cfg.embedding
        )
        return cls(
            cfg,
            chunks=chunks,
            sparse_index=build_index(chunks, replace(cfg.bm25)),
            store=build_vector_store(chunks, embedding_client),
            embedding_client=embedding_client,
            **clients,
        )

    def get_chunk(self, chunk_id: str) -> Chunk | None:
        return self.chunks_by_id.get(chunk_id)

    def health_info(self) -> dict:
        return {
            "corpus_docs": len({c.doc_id for c in self.chunks}),
            "chunk_count": len(self.chunks),
            "index_versions": {"sparse": "bm25-index/1", "dense": "dense-store/1"},
        }

    def _rerank_texts(self, ranked: RankedList) -> dict[str, str]:
        return {
            e.chunk_id: self.chunks_by_id[e.chunk_id].text
            for e in ranked.entries
            if e.chunk_id in self.chunks_by_id
        }

    def search(self, query: str, strategy: str = "hybrid", top_k: int | None = None) -> RankedList:
        """One retrieval pass; strategy is one of STRATEGIES."""
        if strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")
        depth = self.cfg.fusion.depth
        k = top_k if top_k is not None else depth
        if strategy == "sparse":
            return search_sparse(query, self.sparse_index, k)
        if strategy == "dense":
            return search_dense(query, self.store, self.embedding_client, k)
        sparse_list = search_sparse(query, self.sparse_index, depth)
        dense_list = search_dense(query, self.store, self.embedding_client, depth)
        fused = wrrf_fuse([dense_list, sparse_list], self.cfg.fusion)
        if strategy == "hybrid":
            return _truncate(fused, k)
        reranked = rerank(
            query,
            fused,
            self.rerank_client,
            RerankConfig(top_n=self.cfg.rerank.top_n, client_id=self.cfg.rerank.model_id),
            texts=self._rerank_texts(fused),
        )
        return _truncate(reranked, k)

    def ask(self, query: str, context_size: int | None = None) -> AskResult:
        """Full grounded-answer flow with per-stage timings."""
        n_contexts = context_size or self.cfg.generation.context_size
        timings: dict[str, float] = {}

        def stage(name: str, fn):
            t0 = time.perf_counter()
            try:
                out = fn()
            except GuidelineRagError as exc:
                raise PipelineStageError(name, exc) from exc
            timings[name] = (time.perf_counter() - t0) * 1000.0
            return out

        depth = self.cfg.fusion.depth
        sparse_list = stage("sparse", lambda: search_sparse(query, self.sparse_index, depth))
        dense_list = stage(
            "dense", lambda: search_dense(query, self.store, self.embedding_client, depth)
        )
        fused = stage("fusion", lambda: wrrf_fuse([dense_list, sparse_list], self.cfg.fusion))
        reranked = stage(
            "rerank",
            lambda: rerank(
                query,
                fused,
                self.rerank_client,
                RerankConfig(
                    top_n=self.cfg.rerank.top_n, client_id=self.cfg.rerank.model_id
                ),
                texts=self._rerank_texts(fused),
            ),
        )
        retrieved = _truncate(reranked, n_contexts)
        contexts = [self.chunks_by_id[cid] for cid in retrieved.chunk_ids()]
        prompt: PromptBundle = stage("prompt", lambda: build_rag_prompt(query, contexts))
        model_cfg = resolve_model_config(self.cfg.generation.model_id)
        answer = stage(
            "generate", lambda: generate_answer(prompt, model_cfg, self.chat_client)
        )
        return AskResult(
            answer=answer,
            retrieved=retrieved,
            timings_ms=timings,
            cost_estimate=estimate_cost(len(contexts)),
        )
