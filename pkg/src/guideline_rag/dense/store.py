"""Unit-normalized vector storage and exact dot-product search."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..chunking import Chunk
from ..errors import (
    DimensionMismatch,
    EmptyInput,
    ModelMismatch,
    TextTooLong,
    ZeroVector,
)
from ..io_utils import atomic_write_bytes
from ..ranking import RankedList, ranked_list_from_scores
from ..tokenization import count_tokens
from .clients import EmbeddingClient

_FORMAT = "dense-store"
_VERSION = 1
_NORM_TOLERANCE = 1e-6


@dataclass(frozen=True)
class EmbeddingVector:
    values: tuple[float, ...]
    model_id: str
    dimension: int

    def __post_init__(self) -> None:
        if len(self.values) != self.dimension:
            raise DimensionMismatch(
                f"vector has {len(self.values)} values, declared {self.dimension}"
            )


def normalize(v: list[float] | np.ndarray) -> list[float]:
    arr = np.asarray(v, dtype=np.float64)
    norm = float(np.linalg.norm(arr))
    if norm == 0.0:
        raise ZeroVector("cannot normalize the zero vector")
    return (arr / norm).tolist()


def dot(a: EmbeddingVector, b: EmbeddingVector) -> float:
    if a.dimension != b.dimension:
        raise DimensionMismatch(f"{a.dimension} vs {b.dimension}")
    return float(np.dot(np.asarray(a.values), np.asarray(b.values)))


def embed(texts: list[str], client: EmbeddingClient) -> list[EmbeddingVector]:
    """Embed texts through a client, normalizing every returned vector."""
    if not texts:
        raise EmptyInput("no texts to embed")
    for i, text in enumerate(texts):
        if count_tokens(text) > client.context_length:
            raise TextTooLong(i)
    return [
        EmbeddingVector(
            values=tuple(normalize(raw)),
            model_id=client.model_id,
            dimension=client.dimension,
        )
        for raw in client.embed_batch(texts)
    ]


class VectorStore:
    """Chunk vectors for one embedding model, aligned with chunk ordinals."""

    def __init__(self, matrix: np.ndarray, chunk_ids: list[str], model_id: str):
        if matrix.ndim != 2 or matrix.shape[0] != len(chunk_ids):
            raise DimensionMismatch(
                f"matrix shape {matrix.shape} does not match {len(chunk_ids)} chunk ids"
            )
        if len(set(chunk_ids)) != len(chunk_ids):
            raise ValueError("chunk_ids must be unique")
        self.matrix = np.ascontiguousarray(matrix, dtype=np.float32)
        self.chunk_ids = list(chunk_ids)
        self.model_id = model_id

    def __len__(self) -> int:
        return len(self.chunk_ids)

    @property
    def dimension(self) -> int:
        return int(self.matrix.shape[1])

    @property
    def vectors(self) -> list[EmbeddingVector]:
        return [
            EmbeddingVector(
                values=tuple(float(x) for x in row),
                model_id=self.model_id,
                dimension=self.dimension,
            )
            for row in self.matrix
        ]

    @classmethod
    def from_vectors(
        cls, vectors: list[EmbeddingVector], chunk_ids: list[str]
    ) -> "VectorStore":
        if not vectors:
            raise EmptyInput("no vectors to store")
        model_ids = {v.model_id for v in vectors}
        dims = {v.dimension for v in vectors}
        if len(model_ids) != 1 or len(dims) != 1:
            raise ModelMismatch(
                f"mixed vectors: models {sorted(model_ids)}, dimensions {sorted(dims)}"
            )
        matrix = np.array([v.values for v in vectors], dtype=np.float32)
        return cls(matrix, chunk_ids, model_ids.pop())


def build_vector_store(chunks: list[Chunk], client: EmbeddingClient) -> VectorStore:
    if not chunks:
        raise EmptyInput("no chunks to embed")
    vectors = embed([c.text for c in chunks], client)
    return VectorStore.from_vectors(vectors, [c.chunk_id for c in chunks])


def search_dense(
    query: str,
    store: VectorStore,
    client: EmbeddingClient,
    top_k: int,
    source: str = "dense",
) -> RankedList:
    """Rank stored chunks by dot product against the embedded query."""
    if store.model_id != client.model_id:
        raise ModelMismatch(
            f"store built with {store.model_id}, client is {client.model_id}"
        )
    query_vector = np.asarray(embed([query], client)[0].values, dtype=np.float32)
    scores = store.matrix @ query_vector
    scored = [
        (chunk_id, float(score))
        for chunk_id, score in zip(store.chunk_ids, scores)
    ]
    return ranked_list_from_scores(scored, source=source, top_k=top_k)


# --- persistence -------------------------------------------------------------


def save_vector_store(store: VectorStore, path: str | Path) -> None:
    header = {
        "format": _FORMAT,
        "version": _VERSION,
        "model_id": store.model_id,
        "dimension": store.dimension,
        "count": len(store),
        "chunk_ids": store.chunk_ids,
    }
    blob = json.dumps(header, ensure_ascii=False).encode("utf-8") + b"\n"
    blob += store.matrix.astype("<f4").tobytes()
    atomic_write_bytes(path, blob)


def load_vector_store(path: str | Path) -> VectorStore:
    raw = Path(path).read_bytes()
    newline = raw.index(b"\n")
    header = json.loads(raw[:newline].decode("utf-8"))
    if header.get("format") != _FORMAT:
        raise ValueError(f"not a dense store file: {path}")
    if header.get("version") != _VERSION:
        raise ValueError(f"unsupported dense store version: {header.get('version')}")
    count, dimension = header["count"], header["dimension"]
    matrix = np.frombuffer(
        raw[newline + 1 :], dtype="<f4", count=count * dimension
    ).reshape(count, dimension)
    return VectorStore(matrix.copy(), header["chunk_ids"], header["model_id"])
