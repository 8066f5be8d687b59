"""Embedding clients: a remote HTTP implementation and a hermetic stub.

Both satisfy the same protocol; everything downstream of `embed` is
indifferent to which one produced the vectors.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol, runtime_checkable

import httpx
import numpy as np

from ..errors import ClientUnavailable, EmbeddingFailed

CACHE_DIR_ENV = "GUIDELINE_RAG_CACHE_DIR"


@dataclass(frozen=True)
class EmbeddingModelSpec:
    model_id: str
    provider: str
    dimension: int
    context_length: int  # tokens


EMBEDDING_MODELS: dict[str, EmbeddingModelSpec] = {
    spec.model_id: spec
    for spec in [
        EmbeddingModelSpec("voyage-3-large", "Voyage AI", 2048, 32_000),
        EmbeddingModelSpec("voyage-3.5", "Voyage AI", 2048, 32_000),
        EmbeddingModelSpec("text-embedding-3-large", "OpenAI", 3072, 8_191),
        EmbeddingModelSpec("qwen3-embedding-0.6b", "Alibaba", 1024, 32_768),
    ]
}


@runtime_checkable
class EmbeddingClient(Protocol):
    model_id: str
    dimension: int
    context_length: int

    def embed_batch(self, texts: list[str]) -> list[list[float]]: ...


class HashEmbeddingClient:
    """Deterministic pseudo-random unit vector per text.

    Carries no semantics, but identical texts embed identically, which is
    all the offline tests need.
    """

    def __init__(self, dimension: int = 64, model_id: str | None = None):
        self.dimension = dimension
        self.model_id = model_id or f"hash-{dimension}"
        self.context_length = 1_000_000

    def embed_batch(self, texts: list[str]) -> list[list[float]]:
        out = []
        for text in texts:
            digest = hashlib.sha256(
                f"{self.model_id}\x00{text}".encode("utf-8")
            ).digest()
            rng = np.random.default_rng(int.from_bytes(digest[:16], "big"))
            v = rng.standard_normal(self.dimension)
            out.append((v / np.linalg.norm(v)).tolist())
        return out


class HttpEmbeddingClient:
    """OpenAI/Voyage-style `POST /embeddings` client.

    Responses are cached on disk keyed by (model_id, text hash); transient
    failures retry with exponential backoff before giving up.
    """

    def __init__(
        self,
        model_id: str,
        base_url: str,
        api_key: str | None = None,
        dimension: int | None = None,
        context_length: int | None = None,
        batch_size: int = 128,
        timeout: float = 30.0,
        max_retries: int = 4,
        backoff_base: float = 0.5,
        cache_dir: str | Path | None = None,
    ):
        if not base_url:
            raise ClientUnavailable(f"no endpoint configured for {model_id}")
        spec = EMBEDDING_MODELS.get(model_id)
        self.model_id = model_id
        self.dimension = dimension or (spec.dimension if spec else 0)
        self.context_length = context_length or (
            spec.context_length if spec else 8_192
        )
        self.base_url = base_url.rstrip("/")
        self.api_key = api_key
        self.batch_size = batch_size
        self.timeout = timeout
        self.max_retries = max_retries
        self.backoff_base = backoff_base
        cache_dir = cache_dir or os.environ.get(CACHE_DIR_ENV)
        self.cache_dir = Path(cache_dir) if cache_dir else None

    def _cache_path(self, text: str) -> Path | None:
        if self.cache_dir is None:
            return None
        key = hashlib.sha256(f"{self.model_id}\x00{text}".encode("utf-8")).hexdigest()
        return self.cache_dir / f"{key}.json"

    def _post(self, texts: list[str]) -> list[list[float]]:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        last_error: Exception | None = None
        for attempt in range(self.max_retries + 1):
            if attempt:
                time.sleep(self.backoff_base * 2 ** (attempt - 1))
            try:
                response = httpx.post(
                    f"{self.base_url}/embeddings",
                    json={"model": self.model_id, "input": texts},
                    headers=headers,
                    timeout=self.timeout,
                )
                if response.status_code in (429,) or response.status_code >= 500:
                    last_error = EmbeddingFailed(
                        f"{self.model_id}: HTTP {response.status_code}"
                    )
                    continue
                response.raise_for_status()
                data = response.json()["data"]
                return [item["embedding"] for item in data]
            except httpx.HTTPError as exc:
                last_error = exc
        raise EmbeddingFailed(
            f"{self.model_id}: retries exhausted ({last_error})"
        )

    def embed_batch(self, texts: list[str]) -> list[list[float]]:
        results: list[list[float] | None] = [None] * len(texts)
        pending: list[int] = []
        for i, text in enumerate(texts):
            path = self._cache_path(text)
            if path is not None and path.exists():
                results[i] = json.loads(path.read_text(encoding="utf-8"))
            else:
                pending.append(i)
        for start in range(0, len(pending), self.batch_size):
            batch = pending[start : start + self.batch_size]
            vectors = self._post([texts[i] for i in batch])
            for i, vector in zip(batch, vectors):
                results[i] = vector
                path = self._cache_path(texts[i])
                if path is not None:
                    path.parent.mkdir(parents=True, exist_ok=True)
                    path.write_text(json.dumps(vector), encoding="utf-8")
        return [r for r in results if r is not None]
