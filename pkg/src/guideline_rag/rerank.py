"""Cross-encoder reranking of the head of a fused candidate list.

Only the top candidates are re-scored; the tail keeps its original relative
order below the reranked head. When the reranking service is unreachable the
input ordering is returned unchanged, flagged with a warning, so retrieval
degrades rather than fails.
"""

from __future__ import annotations

import hashlib
import time
from collections.abc import Mapping
from dataclasses import dataclass
from typing import Protocol, runtime_checkable

import httpx

from .errors import ClientUnavailable, EmptyCandidates
from .ranking import RankedEntry, RankedList


@dataclass(frozen=True)
class RerankModelSpec:
    model_id: str
    provider: str
    context_length: int


RERANK_MODELS: dict[str, RerankModelSpec] = {
    spec.model_id: spec
    for spec in [
        RerankModelSpec("rerank-2", "Voyage AI", 16_000),
        RerankModelSpec("rerank-2-lite", "Voyage AI", 8_000),
    ]
}


@dataclass(frozen=True)
class RerankConfig:
    top_n: int = 15
    client_id: str = "rerank-2"

    def __post_init__(self) -> None:
        if self.top_n < 1:
            raise ValueError(f"top_n must be at least 1, got {self.top_n}")


@runtime_checkable
class RerankClient(Protocol):
    client_id: str

    def score(self, query: str, documents: list[str]) -> list[float]: ...


class IdentityRerankClient:
    """Scores each document by its position: output order equals input."""

    client_id = "identity"

    def score(self, query: str, documents: list[str]) -> list[float]:
        return [-float(i) for i in range(len(documents))]


class ReversalRerankClient:
    """Scores each document by reversed position: output order is flipped."""

    client_id = "reversal"

    def score(self, query: str, documents: list[str]) -> list[float]:
        return [float(i) for i in range(len(documents))]


class HashRerankClient:
    """Deterministic pseudo-random pair scores for hermetic end-to-end tests."""

    client_id = "hash"

    def score(self, query: str, documents: list[str]) -> list[float]:
        out = []
        for doc in documents:
            digest = hashlib.sha256(f"{query}\x00{doc}".encode("utf-8")).digest()
            out.append(int.from_bytes(digest[:8], "big") / 2**64)
        return out


class UnavailableRerankClient:
    """Always raises; exercises the fallback path."""

    client_id = "unavailable"

    def score(self, query: str, documents: list[str]) -> list[float]:
        raise ClientUnavailable("reranker configured without an endpoint")


class HttpRerankClient:
    """Voyage-style `POST /rerank` client with retry and backoff."""

    def __init__(
        self,
        model_id: str,
        base_url: str,
        api_key: str | None = None,
        timeout: float = 30.0,
        max_retries: int = 4,
        backoff_base: float = 0.5,
    ):
        if not base_url:
            raise ClientUnavailable(f"no endpoint configured for {model_id}")
        self.client_id = model_id
        self.base_url = base_url.rstrip("/")
        self.api_key = api_key
        self.timeout = timeout
        self.max_retries = max_retries
        self.backoff_base = backoff_base

    def score(self, query: str, documents: list[str]) -> list[float]:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        last_error: Exception | None = None
        for attempt in range(self.max_retries + 1):
            if attempt:
                time.sleep(self.backoff_base * 2 ** (attempt - 1))
            try:
                response = httpx.post(
                    f"{self.base_url}/rerank",
                    json={
                        "model": self.client_id,
                        "query": query,
                        "documents": documents,
                    },
                    headers=headers,
                    timeout=self.timeout,
                )
                if response.status_code == 429 or response.status_code >= 500:
                    last_error = ClientUnavailable(
                        f"{self.client_id}: HTTP {response.status_code}"
                    )
                    continue
                response.raise_for_status()
                data = response.json()["data"]
                scores = [0.0] * len(documents)
                for item in data:
                    scores[item["index"]] = float(item["relevance_score"])
                return scores
            except httpx.HTTPError as exc:
                last_error = exc
        raise ClientUnavailable(f"{self.client_id}: retries exhausted ({last_error})")


def rerank(
    query: str,
    candidates: RankedList,
    client: RerankClient,
    cfg: RerankConfig | None = None,
    texts: Mapping[str, str] | None = None,
) -> RankedList:
    """Re-score the top cfg.top_n candidates and re-sort them.

    `texts` maps chunk ids to chunk text for the cross-encoder; when omitted
    the ids themselves are scored, which only suits stub clients.
    """
    cfg = cfg or RerankConfig()
    if not candidates.entries:
        raise EmptyCandidates("nothing to rerank")
    head = candidates.entries[: cfg.top_n]
    tail = candidates.entries[cfg.top_n :]
    documents = [
        texts[e.chunk_id] if texts is not None else e.chunk_id for e in head
    ]
    try:
        scores = client.score(query, documents)
    except ClientUnavailable as exc:
        return RankedList(
            entries=list(candidates.entries),
            source="rerank",
            warning=f"reranker unavailable, kept input order: {exc}",
        )

    rescored = sorted(
        zip(head, scores), key=lambda pair: (-pair[1], pair[0].chunk_id)
    )
    entries = [
        RankedEntry(chunk_id=e.chunk_id, score=score, rank=i + 1)
        for i, (e, score) in enumerate(rescored)
    ]
    if tail:
        head_min = entries[-1].score
        tail_max = tail[0].score
        shift = max(0.0, tail_max - head_min) + 1e-9 if tail_max >= head_min else 0.0
        for e in tail:
            entries.append(
                RankedEntry(
                    chunk_id=e.chunk_id,
                    score=e.score - shift,
                    rank=len(entries) + 1,
                )
            )
    result = RankedList(entries=entries, source="rerank")
    result.validate()
    return result
