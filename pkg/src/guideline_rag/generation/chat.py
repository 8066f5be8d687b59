"""Chat-completion clients: provider HTTP APIs plus hermetic stubs."""

from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass
from typing import Protocol, runtime_checkable

import httpx

from ..errors import ClientUnavailable
from ..tokenization import count_tokens
from .models import ModelConfig


@dataclass(frozen=True)
class ChatResult:
    text: str
    input_tokens: int
    output_tokens: int


@runtime_checkable
class ChatClient(Protocol):
    def complete(self, system_text: str, user_text: str, cfg: ModelConfig) -> ChatResult: ...


class EchoChatClient:
    """Returns a fixed response; usage counted with the reference tokenizer."""

    def __init__(self, response: str):
        self.response = response

    def complete(self, system_text: str, user_text: str, cfg: ModelConfig) -> ChatResult:
        return ChatResult(
            text=self.response,
            input_tokens=count_tokens(system_text) + count_tokens(user_text),
            output_tokens=count_tokens(self.response),
        )


class DeterministicChatClient:
    """Answer derived from a hash of the full prompt.

    Any change to system text, query, or context order changes the reply,
    which is what the reproducibility tests lean on.
    """

    def complete(self, system_text: str, user_text: str, cfg: ModelConfig) -> ChatResult:
        digest = hashlib.sha256(
            f"{cfg.model_id}\x00{system_text}\x00{user_text}".encode("utf-8")
        ).hexdigest()
        text = f"Stub answer ({digest[:16]}) based on the provided context."
        return ChatResult(
            text=text,
            input_tokens=count_tokens(system_text) + count_tokens(user_text),
            output_tokens=count_tokens(text),
        )


class UnavailableChatClient:
    """Always raises; exercises degraded-generation paths."""

    def complete(self, system_text: str, user_text: str, cfg: ModelConfig) -> ChatResult:
        raise ClientUnavailable("no generation endpoint configured")


class HttpChatClient:
    """OpenAI-style `POST /chat/completions` client.

    Temperature is sent only for non-reasoning models; reasoning-class
    models reject the parameter, so it is omitted rather than zeroed.
    """

    def __init__(
        self,
        base_url: str,
        api_key: str | None = None,
        timeout: float = 120.0,
        max_retries: int = 4,
        backoff_base: float = 0.5,
    ):
        if not base_url:
            raise ClientUnavailable("no chat endpoint configured")
        self.base_url = base_url.rstrip("/")
        self.api_key = api_key
        self.timeout = timeout
        self.max_retries = max_retries
        self.backoff_base = backoff_base

    def complete(self, system_text: str, user_text: str, cfg: ModelConfig) -> ChatResult:
        payload: dict = {
            "model": cfg.model_id,
            "messages": [
                {"role": "system", "content": system_text},
                {"role": "user", "content": user_text},
            ],
        }
        if not cfg.reasoning:
            payload["temperature"] = cfg.temperature
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        last_error: Exception | None = None
        for attempt in range(self.max_retries + 1):
            if attempt:
                time.sleep(self.backoff_base * 2 ** (attempt - 1))
            try:
                response = httpx.post(
                    f"{self.base_url}/chat/completions",
                    json=payload,
                    headers=headers,
                    timeout=self.timeout,
                )
                if response.status_code == 429 or response.status_code >= 500:
                    last_error = ClientUnavailable(
                        f"{cfg.model_id}: HTTP {response.status_code}"
                    )
                    continue
                response.raise_for_status()
                data = response.json()
                usage = data.get("usage", {})
                return ChatResult(
                    text=data["choices"][0]["message"]["content"],
                    input_tokens=int(usage.get("prompt_tokens", 0)),
                    output_tokens=int(usage.get("completion_tokens", 0)),
                )
            except httpx.HTTPError as exc:
                last_error = exc
        raise ClientUnavailable(f"{cfg.model_id}: retries exhausted ({last_error})")
