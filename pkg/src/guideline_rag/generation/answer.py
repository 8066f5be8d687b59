"""Answer generation: context-window pre-check, client call, sentinel detection."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from ..errors import ContextOverflow
from ..tokenization import count_tokens
from .chat import ChatClient
from .models import ModelConfig
from .prompts import SENTINEL, PromptBundle


@dataclass
class Answer:
    text: str
    model_id: str
    used_chunk_ids: list[str]
    is_null_response: bool
    latency_ms: int
    token_usage: tuple[int, int]  # (input, output)


def generate_answer(prompt: PromptBundle, cfg: ModelConfig, client: ChatClient) -> Answer:
    """Run one completion and wrap the result.

    Prompt size is checked against the model's context window with the
    reference tokenizer, a deliberate proxy for the provider tokenizer.
    """
    prompt_tokens = count_tokens(prompt.system_text) + count_tokens(prompt.user_text)
    if prompt_tokens > cfg.max_context_tokens:
        raise ContextOverflow(
            f"prompt is {prompt_tokens} tokens, {cfg.model_id} accepts "
            f"{cfg.max_context_tokens}"
        )
    started = time.perf_counter()
    result = client.complete(prompt.system_text, prompt.user_text, cfg)
    latency_ms = int((time.perf_counter() - started) * 1000)
    return Answer(
        text=result.text,
        model_id=cfg.model_id,
        used_chunk_ids=list(prompt.context_chunk_ids),
        is_null_response=result.text == SENTINEL,
        latency_ms=latency_ms,
        token_usage=(result.input_tokens, result.output_tokens),
    )
