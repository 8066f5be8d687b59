"""Generation model registry: context windows and reasoning capability."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class ModelConfig:
    model_id: str
    temperature: float = 0.0
    max_context_tokens: int = 200_000
    reasoning: bool = False
    provider: str = ""


MODEL_REGISTRY: dict[str, ModelConfig] = {
    cfg.model_id: cfg
    for cfg in [
        ModelConfig("gpt-4.1", max_context_tokens=1_000_000, provider="OpenAI"),
        ModelConfig("gpt-4.1-mini", max_context_tokens=1_000_000, provider="OpenAI"),
        ModelConfig("gpt-4.1-nano", max_context_tokens=1_000_000, provider="OpenAI"),
        ModelConfig(
            "o4-mini", max_context_tokens=200_000, reasoning=True, provider="OpenAI"
        ),
        ModelConfig(
            "claude-sonnet-4",
            max_context_tokens=200_000,
            reasoning=True,
            provider="Anthropic",
        ),
        ModelConfig(
            "meditron3-8b", max_context_tokens=8_192, provider="Meditron Project"
        ),
    ]
}


def get_model_config(model_id: str) -> ModelConfig:
    try:
        return MODEL_REGISTRY[model_id]
    except KeyError:
        raise KeyError(
            f"unknown generation model {model_id!r}; "
            f"known: {sorted(MODEL_REGISTRY)}"
        ) from None
