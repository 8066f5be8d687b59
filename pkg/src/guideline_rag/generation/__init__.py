"""Prompt assembly and grounded answer generation."""

from .answer import Answer, generate_answer
from .chat import (
    ChatClient,
    ChatResult,
    DeterministicChatClient,
    EchoChatClient,
    HttpChatClient,
    UnavailableChatClient,
)
from .models import MODEL_REGISTRY, ModelConfig, get_model_config
from .prompts import (
    CONTEXT_HEADER,
    SENTINEL,
    SYSTEM_BASELINE,
    SYSTEM_RAG,
    PromptBundle,
    build_baseline_prompt,
    build_rag_prompt,
    render_context_block,
)

__all__ = [
    "Answer",
    "CONTEXT_HEADER",
    "ChatClient",
    "ChatResult",
    "DeterministicChatClient",
    "EchoChatClient",
    "HttpChatClient",
    "MODEL_REGISTRY",
    "ModelConfig",
    "PromptBundle",
    "SENTINEL",
    "SYSTEM_BASELINE",
    "SYSTEM_RAG",
    "UnavailableChatClient",
    "build_baseline_prompt",
    "build_rag_prompt",
    "generate_answer",
    "get_model_config",
    "render_context_block",
]
