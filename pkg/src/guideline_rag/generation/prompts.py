"""Prompt assembly for grounded and baseline generation.

System prompts are versioned text assets; the loaded constants are the
file contents minus the POSIX trailing newline. Context chunks are
serialized with a provenance header so answers can cite their sources.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib.resources import files

from ..chunking import Chunk

SENTINEL = "No relevant NICE guidelines were found."

CONTEXT_HEADER = "Context from NICE clinical guidelines:"


def _load_asset(name: str) -> str:
    return (
        files("guideline_rag.generation")
        .joinpath(f"assets/{name}")
        .read_text(encoding="utf-8")
        .rstrip("\n")
    )


SYSTEM_BASELINE = _load_asset("system_baseline.txt")
SYSTEM_RAG = _load_asset("system_rag.txt")


@dataclass(frozen=True)
class PromptBundle:
    system_text: str
    user_text: str
    mode: str  # "rag" | "baseline"
    context_chunk_ids: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.mode not in ("rag", "baseline"):
            raise ValueError(f"unknown prompt mode: {self.mode!r}")


def render_context_block(chunk: Chunk) -> str:
    header = f"[{chunk.doc_id} — {' > '.join(chunk.heading_path)}]"
    return f"{header}\n{chunk.text}"


def build_rag_prompt(query: str, contexts: list[Chunk]) -> PromptBundle:
    """Assemble the grounded prompt: query, blank line, header, contexts."""
    if not query:
        raise ValueError("query must be non-empty")
    context_text = "\n\n".join(render_context_block(c) for c in contexts)
    return PromptBundle(
        system_text=SYSTEM_RAG,
        user_text=f"{query}\n\n{CONTEXT_HEADER}\n{context_text}",
        mode="rag",
        context_chunk_ids=tuple(c.chunk_id for c in contexts),
    )


def build_baseline_prompt(query: str) -> PromptBundle:
    if not query:
        raise ValueError("query must be non-empty")
    return PromptBundle(system_text=SYSTEM_BASELINE, user_text=query, mode="baseline")
