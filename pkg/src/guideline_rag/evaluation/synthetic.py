"""Synthetic query generation for retrieval evaluation.

One realistic clinician-style question per chunk, produced by a small
generation model. Chunks under boilerplate sections are refused; they
carry no clinically retrievable content.
"""

from __future__ import annotations

from importlib.resources import files

from ..chunking import Chunk
from ..corpus import SectionExclusionList, is_excluded_section
from ..errors import ExcludedSection
from ..generation.chat import ChatClient
from ..generation.models import ModelConfig, get_model_config

QUERY_GEN_SYSTEM = (
    files("guideline_rag.evaluation")
    .joinpath("assets/query_gen_system.txt")
    .read_text(encoding="utf-8")
    .rstrip("\n")
)

_USER_TEMPLATE = (
    "Document Excerpt: {doc_content}\n\n"
    "Generate a realistic search query for this NICE guideline content."
)


def gen_synthetic_query(
    chunk: Chunk,
    client: ChatClient,
    cfg: ModelConfig | None = None,
    exclusions: SectionExclusionList | None = None,
) -> str:
    cfg = cfg or get_model_config("gpt-4.1-nano")
    for title in chunk.heading_path:
        if is_excluded_section(title, exclusions):
            raise ExcludedSection(
                f"chunk {chunk.chunk_id} sits under excluded section {title!r}"
            )
    user_text = _USER_TEMPLATE.format(doc_content=chunk.text)
    return client.complete(QUERY_GEN_SYSTEM, user_text, cfg).text.strip()


def build_synthetic_pairs(
    chunks: list[Chunk],
    client: ChatClient,
    cfg: ModelConfig | None = None,
    exclusions: SectionExclusionList | None = None,
) -> list[tuple[str, str]]:
    """(query, correct_chunk_id) for every non-excluded chunk, in order."""
    pairs = []
    for chunk in chunks:
        try:
            query = gen_synthetic_query(chunk, client, cfg, exclusions)
        except ExcludedSection:
            continue
        pairs.append((query, chunk.chunk_id))
    return pairs
