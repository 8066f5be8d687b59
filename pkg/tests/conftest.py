"""Shared fixtures: synthetic corpora, engines, and scripted clients."""

from __future__ import annotations

import random
from datetime import datetime, timezone

import pytest

from guideline_rag.chunking import Chunk, chunk_corpus
from guideline_rag.corpus import GuidelineDoc
from guideline_rag.generation.chat import ChatResult
from guideline_rag.pipeline import Engine, PipelineConfig

_WORDS = (
    "patient clinician treatment dose review offer consider risk benefit therapy "
    "symptom assessment referral monitor adjust titrate guideline evidence dosage "
    "blood pressure glucose inhaler antibiotic renal hepatic cardiac screening "
    "baseline followup adverse reaction contraindication pregnancy paediatric adult"
).split()


def make_doc(doc_id: str, body: str, title: str = "Test guideline") -> GuidelineDoc:
    return GuidelineDoc(
        id=doc_id,
        guidance_type="NG",
        title=title,
        body_markdown=body,
        source_format="markdown",
        word_count=len(body.split()),
        retrieved_at=datetime(2025, 1, 1, tzinfo=timezone.utc),
    )


def synthetic_body(rng: random.Random, n_sections: int = 4, paragraphs: int = 8) -> str:
    """Markdown with enough text per section to force multi-chunk packing."""
    parts = [f"# {rng.choice(_WORDS).title()} guidance"]
    for s in range(n_sections):
        parts.append(f"## {s + 1} {rng.choice(_WORDS).title()} {rng.choice(_WORDS)}")
        for _ in range(paragraphs):
            sentence_count = rng.randint(2, 4)
            sentences = [
                " ".join(rng.choice(_WORDS) for _ in range(rng.randint(18, 30))).capitalize() + "."
                for _ in range(sentence_count)
            ]
            parts.append(" ".join(sentences))
    return "\n\n".join(parts)


def synthetic_corpus(n_docs: int, seed: int = 11) -> list[GuidelineDoc]:
    rng = random.Random(seed)
    return [
        make_doc(f"NG{900 + i}", synthetic_body(rng), title=f"Synthetic guideline {i}")
        for i in range(n_docs)
    ]


class ScriptedJudge:
    """Chat client replaying canned replies; records every call."""

    def __init__(self, replies: list[str]):
        self.replies = list(replies)
        self.calls: list[tuple[str, str]] = []

    def complete(self, system_text: str, user_text: str, cfg) -> ChatResult:
        self.calls.append((system_text, user_text))
        if not self.replies:
            raise AssertionError("scripted judge ran out of replies")
        return ChatResult(text=self.replies.pop(0), input_tokens=1, output_tokens=1)


@pytest.fixture(scope="session", autouse=True)
def no_network():
    """The whole suite must run offline; any socket connect is a bug."""
    import socket

    def refuse(self, *args):
        raise RuntimeError(f"test attempted a network connection: {args}")

    original = socket.socket.connect
    socket.socket.connect = refuse
    yield
    socket.socket.connect = original


@pytest.fixture(scope="session")
def small_corpus() -> list[GuidelineDoc]:
    return synthetic_corpus(5, seed=3)


@pytest.fixture(scope="session")
def small_chunks(small_corpus) -> list[Chunk]:
    return chunk_corpus(small_corpus, PipelineConfig().chunker)


@pytest.fixture(scope="session")
def engine(small_chunks) -> Engine:
    return Engine.from_chunks(PipelineConfig(), small_chunks)
