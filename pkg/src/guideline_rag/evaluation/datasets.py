"""QA pair persistence and the bundled stand-in evaluation set.

The bundled set is a small hand-curated list of guideline-style questions
with Markdown reference answers, shipped so generation evaluation can run
end to end without access to any private dataset.
"""

from __future__ import annotations

import json
from importlib.resources import files
from pathlib import Path

from .judges import QaPair


def read_qa_jsonl(path: str | Path) -> list[QaPair]:
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                record = json.loads(line)
                pairs.append(
                    QaPair(
                        question=record["question"],
                        reference_answer=record["reference_answer"],
                        source_ref=record["source_ref"],
                    )
                )
    return pairs


def write_qa_jsonl(pairs: list[QaPair], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for p in pairs:
            record = {
                "question": p.question,
                "reference_answer": p.reference_answer,
                "source_ref": p.source_ref,
            }
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def load_standin_qa() -> list[QaPair]:
    """The bundled question/reference-answer set (Markdown answers)."""
    text = (
        files("guideline_rag.evaluation")
        .joinpath("assets/qa_standin.jsonl")
        .read_text(encoding="utf-8")
    )
    pairs = []
    for line in text.splitlines():
        if line.strip():
            record = json.loads(line)
            pairs.append(
                QaPair(
                    question=record["question"],
                    reference_answer=record["reference_answer"],
                    source_ref=record["source_ref"],
                )
            )
    return pairs
