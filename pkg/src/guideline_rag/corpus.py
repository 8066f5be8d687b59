"""Corpus acquisition and normalization into a canonical Markdown document model.

Ingestion reads local ``.xml`` or ``.md`` files, one guideline per file, with
the guideline id taken from the filename. XML is converted to Markdown with
headings, lists and tables preserved in document order.
"""

from __future__ import annotations

import json
import logging
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable

from .errors import EmptyDocument, MalformedXml, UnknownGuidanceType

logger = logging.getLogger(__name__)

GUIDANCE_TYPES = frozenset(
    {"DG", "HST", "IPG", "MTG", "NG", "QS", "TA", "CG", "CSG", "MPG", "PH", "SC", "SG"}
)

# Boilerplate section titles excluded from synthetic query generation.
DEFAULT_EXCLUDED_SECTIONS = (
    "About this quality standard",
    "Appendix",
    "Appraisal committee members",
    "Committee members",
    "Diagnostics advisory committee members and NICE project team",
    "Endorsing organisation",
    "Evaluation committee members and NICE project team",
    "Finding more information and committee details",
    "Putting this guideline into practice",
    "Sources of evidence",
    "Supporting organisations",
    "Update information",
)

_ID_PREFIX_RE = re.compile(r"^([A-Za-z]+)")


@dataclass
class GuidelineDoc:
    """One normalized guideline document."""

    id: str
    guidance_type: str
    title: str
    body_markdown: str
    source_format: str  # "xml" or "markdown"
    word_count: int
    retrieved_at: datetime

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("guideline id must be non-empty")
        if self.guidance_type not in GUIDANCE_TYPES:
            raise UnknownGuidanceType(self.guidance_type)


@dataclass(frozen=True)
class SectionExclusionList:
    """Section titles skipped during query generation.

    Matching is exact after whitespace trim and case folding.
    """

    titles: frozenset[str] = field(
        default_factory=lambda: frozenset(t.casefold() for t in DEFAULT_EXCLUDED_SECTIONS)
    )

    @classmethod
    def from_titles(cls, titles: Iterable[str]) -> "SectionExclusionList":
        return cls(titles=frozenset(t.strip().casefold() for t in titles))


def is_excluded_section(title: str, exclusions: SectionExclusionList | None = None) -> bool:
    """True iff the trimmed, case-folded title is on the exclusion list."""
    exclusions = exclusions or SectionExclusionList()
    return title.strip().casefold() in exclusions.titles


def guidance_type_from_id(doc_id: str) -> str:
    """Guidance type code from a guideline id such as ``NG158``."""
    m = _ID_PREFIX_RE.match(doc_id)
    code = m.group(1).upper() if m else ""
    if code not in GUIDANCE_TYPES:
        raise UnknownGuidanceType(f"cannot derive guidance type from id {doc_id!r}")
    return code


# --- XML -> Markdown -----------------------------------------------------

_HEADING_TAGS = {f"h{i}": i for i in range(1, 7)}
_LIST_TAGS = {"list", "ul", "ol"}
_ITEM_TAGS = {"item", "li"}
_TABLE_TAGS = {"table"}
_ROW_TAGS = {"row", "tr"}
_CELL_TAGS = {"cell", "td", "th"}
_KNOWN_TAGS = (
    set(_HEADING_TAGS) | _LIST_TAGS | _TABLE_TAGS | {"p", "section", "title"}
)


def _inline_text(el: ET.Element) -> str:
    """Flattened text content with whitespace runs collapsed."""
    return " ".join("".join(el.itertext()).split())


def _render_table(el: ET.Element) -> str:
    rows: list[list[str]] = []
    for row in el:
        if row.tag in _ROW_TAGS:
            rows.append([_inline_text(c) for c in row if c.tag in _CELL_TAGS])
    rows = [r for r in rows if r]
    if not rows:
        return ""
    width = max(len(r) for r in rows)
    lines = []
    for i, row in enumerate(rows):
        cells = row + [""] * (width - len(row))
        lines.append("| " + " | ".join(cells) + " |")
        if i == 0:
            lines.append("| " + " | ".join(["---"] * width) + " |")
    return "\n".join(lines)


def _render_list(el: ET.Element) -> str:
    ordered = el.tag == "ol" or el.get("type") == "number"
    lines = []
    n = 0
    for item in el:
        if item.tag in _ITEM_TAGS:
            n += 1
            marker = f"{n}." if ordered else "-"
            lines.append(f"{marker} {_inline_text(item)}")
    return "\n".join(lines)


def _render_element(el: ET.Element, depth: int, blocks: list[str]) -> None:
    tag = el.tag
    if tag in _HEADING_TAGS:
        blocks.append("#" * _HEADING_TAGS[tag] + " " + _inline_text(el))
    elif tag == "p":
        text = _inline_text(el)
        if text:
            blocks.append(text)
    elif tag in _LIST_TAGS:
        rendered = _render_list(el)
        if rendered:
            blocks.append(rendered)
    elif tag in _TABLE_TAGS:
        rendered = _render_table(el)
        if rendered:
            blocks.append(rendered)
    elif tag == "section":
        level = min(depth + 1, 6)
        heading = el.get("title")
        children = list(el)
        if heading is None and children and children[0].tag == "title":
            heading = _inline_text(children[0])
            children = children[1:]
        if heading:
            blocks.append("#" * level + " " + heading)
        for child in children:
            _render_element(child, depth + 1, blocks)
    elif any(child.tag in _KNOWN_TAGS for child in el):
        # Unknown container: keep its structure by recursing.
        lead = " ".join((el.text or "").split())
        if lead:
            blocks.append(lead)
        for child in el:
            _render_element(child, depth, blocks)
    else:
        # Unknown leaf element: render as a plain paragraph, never drop it.
        text = _inline_text(el)
        if text:
            blocks.append(text)


def parse_guideline(
    raw: str, doc_id: str, retrieved_at: datetime | None = None
) -> GuidelineDoc:
    """Convert one raw XML guideline into the canonical Markdown model.

    Raises MalformedXml for unparseable input or a missing document-level
    title, and EmptyDocument when no body text remains after conversion.
    """
    try:
        root = ET.fromstring(raw)
    except ET.ParseError as exc:
        raise MalformedXml(str(exc)) from exc

    title_el = root.find("title")
    if title_el is None:
        raise MalformedXml(f"document {doc_id!r} has no document-level title element")
    title = _inline_text(title_el)

    blocks: list[str] = []
    for child in root:
        if child is title_el:
            continue
        _render_element(child, 0, blocks)
    body = "\n\n".join(blocks)
    if not body.strip():
        raise EmptyDocument(doc_id)

    return GuidelineDoc(
        id=doc_id,
        guidance_type=guidance_type_from_id(doc_id),
        title=title,
        body_markdown=body,
        source_format="xml",
        word_count=len(body.split()),
        retrieved_at=retrieved_at or datetime.now(timezone.utc),
    )


def parse_markdown_guideline(
    raw: str, doc_id: str, retrieved_at: datetime | None = None
) -> GuidelineDoc:
    """Wrap an already-Markdown guideline file in the document model."""
    body = raw.strip("\n")
    if not body.strip():
        raise EmptyDocument(doc_id)
    title = doc_id
    for line in body.splitlines():
        m = re.match(r"^#\s+(.*)$", line)
        if m:
            title = m.group(1).strip()
            break
    return GuidelineDoc(
        id=doc_id,
        guidance_type=guidance_type_from_id(doc_id),
        title=title,
        body_markdown=body,
        source_format="markdown",
        word_count=len(body.split()),
        retrieved_at=retrieved_at or datetime.now(timezone.utc),
    )


def filter_corpus(docs: list[GuidelineDoc], types: set[str]) -> list[GuidelineDoc]:
    """Docs whose guidance type is in ``types``, original order preserved."""
    return [d for d in docs if d.guidance_type in types]


def load_corpus_dir(directory: str | Path) -> list[GuidelineDoc]:
    """Parse every ``.xml``/``.md`` file in a directory, sorted by filename.

    File modification time is used as the retrieval timestamp so repeated
    ingestion of an unchanged fixture tree is byte-stable.
    """
    directory = Path(directory)
    docs: list[GuidelineDoc] = []
    for path in sorted(directory.iterdir()):
        if path.suffix not in {".xml", ".md"}:
            continue
        retrieved = datetime.fromtimestamp(path.stat().st_mtime, tz=timezone.utc)
        raw = path.read_text(encoding="utf-8")
        if path.suffix == ".xml":
            docs.append(parse_guideline(raw, path.stem, retrieved_at=retrieved))
        else:
            docs.append(parse_markdown_guideline(raw, path.stem, retrieved_at=retrieved))
    logger.info("loaded %d guideline documents from %s", len(docs), directory)
    return docs


# --- canonical corpus file -------------------------------------------------


def doc_to_record(doc: GuidelineDoc) -> dict:
    return {
        "id": doc.id,
        "guidance_type": doc.guidance_type,
        "title": doc.title,
        "body_markdown": doc.body_markdown,
        "word_count": doc.word_count,
        "retrieved_at": doc.retrieved_at.isoformat(),
    }


def doc_from_record(record: dict) -> GuidelineDoc:
    return GuidelineDoc(
        id=record["id"],
        guidance_type=record["guidance_type"],
        title=record["title"],
        body_markdown=record["body_markdown"],
        source_format=record.get("source_format", "markdown"),
        word_count=record["word_count"],
        retrieved_at=datetime.fromisoformat(record["retrieved_at"]),
    )


def write_corpus_jsonl(docs: list[GuidelineDoc], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for doc in docs:
            fh.write(json.dumps(doc_to_record(doc), ensure_ascii=False) + "\n")


def read_corpus_jsonl(path: str | Path) -> list[GuidelineDoc]:
    docs = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                docs.append(doc_from_record(json.loads(line)))
    return docs
