"""Hierarchical split/merge chunking of Markdown guideline documents.

Documents are first segmented at level-1/level-2 headings. Oversized
segments are subdivided at the deepest available boundary, in priority
order: deeper subsection heading, then paragraph break, then sentence
break. Consecutive chunks produced from the same region share a tail
overlap; overlap never crosses a heading boundary. Undersized chunks are
then merged with their successor where possible (predecessor as fallback),
and ordinals are assigned after merging.
"""

from __future__ import annotations

import json
import re
from bisect import bisect_left
from dataclasses import dataclass, field, replace
from pathlib import Path

from .corpus import GuidelineDoc
from .io_utils import atomic_write_text
from .tokenization import REFERENCE_TOKENIZER_ID, Token, Tokenizer, get_tokenizer

_HEADING_LINE_RE = re.compile(r"^(#{1,6})\s+(.+?)\s*$", re.MULTILINE)
_PARA_GAP_RE = re.compile(r"\n[ \t]*\n+")
_SENTENCE_END_RE = re.compile(r"(?<=[.!?])\s+")
_TABLE_LINE_RE = re.compile(r"^[ \t]*\|", re.MULTILINE)


@dataclass(frozen=True)
class ChunkerConfig:
    max_tokens: int = 600
    min_tokens: int = 200
    overlap_tokens: int = 50
    tokenizer_id: str = REFERENCE_TOKENIZER_ID

    def __post_init__(self) -> None:
        if not (0 <= self.overlap_tokens < self.min_tokens < self.max_tokens):
            raise ValueError(
                "require 0 <= overlap_tokens < min_tokens < max_tokens, got "
                f"{self.overlap_tokens}/{self.min_tokens}/{self.max_tokens}"
            )


@dataclass
class Segment:
    """A heading-delimited region of one document."""

    doc_id: str
    heading_path: list[str]
    text: str
    start: int  # char offset of `text` into body_markdown
    end: int


@dataclass
class Chunk:
    """A contiguous retrieval-sized passage.

    ``text`` may begin with an overlap prefix duplicated from the previous
    chunk; ``char_span`` covers only the primary (non-overlap) content.
    """

    chunk_id: str
    doc_id: str
    heading_path: list[str]
    text: str
    token_count: int
    char_span: tuple[int, int] | None = None
    indivisible: bool = False
    overlap_chars: int = 0

    @property
    def primary_text(self) -> str:
        return self.text[self.overlap_chars :]


def split_by_headings(doc: GuidelineDoc) -> list[Segment]:
    """Segment a document at its level-1 and level-2 headings.

    Returns one segment per heading region holding body text, in document
    order; text before the first heading becomes a segment with an empty
    heading path. Heading regions with no body text yield no segment.
    """
    body = doc.body_markdown
    boundaries: list[tuple[int, int, int, str]] = []  # (line_start, line_end, level, title)
    for m in _HEADING_LINE_RE.finditer(body):
        level = len(m.group(1))
        if level <= 2:
            boundaries.append((m.start(), m.end(), level, m.group(2)))

    segments: list[Segment] = []
    current_l1: str | None = None

    def emit(raw_start: int, raw_end: int, path: list[str]) -> None:
        raw = body[raw_start:raw_end]
        stripped = raw.strip()
        if not stripped:
            return
        start = raw_start + raw.index(stripped[0])
        segments.append(
            Segment(
                doc_id=doc.id,
                heading_path=path,
                text=body[start : start + len(stripped)],
                start=start,
                end=start + len(stripped),
            )
        )

    cursor = 0
    path: list[str] = []
    for line_start, line_end, level, title in boundaries:
        emit(cursor, line_start, path)
        if level == 1:
            current_l1 = title
            path = [title]
        else:
            path = [current_l1, title] if current_l1 else [title]
        cursor = line_end
    emit(cursor, len(body), path)
    return segments


# --- subdivision -----------------------------------------------------------


def _table_ranges(text: str) -> list[tuple[int, int]]:
    """Char ranges of consecutive pipe-table lines."""
    ranges: list[tuple[int, int]] = []
    for m in _TABLE_LINE_RE.finditer(text):
        line_end = text.find("\n", m.start())
        line_end = len(text) if line_end < 0 else line_end
        if ranges and m.start() <= ranges[-1][1] + 1:
            ranges[-1] = (ranges[-1][0], line_end)
        else:
            ranges.append((m.start(), line_end))
    return ranges


def _boundary_token_indexes(
    text: str, tokens: list[Token]
) -> tuple[list[int], list[int]]:
    """Paragraph-break and sentence-break positions as token indexes.

    A position is the index of the first token after the break. Sentence
    breaks inside pipe tables are discarded so tables stay atomic.
    """
    starts = [t.start for t in tokens]
    n = len(tokens)

    def to_index(char_pos: int) -> int:
        return bisect_left(starts, char_pos)

    para = sorted(
        {
            idx
            for m in _PARA_GAP_RE.finditer(text)
            if 0 < (idx := to_index(m.end())) < n
        }
    )
    tables = _table_ranges(text)

    def in_table(pos: int) -> bool:
        return any(a <= pos <= b for a, b in tables)

    sent = sorted(
        {
            idx
            for m in _SENTENCE_END_RE.finditer(text)
            if not in_table(m.start())
            and 0 < (idx := to_index(m.end())) < n
        }
    )
    return para, sent


@dataclass
class _Region:
    heading_path: list[str]
    text: str
    base: int  # char offset of `text` into body_markdown


def _split_internal_headings(seg: Segment) -> list[_Region]:
    """Partition a segment at its internal (deeper) headings."""
    text = seg.text
    marks = [
        (m.start(), m.end(), len(m.group(1)), m.group(2))
        for m in _HEADING_LINE_RE.finditer(text)
    ]
    if not marks:
        return [_Region(list(seg.heading_path), text, seg.start)]

    regions: list[_Region] = []
    stack: list[tuple[int, str]] = []  # (level, title)

    def emit(raw_start: int, raw_end: int) -> None:
        raw = text[raw_start:raw_end]
        stripped = raw.strip()
        if not stripped:
            return
        start = raw_start + raw.index(stripped[0])
        path = list(seg.heading_path) + [title for _, title in stack]
        regions.append(_Region(path, text[start : start + len(stripped)], seg.start + start))

    cursor = 0
    for line_start, line_end, level, title in marks:
        emit(cursor, line_start)
        while stack and stack[-1][0] >= level:
            stack.pop()
        stack.append((level, title))
        cursor = line_end
    emit(cursor, len(text))
    return regions


def _pack_region(region: _Region, cfg: ChunkerConfig, tok: Tokenizer) -> list[Chunk]:
    tokens = tok.encode(region.text)
    n = len(tokens)
    if n == 0:
        return []

    # (overlap_start, primary_start, end, indivisible) in token indexes
    spans: list[tuple[int, int, int, bool]] = []
    if n <= cfg.max_tokens:
        spans.append((0, 0, n, False))
    else:
        para, sent = _boundary_token_indexes(region.text, tokens)
        all_bounds = sorted(set(para) | set(sent))
        s = 0
        while s < n:
            ov = 0
            if spans:
                prev_o, _, prev_e, _ = spans[-1]
                ov = min(cfg.overlap_tokens, prev_e - prev_o)
            budget = cfg.max_tokens - ov
            if n - s <= budget:
                spans.append((s - ov, s, n, False))
                break
            cand = [p for p in para if s < p <= s + budget]
            if not cand:
                cand = [q for q in sent if s < q <= s + budget]
            if cand:
                e = max(cand)
                spans.append((s - ov, s, e, False))
            else:
                # No breakpoint fits with overlap: emit the whole block
                # without one, flagged when it exceeds the cap on its own.
                nxt = [q for q in all_bounds if q > s]
                e = min(nxt) if nxt else n
                spans.append((s, s, e, e - s > cfg.max_tokens))
            s = e
        _rebalance_tail(spans, para, sent, cfg)

    chunks = []
    for o, s, e, flagged in spans:
        t0, t_last = tokens[o], tokens[e - 1]
        text = region.text[t0.start : t_last.end]
        chunks.append(
            Chunk(
                chunk_id="",
                doc_id="",
                heading_path=list(region.heading_path),
                text=text,
                token_count=e - o,
                char_span=(region.base + tokens[s].start, region.base + t_last.end),
                indivisible=flagged,
                overlap_chars=tokens[s].start - t0.start,
            )
        )
    return chunks


def _rebalance_tail(
    spans: list[tuple[int, int, int, bool]],
    para: list[int],
    sent: list[int],
    cfg: ChunkerConfig,
) -> None:
    """Shift the final split point left when greedy packing leaves a runt tail."""
    if len(spans) < 2:
        return
    o2, _, e2, f2 = spans[-1]
    o1, s1, _, f1 = spans[-2]
    if f1 or f2 or e2 - o2 >= cfg.min_tokens:
        return
    for bounds in (para, sent):
        valid = []
        for q in bounds:
            if not s1 < q < e2:
                continue
            ov2 = min(cfg.overlap_tokens, q - o1)
            if (
                cfg.min_tokens <= q - o1 <= cfg.max_tokens
                and cfg.min_tokens <= e2 - q + ov2 <= cfg.max_tokens
            ):
                valid.append(q)
        if valid:
            q = max(valid)
            ov2 = min(cfg.overlap_tokens, q - o1)
            spans[-2] = (o1, s1, q, False)
            spans[-1] = (q - ov2, q, e2, False)
            return


def subdivide_oversized(seg: Segment, cfg: ChunkerConfig) -> list[Chunk]:
    """Split one segment into chunks no larger than ``cfg.max_tokens``.

    A block with no internal breakpoint that cannot meet the cap is emitted
    whole and flagged indivisible. Chunk ids are left blank; they are
    assigned document-wide after merging.
    """
    tok = get_tokenizer(cfg.tokenizer_id)
    tokens = tok.encode(seg.text)
    if not tokens:
        return []
    if len(tokens) <= cfg.max_tokens:
        return [
            Chunk(
                chunk_id="",
                doc_id=seg.doc_id,
                heading_path=list(seg.heading_path),
                text=seg.text,
                token_count=len(tokens),
                char_span=(seg.start, seg.end),
            )
        ]
    chunks = []
    for region in _split_internal_headings(seg):
        chunks.extend(_pack_region(region, cfg, tok))
    for c in chunks:
        c.doc_id = seg.doc_id
    return chunks


# --- merge ------------------------------------------------------------------


def _common_prefix(a: list[str], b: list[str]) -> list[str]:
    out = []
    for x, y in zip(a, b):
        if x != y:
            break
        out.append(x)
    return out


def _merge_two(a: Chunk, b: Chunk, tok: Tokenizer) -> Chunk:
    text = a.text + "\n\n" + b.primary_text if b.primary_text else a.text
    span = None
    if a.char_span and b.char_span:
        span = (a.char_span[0], b.char_span[1])
    return Chunk(
        chunk_id="",
        doc_id=a.doc_id,
        heading_path=_common_prefix(a.heading_path, b.heading_path),
        text=text,
        token_count=tok.count(text),
        char_span=span,
        indivisible=a.indivisible or b.indivisible,
        overlap_chars=a.overlap_chars,
    )


def merge_undersized(chunks: list[Chunk], cfg: ChunkerConfig) -> list[Chunk]:
    """Merge chunks below ``cfg.min_tokens`` into a neighbour.

    A single left-to-right pass; each undersized chunk is merged with its
    successor while the result stays within ``cfg.max_tokens``, falling back
    to its predecessor when the forward merge is blocked. Content order is
    never changed.
    """
    tok = get_tokenizer(cfg.tokenizer_id)
    out: list[Chunk] = []
    i = 0
    while i < len(chunks):
        cur = chunks[i]
        i += 1
        while cur.token_count < cfg.min_tokens and i < len(chunks):
            cand = _merge_two(cur, chunks[i], tok)
            if cand.token_count > cfg.max_tokens:
                break
            cur = cand
            i += 1
        if cur.token_count < cfg.min_tokens and out:
            cand = _merge_two(out[-1], cur, tok)
            if cand.token_count <= cfg.max_tokens:
                out[-1] = cand
                continue
        out.append(cur)
    return out


def assign_chunk_ids(chunks: list[Chunk], doc_id: str) -> list[Chunk]:
    return [
        replace(c, chunk_id=f"{doc_id}#{i:04d}", doc_id=doc_id)
        for i, c in enumerate(chunks)
    ]


def chunk_document(doc: GuidelineDoc, cfg: ChunkerConfig | None = None) -> list[Chunk]:
    """Full split/merge pipeline for one document."""
    cfg = cfg or ChunkerConfig()
    if not doc.body_markdown.strip():
        return []
    raw: list[Chunk] = []
    for seg in split_by_headings(doc):
        raw.extend(subdivide_oversized(seg, cfg))
    return assign_chunk_ids(merge_undersized(raw, cfg), doc.id)


def chunk_corpus(docs: list[GuidelineDoc], cfg: ChunkerConfig | None = None) -> list[Chunk]:
    cfg = cfg or ChunkerConfig()
    out: list[Chunk] = []
    for doc in docs:
        out.extend(chunk_document(doc, cfg))
    return out


# --- chunk file --------------------------------------------------------------


def chunk_to_record(chunk: Chunk) -> dict:
    return {
        "chunk_id": chunk.chunk_id,
        "doc_id": chunk.doc_id,
        "heading_path": chunk.heading_path,
        "text": chunk.text,
        "token_count": chunk.token_count,
        "indivisible": chunk.indivisible,
    }


def chunk_from_record(record: dict) -> Chunk:
    return Chunk(
        chunk_id=record["chunk_id"],
        doc_id=record["doc_id"],
        heading_path=list(record["heading_path"]),
        text=record["text"],
        token_count=record["token_count"],
        indivisible=record.get("indivisible", False),
    )


def write_chunks_jsonl(chunks: list[Chunk], path: str | Path) -> None:
    lines = [json.dumps(chunk_to_record(c), ensure_ascii=False) for c in chunks]
    atomic_write_text(path, "".join(line + "\n" for line in lines))


def read_chunks_jsonl(path: str | Path) -> list[Chunk]:
    chunks = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                chunks.append(chunk_from_record(json.loads(line)))
    return chunks
