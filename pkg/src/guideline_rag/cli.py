"""Command line entry points.

Every verb is a thin wrapper: parse arguments, call the library, print.
`ask` can also be pointed at a running service with --server, in which
case it goes through the HTTP API instead of loading indexes locally.
"""

from __future__ import annotations

import json
import sys
from dataclasses import replace
from pathlib import Path

import click
import httpx

from .chunking import read_chunks_jsonl, write_chunks_jsonl, chunk_corpus
from .corpus import load_corpus_dir
from .dense import build_vector_store, save_vector_store
from .errors import GuidelineRagError
from .evaluation import (
    compute_retrieval_report,
    estimate_cost,
    evaluate_generation,
    read_pairs_jsonl,
    read_qa_jsonl,
)
from .evaluation.judges import DEFAULT_JUDGE_MODEL
from .io_utils import atomic_write_text
from .pipeline import (
    STRATEGIES,
    Engine,
    resolve_model_config,
    load_config,
    make_chat_client,
    make_embedding_client,
)
from .sparse import build_index, save_sparse_index

_CONFIG_OPTION = click.option(
    "--config",
    "config_path",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    default=None,
    help="TOML config file; defaults apply when omitted.",
)


def _fail(exc: Exception) -> None:
    raise click.ClickException(f"{type(exc).__name__}: {exc}")


@click.group()
def main() -> None:
    """Hybrid retrieval-augmented answering over clinical guidelines."""


@main.command()
@click.option("--corpus-dir", type=click.Path(exists=True, file_okay=False, path_type=Path), required=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False, path_type=Path), required=True)
@_CONFIG_OPTION
def ingest(corpus_dir: Path, out_path: Path, config_path: Path | None) -> None:
    """Parse guideline sources and write chunks as JSONL."""
    cfg = load_config(config_path)
    try:
        docs = load_corpus_dir(corpus_dir)
        chunks = chunk_corpus(docs, cfg.chunker)
        write_chunks_jsonl(chunks, out_path)
    except GuidelineRagError as exc:
        _fail(exc)
    click.echo(f"wrote {len(chunks)} chunks from {len(docs)} documents to {out_path}")


@main.group()
def index() -> None:
    """Build index artifacts from a chunk file."""


@index.command("sparse")
@click.option("--in", "in_path", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False, path_type=Path), required=True)
@_CONFIG_OPTION
def index_sparse(in_path: Path, out_path: Path, config_path: Path | None) -> None:
    """Build the lexical index."""
    cfg = load_config(config_path)
    try:
        chunks = read_chunks_jsonl(in_path)
        idx = build_index(chunks, replace(cfg.bm25))
        save_sparse_index(idx, out_path)
    except GuidelineRagError as exc:
        _fail(exc)
    click.echo(f"indexed {idx.n_docs} chunks, {len(idx.postings)} terms -> {out_path}")


@index.command("dense")
@click.option("--in", "in_path", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True)
@click.option("--model", "model_id", default=None, help="Embedding model id; config value when omitted.")
@click.option("--out", "out_path", type=click.Path(dir_okay=False, path_type=Path), required=True)
@_CONFIG_OPTION
def index_dense(in_path: Path, model_id: str | None, out_path: Path, config_path: Path | None) -> None:
    """Embed chunks and write the vector store."""
    cfg = load_config(config_path)
    settings = cfg.embedding
    if model_id:
        settings = replace(settings, model_id=model_id)
    try:
        chunks = read_chunks_jsonl(in_path)
        store = build_vector_store(chunks, make_embedding_client(settings))
        save_vector_store(store, out_path)
    except GuidelineRagError as exc:
        _fail(exc)
    click.echo(f"embedded {len(chunks)} chunks with {settings.model_id} -> {out_path}")


@main.command()
@click.argument("query")
@click.option("--strategy", type=click.Choice(STRATEGIES), default="hybrid", show_default=True)
@click.option("--top-k", type=int, default=10, show_default=True)
@click.option("--json", "as_json", is_flag=True, help="Print the full ranked list as JSON.")
@_CONFIG_OPTION
def search(query: str, strategy: str, top_k: int, as_json: bool, config_path: Path | None) -> None:
    """Run one retrieval pass and print the ranked chunks."""
    cfg = load_config(config_path)
    try:
        engine = Engine.load(cfg)
        ranked = engine.search(query, strategy=strategy, top_k=top_k)
    except GuidelineRagError as exc:
        _fail(exc)
    if as_json:
        click.echo(json.dumps(
            [{"rank": e.rank, "score": e.score, "chunk_id": e.chunk_id} for e in ranked.entries],
            ensure_ascii=False,
        ))
        return
    for e in ranked.entries:
        chunk = engine.get_chunk(e.chunk_id)
        heading = " > ".join(chunk.heading_path) if chunk else ""
        click.echo(f"{e.rank:3d}  {e.score:10.4f}  {e.chunk_id}  {heading}")


@main.command()
@click.argument("query")
@click.option("--context-size", type=int, default=None, help="Chunks passed to the model; config value when omitted.")
@click.option("--server", default=None, help="Base URL of a running service; bypasses local index loading.")
@click.option("--json", "as_json", is_flag=True, help="Print the full result as JSON.")
@_CONFIG_OPTION
def ask(query: str, context_size: int | None, server: str | None, as_json: bool, config_path: Path | None) -> None:
    """Answer a query grounded in retrieved guideline chunks."""
    if server:
        body: dict = {"query": query}
        if context_size is not None:
            body["context_size"] = context_size
        response = httpx.post(f"{server.rstrip('/')}/api/ask", json=body, timeout=120.0)
        if response.status_code != 200:
            raise click.ClickException(f"server returned {response.status_code}: {response.text}")
        payload = response.json()
    else:
        cfg = load_config(config_path)
        try:
            engine = Engine.load(cfg)
            payload = engine.ask(query, context_size).to_dict()
        except GuidelineRagError as exc:
            _fail(exc)
    if as_json:
        click.echo(json.dumps(payload, ensure_ascii=False, indent=2))
        return
    click.echo(payload["answer"]["text"])
    citations = ", ".join(e["chunk_id"] for e in payload["retrieved"][:5])
    click.echo(f"\n[contexts: {citations}]", err=True)


@main.group("eval")
def eval_group() -> None:
    """Evaluation over labelled pairs."""


@eval_group.command("retrieval")
@click.option("--pairs", "pairs_path", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True)
@click.option("--strategy", type=click.Choice(STRATEGIES), default="hybrid", show_default=True)
@click.option("--top-k", type=int, default=100, show_default=True)
@click.option("--report", "report_path", type=click.Path(dir_okay=False, path_type=Path), required=True)
@_CONFIG_OPTION
def eval_retrieval(pairs_path: Path, strategy: str, top_k: int, report_path: Path, config_path: Path | None) -> None:
    """Rank metrics (MRR, Recall@k) over query/chunk pairs."""
    cfg = load_config(config_path)
    try:
        engine = Engine.load(cfg)
        pairs = read_pairs_jsonl(pairs_path)
        report = compute_retrieval_report(
            pairs, lambda q: engine.search(q, strategy=strategy, top_k=top_k)
        )
    except GuidelineRagError as exc:
        _fail(exc)
    atomic_write_text(report_path, json.dumps(report.to_dict(), ensure_ascii=False, indent=2) + "\n")
    click.echo(f"n={report.n_queries}  MRR={report.mrr:.4f}  not_found={report.not_found_count}")
    for k in sorted(report.recall_at):
        click.echo(f"Recall@{k}={report.recall_at[k]:.4f}")
    click.echo(f"report -> {report_path}")


@eval_group.command("generation")
@click.option("--qa", "qa_path", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True)
@click.option("--report", "report_path", type=click.Path(dir_okay=False, path_type=Path), required=True)
@click.option("--judge-model", default=DEFAULT_JUDGE_MODEL, show_default=True)
@_CONFIG_OPTION
def eval_generation(qa_path: Path, report_path: Path, judge_model: str, config_path: Path | None) -> None:
    """Judged metrics (faithfulness, relevancy, precision, recall) over QA pairs.

    The judge reuses the configured chat provider; stub providers cannot
    emit the JSON the judge prompts demand, so this needs an HTTP provider.
    """
    cfg = load_config(config_path)
    try:
        engine = Engine.load(cfg)
        qa_pairs = read_qa_jsonl(qa_path)

        def run(question: str) -> tuple[str, list[str]]:
            result = engine.ask(question)
            texts = [engine.get_chunk(cid).text for cid in result.retrieved.chunk_ids()]
            return result.answer.text, texts

        report = evaluate_generation(
            qa_pairs,
            run,
            judge=make_chat_client(cfg.generation),
            embedder=engine.embedding_client,
            cfg=resolve_model_config(judge_model),
        )
    except GuidelineRagError as exc:
        _fail(exc)
    atomic_write_text(report_path, json.dumps(report.to_dict(), ensure_ascii=False, indent=2) + "\n")
    for name in ("faithfulness", "response_relevancy", "context_precision", "context_recall"):
        value = getattr(report, name)
        click.echo(f"{name}={'skipped' if value is None else f'{value:.4f}'}")
    click.echo(f"report -> {report_path}")


@main.command()
@click.option("--chunks", "n_chunks", type=int, default=10, show_default=True, help="Context chunks per query.")
@click.option("--json", "as_json", is_flag=True)
def cost(n_chunks: int, as_json: bool) -> None:
    """Print the per-query token/price breakdown."""
    breakdown = estimate_cost(n_chunks)
    if as_json:
        click.echo(json.dumps(breakdown.to_dict(), ensure_ascii=False, indent=2))
        return
    for c in breakdown.components:
        click.echo(f"{c.name:12s} {c.tokens:7d} tokens  ${c.cost:.6f}")
    click.echo(f"{'total':12s} {breakdown.total_tokens:7d} tokens  ${breakdown.total_cost:.6f}")


@main.command()
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--workers", type=int, default=8, show_default=True, help="Concurrent ask() bound.")
@_CONFIG_OPTION
def serve(port: int, host: str, workers: int, config_path: Path | None) -> None:
    """Run the HTTP service."""
    import uvicorn

    from .service import create_app

    cfg = load_config(config_path)
    uvicorn.run(create_app(cfg=cfg, workers=workers), host=host, port=port)


if __name__ == "__main__":
    main(prog_name="guideline-rag")
