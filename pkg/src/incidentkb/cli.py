"""Command-line pipeline: ingest, classify, filter, index, query, evaluate, serve.

Exit codes:
    0  success
    2  usage or parameter errors
    3  input or data errors
    4  model provider errors
    5  storage or persistence errors
"""

from __future__ import annotations

import json
import sys
from pathlib import Path
from typing import Optional

import click

from . import __version__
from .answering import DEFAULT_TOKEN_BUDGET, generate_answer
from .chunking import DEFAULT_CHUNK_OVERLAP, DEFAULT_CHUNK_SIZE, chunk_corpus
from .classify import (
    GuidelineRules,
    classify_store,
    filter_transportation,
    load_verdicts,
    save_verdicts,
)
from .errors import (
    ChecksumMismatch,
    IncidentKbError,
    IncompatibleVersion,
    InvalidParams,
    ProviderUnavailable,
    StorageFailure,
    UnparseableProviderOutput,
)
from .evaluation import load_testset, run_eval, write_report_csv
from .figures import render_metric_figures
from .indexes import build_knowledge_base, load_knowledge_base, save_knowledge_base
from .ingest import (
    extract_records_llm,
    ingest_text_records,
    load_delimited_file,
    load_source_config,
    merge_sources,
)
from .providers import resolve_chat_provider, resolve_embedder
from .records import IncidentStore
from .retrieval import (
    DEFAULT_ALPHA,
    DEFAULT_B,
    DEFAULT_K1,
    DEFAULT_TOP_K,
    RetrievalConfig,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_PROVIDER = 4
EXIT_STORAGE = 5

_PROVIDER_ERRORS = (ProviderUnavailable, UnparseableProviderOutput)
_STORAGE_ERRORS = (StorageFailure, IncompatibleVersion, ChecksumMismatch)


def _exit_code(exc: IncidentKbError) -> int:
    if isinstance(exc, InvalidParams):
        return EXIT_USAGE
    if isinstance(exc, _PROVIDER_ERRORS):
        return EXIT_PROVIDER
    if isinstance(exc, _STORAGE_ERRORS):
        return EXIT_STORAGE
    return EXIT_INPUT


@click.group()
@click.option(
    "--config",
    type=click.Path(exists=True, dir_okay=False),
    default=None,
    help="JSON file of per-command option defaults.",
)
@click.version_option(__version__, prog_name="incidentkb")
@click.pass_context
def cli(ctx: click.Context, config: Optional[str]) -> None:
    """Transportation cyber-incident knowledge base."""
    if config:
        try:
            defaults = json.loads(Path(config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidParams(f"cannot read config file: {exc}") from exc
        if not isinstance(defaults, dict):
            raise InvalidParams("config file must hold a JSON object")
        ctx.default_map = defaults


@cli.command()
@click.option("--source", "sources", multiple=True, required=True,
              type=click.Path(exists=True, dir_okay=False), help="Source feed file; repeatable.")
@click.option("--map", "maps", multiple=True, required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Source config JSON; one per --source, in order.")
@click.option("--adapter", "adapters", multiple=True,
              type=click.Choice(["delimited", "text", "llm"]),
              help="Adapter override; one per --source, in order. Defaults from each config.")
@click.option("--out", required=True, type=click.Path(dir_okay=False), help="Store file to write.")
def ingest(sources: tuple, maps: tuple, adapters: tuple, out: str) -> None:
    """Normalize source feeds into one canonical record store."""
    if len(sources) != len(maps):
        raise InvalidParams("each --source needs a matching --map")
    if adapters and len(adapters) != len(sources):
        raise InvalidParams("--adapter must be given once per --source, or not at all")

    batches = []
    for i, (src, map_path) in enumerate(zip(sources, maps)):
        config = load_source_config(map_path)
        adapter = adapters[i] if adapters else config.adapter
        if adapter == "delimited":
            records, report = load_delimited_file(src, config)
        elif adapter == "text":
            records, report = ingest_text_records(Path(src).read_text(encoding="utf-8"), config)
        elif adapter == "llm":
            chat = resolve_chat_provider()
            records, report = extract_records_llm(
                Path(src).read_text(encoding="utf-8"), chat, config
            )
        else:  # pragma: no cover - click.Choice already guards this
            raise InvalidParams(f"unknown adapter {adapter!r}")
        batches.append(records)
        click.echo(
            f"{report.source}: {report.rows_read} rows, {report.produced} records,"
            f" {report.rejected_count} rejected"
        )
        for row_id, reason in report.rejected:
            click.echo(f"  rejected row {row_id}: {reason}", err=True)

    store, merged = merge_sources(batches)
    store.save(out)
    click.echo(
        f"merged: {merged.produced} records, {merged.duplicates_flagged} duplicates flagged -> {out}"
    )


@cli.command()
@click.option("--store", "store_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--engine", type=click.Choice(["llm", "rules"]), default="llm", show_default=True)
@click.option("--guidelines", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Keyword guideline JSON; defaults to the bundled table.")
@click.option("--out", required=True, type=click.Path(dir_okay=False), help="Verdict CSV to write.")
def classify(store_path: str, engine: str, guidelines: Optional[str], out: str) -> None:
    """Assign a transportation mode verdict to every stored record."""
    store = IncidentStore.load(store_path)
    rules = None
    if guidelines:
        rules = GuidelineRules.from_mapping(json.loads(Path(guidelines).read_text(encoding="utf-8")))
    provider = resolve_chat_provider() if engine == "llm" else None
    verdicts = classify_store(store, engine=engine, provider=provider, rules=rules)
    save_verdicts(verdicts, out)
    modes = {}
    for v in verdicts.values():
        modes[v.predicted.value] = modes.get(v.predicted.value, 0) + 1
    breakdown = ", ".join(f"{label}={count}" for label, count in sorted(modes.items()))
    click.echo(f"classified {len(verdicts)} records ({breakdown}) -> {out}")


@cli.command("filter")
@click.option("--store", "store_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--verdicts", "verdicts_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--transport-only", "transport_only", multiple=True,
              help="Source whose records bypass verdicts and keep their feed-assigned mode; repeatable.")
@click.option("--out", required=True, type=click.Path(dir_okay=False))
def filter_cmd(store_path: str, verdicts_path: str, transport_only: tuple, out: str) -> None:
    """Keep transportation incidents only, stamping predicted modes."""
    store = IncidentStore.load(store_path)
    verdicts = load_verdicts(verdicts_path)
    filtered, report = filter_transportation(store, verdicts, transport_only)
    filtered.save(out)
    click.echo(
        f"kept {report.kept} of {report.kept + report.dropped} records"
        f" (retention {report.retention:.4f}) -> {out}"
    )


@cli.command()
@click.option("--store", "store_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--chunk-size", default=DEFAULT_CHUNK_SIZE, show_default=True)
@click.option("--overlap", default=DEFAULT_CHUNK_OVERLAP, show_default=True)
def index(store_path: str, out_dir: str, chunk_size: int, overlap: int) -> None:
    """Chunk, embed, and index a record store."""
    store = IncidentStore.load(store_path)
    chunks = chunk_corpus(store, chunk_size, overlap)
    embedder = resolve_embedder()
    kb = build_knowledge_base(chunks, store, embedder)
    save_knowledge_base(kb, out_dir)
    click.echo(
        f"indexed {len(store)} records into {len(chunks)} chunks"
        f" ({embedder.id}) -> {out_dir}"
    )


def _retrieval_config(alpha: float, top_k: int, k1: float, b: float, normalize: bool) -> RetrievalConfig:
    return RetrievalConfig(alpha=alpha, k=top_k, k1=k1, b=b, normalize_scores=normalize)


@cli.command()
@click.argument("question")
@click.option("--index", "index_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--alpha", default=DEFAULT_ALPHA, show_default=True, help="Dense weight in [0, 1].")
@click.option("--top-k", default=DEFAULT_TOP_K, show_default=True)
@click.option("--k1", default=DEFAULT_K1, show_default=True)
@click.option("--b", default=DEFAULT_B, show_default=True)
@click.option("--normalize-scores", is_flag=True, help="Min-max both signals before fusing.")
@click.option("--budget", default=DEFAULT_TOKEN_BUDGET, show_default=True,
              help="Context token budget per generation batch.")
@click.option("--stub-llm", is_flag=True, help="Echo retrieved context instead of calling a model.")
def query(question: str, index_dir: str, alpha: float, top_k: int, k1: float, b: float,
          normalize_scores: bool, budget: int, stub_llm: bool) -> None:
    """Answer one question against a built index."""
    kb = load_knowledge_base(index_dir)
    cfg = _retrieval_config(alpha, top_k, k1, b, normalize_scores)
    chat = resolve_chat_provider(stub=stub_llm)
    embedder = resolve_embedder()
    result = generate_answer(question, kb, chat, embedder, cfg, budget)

    click.echo(result.answer)
    click.echo()
    click.echo("Retrieved:")
    for s in result.retrieved:
        keys = ", ".join(kb.chunks[s.chunk_id].record_keys)
        click.echo(
            f"  {s.rank}. chunk {s.chunk_id} [{keys}]"
            f" hybrid={s.hybrid:.4f} dense={s.dense:.4f} sparse={s.sparse:.4f}"
        )
    click.echo(f"Cited records: {', '.join(result.cited_keys)}")
    if result.batch_count > 1:
        click.echo(f"(consolidated from {result.batch_count} context batches)")


@cli.command()
@click.option("--index", "index_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--testset", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", required=True, type=click.Path(dir_okay=False), help="Report CSV path.")
@click.option("--figures/--no-figures", default=True, show_default=True,
              help="Render per-item metric charts next to the report.")
@click.option("--alpha", default=DEFAULT_ALPHA, show_default=True)
@click.option("--top-k", default=DEFAULT_TOP_K, show_default=True)
@click.option("--budget", default=DEFAULT_TOKEN_BUDGET, show_default=True)
@click.option("--stub-llm", is_flag=True, help="Echo retrieved context instead of calling a model.")
def evaluate(index_dir: str, testset: str, out: str, figures: bool, alpha: float,
             top_k: int, budget: int, stub_llm: bool) -> None:
    """Score generated answers against a reference test set."""
    kb = load_knowledge_base(index_dir)
    items = load_testset(testset)
    cfg = _retrieval_config(alpha, top_k, DEFAULT_K1, DEFAULT_B, False)
    chat = resolve_chat_provider(stub=stub_llm)
    embedder = resolve_embedder()

    def system(question: str) -> str:
        return generate_answer(question, kb, chat, embedder, cfg, budget).answer

    report = run_eval(items, system)
    write_report_csv(report, out)
    click.echo(f"evaluated {report.evaluated} items ({report.failures} failures) -> {out}")
    for name, value in report.averages.items():
        click.echo(f"  {name}: {value:.4f}")
    if figures:
        out_path = Path(out)
        written = render_metric_figures(report, out_path.parent, stem=out_path.stem)
        click.echo(f"wrote {len(written)} figures to {out_path.parent or '.'}")


@cli.command()
@click.option("--index", "index_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--bind", default=None, help="host:port; defaults to BIND_ADDR or 127.0.0.1:8000.")
@click.option("--ui", "ui_dir", type=click.Path(exists=True, file_okay=False), default=None,
              help="Static frontend directory to mount at /.")
@click.option("--stub-llm", is_flag=True, help="Echo retrieved context instead of calling a model.")
def serve(index_dir: str, bind: Optional[str], ui_dir: Optional[str], stub_llm: bool) -> None:
    """Serve the HTTP API (and optionally a frontend) over a built index."""
    import os

    import uvicorn

    from .service import create_app

    kb = load_knowledge_base(index_dir)
    chat = resolve_chat_provider(stub=True) if stub_llm else None
    app = create_app(kb=kb, chat=chat, embedder=resolve_embedder(), ui_dir=ui_dir)

    addr = bind or os.environ.get("BIND_ADDR", "127.0.0.1:8000")
    host, _, port_text = addr.rpartition(":")
    if not host or not port_text.isdigit():
        raise InvalidParams(f"bind address must be host:port, got {addr!r}")
    click.echo(f"serving on http://{host}:{port_text}")
    uvicorn.run(app, host=host, port=int(port_text), log_level="warning")


def main(argv: Optional[list[str]] = None) -> int:
    """Entry point with package-error to exit-code mapping."""
    try:
        cli.main(args=argv, standalone_mode=False)
        return EXIT_OK
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.UsageError as exc:
        exc.show(file=sys.stderr)
        return EXIT_USAGE
    except click.Abort:
        return EXIT_USAGE
    except IncidentKbError as exc:
        click.echo(f"error: {exc}", err=True)
        return _exit_code(exc)


if __name__ == "__main__":
    sys.exit(main())
