"""HTTP facade over a built knowledge base.

Routes:
    GET  /healthz        liveness probe, plain "ok"
    POST /api/query      retrieval-augmented answer for one question
    GET  /api/incidents  filterable incident listing
    GET  /api/stats      corpus breakdowns for dashboards

Errors come back as {"error": <slug>, "detail": <message>} with a status
that reflects the failure family: 400 bad request, 404 empty retrieval,
502 provider trouble, 503 service not ready.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, PlainTextResponse
from pydantic import BaseModel

from .answering import DEFAULT_TOKEN_BUDGET, generate_answer
from .errors import (
    EmptyIndex,
    EmptyInput,
    EmptyRetrieval,
    IncidentKbError,
    InvalidParams,
    ProviderUnavailable,
    UnparseableProviderOutput,
    UnrecognizedLabel,
)
from .indexes import KnowledgeBase
from .providers import ChatProvider, EmbeddingProvider, resolve_chat_provider, resolve_embedder
from .records import IncidentRecord, TransportMode, canonical_mapping, parse_mode
from .retrieval import RetrievalConfig

_DEFAULT_PAGE = 50
_MAX_PAGE = 500

_STATUS_BY_ERROR = [
    (EmptyRetrieval, 404, "empty_retrieval"),
    (UnparseableProviderOutput, 502, "unparseable_provider_output"),
    (ProviderUnavailable, 502, "provider_unavailable"),
    (InvalidParams, 400, "invalid_params"),
    (UnrecognizedLabel, 400, "invalid_params"),
    (EmptyInput, 400, "empty_input"),
    (EmptyIndex, 503, "not_ready"),
]


class QueryBody(BaseModel):
    question: str
    alpha: Optional[float] = None
    k: Optional[int] = None


@dataclass
class ServiceState:
    kb: Optional[KnowledgeBase] = None
    chat: Optional[ChatProvider] = None
    embedder: Optional[EmbeddingProvider] = None
    cfg: RetrievalConfig = None  # type: ignore[assignment]
    budget: int = DEFAULT_TOKEN_BUDGET

    def __post_init__(self) -> None:
        if self.cfg is None:
            self.cfg = RetrievalConfig()


def _error_response(status: int, slug: str, detail: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": slug, "detail": detail})


def _matches_text(record: IncidentRecord, needle: str) -> bool:
    hay = [record.attack_name, record.description, record.incident_type or "", record.motive or ""]
    for actor in (record.victim, record.attacker):
        if actor:
            hay.extend([actor.name, actor.country or "", actor.category or ""])
    needle = needle.lower()
    return any(needle in part.lower() for part in hay if part)


def create_app(
    kb: Optional[KnowledgeBase] = None,
    chat: Optional[ChatProvider] = None,
    embedder: Optional[EmbeddingProvider] = None,
    cfg: Optional[RetrievalConfig] = None,
    budget: int = DEFAULT_TOKEN_BUDGET,
    ui_dir: Optional[str] = None,
) -> FastAPI:
    """Build the service; kb=None yields a 503-for-everything shell.

    chat/embedder default from the environment at first use so an app can
    be constructed before credentials exist.
    """
    state = ServiceState(kb=kb, chat=chat, embedder=embedder, cfg=cfg or RetrievalConfig(), budget=budget)
    app = FastAPI(title="incidentkb", docs_url=None, redoc_url=None)

    @app.exception_handler(RequestValidationError)
    async def _validation_error(request: Request, exc: RequestValidationError):
        return _error_response(400, "invalid_request", str(exc.errors()[:3]))

    @app.exception_handler(IncidentKbError)
    async def _package_error(request: Request, exc: IncidentKbError):
        for err_type, status, slug in _STATUS_BY_ERROR:
            if isinstance(exc, err_type):
                return _error_response(status, slug, str(exc))
        return _error_response(500, "internal_error", str(exc))

    @app.get("/healthz", response_class=PlainTextResponse)
    async def healthz() -> str:
        return "ok"

    @app.post("/api/query")
    async def query(body: QueryBody):
        if state.kb is None:
            return _error_response(503, "not_ready", "no index loaded")
        if not body.question.strip():
            return _error_response(400, "empty_input", "question is empty")
        overrides = {}
        if body.alpha is not None:
            overrides["alpha"] = body.alpha
        if body.k is not None:
            overrides["k"] = body.k
        cfg_used = replace(state.cfg, **overrides) if overrides else state.cfg
        if state.chat is None:
            state.chat = resolve_chat_provider()
        if state.embedder is None:
            state.embedder = resolve_embedder()
        result = generate_answer(
            body.question, state.kb, state.chat, state.embedder, cfg_used, state.budget
        )
        return {
            "question": result.question,
            "answer": result.answer,
            "cited_keys": result.cited_keys,
            "batch_count": result.batch_count,
            "results": [
                {
                    "rank": s.rank,
                    "chunk_id": s.chunk_id,
                    "dense": s.dense,
                    "sparse": s.sparse,
                    "hybrid": s.hybrid,
                    "record_keys": list(state.kb.chunks[s.chunk_id].record_keys),
                }
                for s in result.retrieved
            ],
        }

    @app.get("/api/incidents")
    async def incidents(
        mode: Optional[str] = None,
        year_from: Optional[int] = None,
        year_to: Optional[int] = None,
        source: Optional[str] = None,
        q: Optional[str] = None,
        offset: int = 0,
        limit: int = _DEFAULT_PAGE,
    ):
        if state.kb is None:
            return _error_response(503, "not_ready", "no index loaded")
        if offset < 0 or limit < 1:
            return _error_response(400, "invalid_params", "offset must be >= 0 and limit >= 1")
        limit = min(limit, _MAX_PAGE)

        records = list(state.kb.store)
        if mode is not None:
            wanted = parse_mode(mode)  # UnrecognizedLabel -> 400 via handler
            records = [r for r in records if r.mode is wanted]
        if source is not None:
            records = [r for r in records if r.source_dataset == source]
        if year_from is not None or year_to is not None:
            def year_ok(r: IncidentRecord) -> bool:
                if not r.date_iso:
                    return False
                year = int(r.date_iso[:4])
                if year_from is not None and year < year_from:
                    return False
                if year_to is not None and year > year_to:
                    return False
                return True

            records = [r for r in records if year_ok(r)]
        if q:
            records = [r for r in records if _matches_text(r, q)]

        # newest first, undated last; ties stay in key order (stable sorts)
        records.sort(key=lambda r: r.key)
        records.sort(key=lambda r: r.date_iso or "", reverse=True)

        page = records[offset : offset + limit]
        return {
            "total": len(records),
            "offset": offset,
            "limit": limit,
            "items": [canonical_mapping(r) for r in page],
        }

    @app.get("/api/stats")
    async def stats():
        if state.kb is None:
            return _error_response(503, "not_ready", "no index loaded")
        by_mode: dict[str, int] = {}
        by_source: dict[str, int] = {}
        by_year: dict[str, int] = {}
        duplicates = 0
        for record in state.kb.store:
            label = record.mode.value if record.mode is not TransportMode.NONE else "None"
            by_mode[label] = by_mode.get(label, 0) + 1
            by_source[record.source_dataset] = by_source.get(record.source_dataset, 0) + 1
            year = record.date_iso[:4] if record.date_iso else "unknown"
            by_year[year] = by_year.get(year, 0) + 1
            if record.duplicate_of:
                duplicates += 1
        return {
            "total": len(state.kb.store),
            "by_mode": dict(sorted(by_mode.items())),
            "by_source": dict(sorted(by_source.items())),
            "by_year": dict(sorted(by_year.items())),
            "duplicates": duplicates,
            "chunks": state.kb.sparse.chunk_count,
            "embedding_provider": state.kb.dense.provider_id,
        }

    if ui_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
