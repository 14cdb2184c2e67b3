"""Answer generation over retrieved context.

Retrieved chunks are packed greedily, in rank order, into batches that
respect a context token budget. Each batch yields a draft answer at
temperature zero; when more than one batch was needed, a consolidation
pass merges the drafts into the final answer. Draft calls may run
concurrently, consolidation always runs after all of them.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .assets import load_template
from .chunking import Chunk
from .errors import ChunkExceedsBudget, EmptyInput, InvalidParams
from .indexes import KnowledgeBase
from .providers import ChatProvider, EmbeddingProvider
from .retrieval import RetrievalConfig, ScoredChunk, retrieve

DEFAULT_TOKEN_BUDGET = 6000


@dataclass
class ContextBatch:
    chunks: list[Chunk]
    token_count: int


def assemble_batches(chunks: Sequence[Chunk], budget: int = DEFAULT_TOKEN_BUDGET) -> list[ContextBatch]:
    """Pack chunks into budget-bounded batches, preserving order.

    Greedy first-fit in the order given: a chunk that no longer fits
    closes the current batch and opens the next. A single chunk larger
    than the whole budget can never be placed and is an error.
    """
    if budget <= 0:
        raise InvalidParams(f"token budget must be positive, got {budget}")
    batches: list[ContextBatch] = []
    current: list[Chunk] = []
    used = 0
    for chunk in chunks:
        if chunk.token_count > budget:
            raise ChunkExceedsBudget(
                f"chunk {chunk.chunk_id} has {chunk.token_count} tokens, budget is {budget}"
            )
        if current and used + chunk.token_count > budget:
            batches.append(ContextBatch(chunks=current, token_count=used))
            current = []
            used = 0
        current.append(chunk)
        used += chunk.token_count
    if current:
        batches.append(ContextBatch(chunks=current, token_count=used))
    return batches


def _fill(template: str, context: str, question: str) -> str:
    return template.replace("{context}", context).replace("{question}", question)


def build_qa_prompt(question: str, batch: ContextBatch) -> str:
    context = "\n\n".join(chunk.text for chunk in batch.chunks)
    template = load_template("qa").replace("{example}", load_template("example_answer").strip())
    return _fill(template, context, question)


def build_consolidation_prompt(question: str, drafts: Sequence[str]) -> str:
    context = "\n\n".join(draft.strip() for draft in drafts)
    return _fill(load_template("consolidation"), context, question)


@dataclass
class AnswerResult:
    question: str
    answer: str
    cited_keys: list[str]  # record keys behind the context, retrieval order
    batch_count: int
    provider_id: str
    retrieved: list[ScoredChunk] = field(default_factory=list)


def generate_answer(
    question: str,
    kb: KnowledgeBase,
    chat: ChatProvider,
    embedder: EmbeddingProvider,
    cfg: Optional[RetrievalConfig] = None,
    budget: int = DEFAULT_TOKEN_BUDGET,
    max_workers: int = 4,
) -> AnswerResult:
    """Full question-to-answer path: retrieve, batch, draft, consolidate."""
    if not question.strip():
        raise EmptyInput("question is empty")
    scored = retrieve(question, kb, embedder, cfg)
    ranked_chunks = [kb.chunks[s.chunk_id] for s in scored]
    batches = assemble_batches(ranked_chunks, budget)

    prompts = [build_qa_prompt(question, batch) for batch in batches]
    if len(prompts) == 1:
        drafts = [chat.complete(prompts[0], temperature=0.0)]
    else:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            drafts = list(pool.map(lambda p: chat.complete(p, temperature=0.0), prompts))

    if len(drafts) == 1:
        answer = drafts[0].strip()
    else:
        answer = chat.complete(build_consolidation_prompt(question, drafts), temperature=0.0).strip()

    cited: list[str] = []
    for chunk in ranked_chunks:
        for key in chunk.record_keys:
            if key not in cited:
                cited.append(key)
    return AnswerResult(
        question=question,
        answer=answer,
        cited_keys=cited,
        batch_count=len(batches),
        provider_id=chat.id,
        retrieved=scored,
    )
