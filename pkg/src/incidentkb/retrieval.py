"""Hybrid retrieval: dense cosine similarity fused with BM25.

Both signals are computed for the union of each signal's top candidates,
combined as alpha * dense + (1 - alpha) * sparse, and re-ranked. Ties
break on ascending chunk id so rankings are fully deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyIndex,
    EmptyRetrieval,
    InvalidParams,
    UnknownChunk,
)
from .indexes import KnowledgeBase, SparseIndex
from .providers import EmbeddingProvider, embed
from .tokens import tokenize

DEFAULT_ALPHA = 0.5
DEFAULT_TOP_K = 5
DEFAULT_K1 = 1.5
DEFAULT_B = 0.75


@dataclass
class RetrievalConfig:
    alpha: float = DEFAULT_ALPHA  # 1.0 = dense only, 0.0 = sparse only
    k: int = DEFAULT_TOP_K
    k1: float = DEFAULT_K1
    b: float = DEFAULT_B
    normalize_scores: bool = False  # min-max both signals over the candidate union

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise InvalidParams(f"alpha must be in [0, 1], got {self.alpha}")
        if self.k < 1:
            raise InvalidParams(f"k must be at least 1, got {self.k}")
        if self.k1 < 0.0:
            raise InvalidParams(f"k1 must be non-negative, got {self.k1}")
        if not 0.0 <= self.b <= 1.0:
            raise InvalidParams(f"b must be in [0, 1], got {self.b}")


@dataclass
class ScoredChunk:
    chunk_id: int
    dense: float
    sparse: float
    hybrid: float
    rank: int  # 1-based


def cosine(q: np.ndarray, c: np.ndarray) -> float:
    """Cosine similarity; zero vectors score 0 rather than dividing by zero."""
    q = np.asarray(q, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    if q.shape != c.shape:
        raise DimensionMismatch(f"vector shapes differ: {q.shape} vs {c.shape}")
    qn = np.linalg.norm(q)
    cn = np.linalg.norm(c)
    if qn == 0.0 or cn == 0.0:
        return 0.0
    return float(np.dot(q, c) / (qn * cn))


def idf(term: str, sparse: SparseIndex) -> float:
    """Smoothed inverse document frequency, natural log, always positive."""
    n_t = sparse.doc_freq(term)
    n = sparse.chunk_count
    return math.log((n - n_t + 0.5) / (n_t + 0.5) + 1.0)


def bm25(
    query_tokens: Sequence[str],
    chunk_id: int,
    sparse: SparseIndex,
    k1: float = DEFAULT_K1,
    b: float = DEFAULT_B,
) -> float:
    """BM25 score of one chunk for a token sequence.

    Each query token occurrence contributes, so repeated tokens weigh
    double exactly as they would in the summation form.
    """
    if not 0 <= chunk_id < sparse.chunk_count:
        raise UnknownChunk(f"chunk id {chunk_id} outside [0, {sparse.chunk_count})")
    length = sparse.chunk_lengths[chunk_id]
    avg = sparse.avg_chunk_length
    score = 0.0
    for term in query_tokens:
        freq = sparse.postings.get(term, {}).get(chunk_id, 0)
        if freq == 0:
            continue
        norm = freq + k1 * (1.0 - b + b * length / avg)
        score += idf(term, sparse) * freq * (k1 + 1.0) / norm
    return score


def hybrid_score(dense: float, sparse: float, alpha: float) -> float:
    return alpha * dense + (1.0 - alpha) * sparse


def _sparse_scores(
    query_tokens: Sequence[str], sparse: SparseIndex, k1: float, b: float
) -> dict[int, float]:
    """BM25 for every chunk containing at least one query token."""
    avg = sparse.avg_chunk_length
    scores: dict[int, float] = {}
    for term in query_tokens:
        entries = sparse.postings.get(term)
        if not entries:
            continue
        term_idf = idf(term, sparse)
        for chunk_id, freq in entries.items():
            length = sparse.chunk_lengths[chunk_id]
            norm = freq + k1 * (1.0 - b + b * length / avg)
            scores[chunk_id] = scores.get(chunk_id, 0.0) + term_idf * freq * (k1 + 1.0) / norm
    return scores


def _top_ids(scores: dict[int, float], k: int) -> list[int]:
    positive = [(chunk_id, score) for chunk_id, score in scores.items() if score > 0.0]
    positive.sort(key=lambda pair: (-pair[1], pair[0]))
    return [chunk_id for chunk_id, _ in positive[:k]]


def _min_max(values: dict[int, float]) -> dict[int, float]:
    lo = min(values.values())
    hi = max(values.values())
    if hi == lo:
        return {chunk_id: 0.0 for chunk_id in values}
    return {chunk_id: (v - lo) / (hi - lo) for chunk_id, v in values.items()}


def retrieve(
    query: str,
    kb: KnowledgeBase,
    embedder: EmbeddingProvider,
    cfg: Optional[RetrievalConfig] = None,
) -> list[ScoredChunk]:
    """Top-k chunks for a query under the hybrid score.

    Candidates are the union of each signal's positive-scoring top k;
    both signals are then computed for every union member, optionally
    min-max normalized over the union, fused, and re-ranked.
    """
    cfg = cfg or RetrievalConfig()
    if kb.sparse.chunk_count == 0:
        raise EmptyIndex("the index holds no chunks")

    query_tokens = tokenize(query)
    query_vec = embed(query, embedder)
    if query_vec.shape[0] != kb.dense.dimension:
        raise DimensionMismatch(
            f"query embedding has {query_vec.shape[0]} dims, index has {kb.dense.dimension}"
        )

    dense_all = {
        chunk_id: cosine(query_vec, kb.dense.vectors[chunk_id])
        for chunk_id in range(kb.sparse.chunk_count)
    }
    sparse_all = _sparse_scores(query_tokens, kb.sparse, cfg.k1, cfg.b)

    union = sorted(set(_top_ids(dense_all, cfg.k)) | set(_top_ids(sparse_all, cfg.k)))
    if not union:
        raise EmptyRetrieval(f"no chunk scored above zero for {query!r}")

    dense_u = {chunk_id: dense_all.get(chunk_id, 0.0) for chunk_id in union}
    sparse_u = {chunk_id: sparse_all.get(chunk_id, 0.0) for chunk_id in union}
    if cfg.normalize_scores:
        dense_u = _min_max(dense_u)
        sparse_u = _min_max(sparse_u)

    fused = [
        (hybrid_score(dense_u[chunk_id], sparse_u[chunk_id], cfg.alpha), chunk_id)
        for chunk_id in union
    ]
    fused.sort(key=lambda pair: (-pair[0], pair[1]))
    return [
        ScoredChunk(
            chunk_id=chunk_id,
            dense=dense_u[chunk_id],
            sparse=sparse_u[chunk_id],
            hybrid=score,
            rank=rank,
        )
        for rank, (score, chunk_id) in enumerate(fused[: cfg.k], start=1)
    ]
