"""Hybrid retrieval scoring: cosine, BM25 (against a brute-force oracle), fusion."""

import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from incidentkb.chunking import Chunk
from incidentkb.errors import (
    DimensionMismatch,
    EmptyIndex,
    EmptyRetrieval,
    InvalidParams,
    UnknownChunk,
)
from incidentkb.indexes import KnowledgeBase, VectorIndex, build_knowledge_base, build_sparse_index
from incidentkb.providers import HashedTfEmbedder
from incidentkb.records import IncidentStore
from incidentkb.retrieval import (
    RetrievalConfig,
    bm25,
    cosine,
    hybrid_score,
    idf,
    retrieve,
)
from incidentkb.tokens import tokenize

# --- independent oracle -------------------------------------------------------


def oracle_bm25(query_tokens, docs_tokens, doc_index, k1=1.5, b=0.75):
    """Straight transcription of the scoring formula over raw token lists."""
    n_docs = len(docs_tokens)
    doc = docs_tokens[doc_index]
    avg_len = sum(len(d) for d in docs_tokens) / n_docs
    score = 0.0
    for term in query_tokens:
        freq = doc.count(term)
        if freq == 0:
            continue
        containing = sum(1 for d in docs_tokens if term in d)
        term_idf = math.log((n_docs - containing + 0.5) / (containing + 0.5) + 1.0)
        score += term_idf * (freq * (k1 + 1.0)) / (freq + k1 * (1.0 - b + b * len(doc) / avg_len))
    return score


def make_chunks(texts):
    return [
        Chunk(chunk_id=i, record_keys=(f"s:{i}",), text=t, token_count=len(tokenize(t)), start_token=0)
        for i, t in enumerate(texts)
    ]


def make_kb(texts, embedder=None):
    embedder = embedder or HashedTfEmbedder()
    store = IncidentStore().seal()
    chunks = make_chunks(texts)
    sparse = build_sparse_index(chunks)
    vectors = embedder.embed_many(texts)
    dense = VectorIndex(vectors=np.asarray(vectors, dtype=np.float32), provider_id=embedder.id)
    return KnowledgeBase(sparse=sparse, dense=dense, chunks=chunks, store=store)


class ZeroEmbedder:
    """Embeds everything to the zero vector; exercises no-signal paths."""

    def __init__(self, dimension=8):
        self.dimension = dimension
        self.id = f"zero-{dimension}"

    def embed_many(self, texts):
        return np.zeros((len(texts), self.dimension), dtype=np.float32)


# --- cosine -------------------------------------------------------------------


def test_cosine_known_values():
    assert cosine(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == pytest.approx(0.0)
    assert cosine(np.array([1.0, 0.0]), np.array([1.0, 0.0])) == pytest.approx(1.0)
    assert cosine(np.array([1.0, 1.0]), np.array([1.0, 0.0])) == pytest.approx(math.sqrt(0.5))
    assert cosine(np.array([1.0, 0.0]), np.array([-1.0, 0.0])) == pytest.approx(-1.0)


def test_cosine_zero_vector_scores_zero():
    assert cosine(np.zeros(4), np.ones(4)) == 0.0


def test_cosine_shape_mismatch():
    with pytest.raises(DimensionMismatch):
        cosine(np.ones(3), np.ones(4))


@settings(max_examples=80, deadline=None)
@given(
    values=st.lists(
        st.floats(min_value=-100, max_value=100, allow_nan=False), min_size=2, max_size=16
    ),
    scale=st.floats(min_value=0.01, max_value=50),
)
def test_cosine_symmetric_bounded_scale_invariant(values, scale):
    mid = len(values) // 2
    q = np.array(values[:mid] + [1.0])
    c = np.array(values[mid:] + [1.0])
    if len(q) != len(c):
        c = np.resize(c, len(q))
    sim = cosine(q, c)
    assert -1.0 - 1e-9 <= sim <= 1.0 + 1e-9
    assert cosine(c, q) == pytest.approx(sim)
    assert cosine(q * scale, c) == pytest.approx(sim, abs=1e-9)


# --- idf / bm25 ---------------------------------------------------------------


def test_idf_known_values():
    sparse = build_sparse_index(
        make_chunks(["cargo ship", "cargo train", "road traffic"])
    )
    # 3 chunks, term in 2 of them: ln((3 - 2 + 0.5) / (2 + 0.5) + 1) = ln(1.6)
    assert idf("cargo", sparse) == pytest.approx(math.log(1.6), abs=1e-12)
    # term in 1 of 3: ln((3 - 1 + 0.5) / 1.5 + 1) = ln(8/3)
    assert idf("road", sparse) == pytest.approx(math.log(8 / 3), abs=1e-12)
    single = build_sparse_index(make_chunks(["cargo"]))
    # 1 chunk, term in it: ln((0.5 / 1.5) + 1) = ln(4/3)
    assert idf("cargo", single) == pytest.approx(math.log(4 / 3), abs=1e-12)
    # unseen term gets the full-range value, still positive
    assert idf("zeppelin", sparse) == pytest.approx(math.log(3.5 / 0.5 + 1), abs=1e-12)
    assert idf("zeppelin", sparse) > 0


def test_bm25_matches_oracle_on_random_corpora():
    rng = random.Random(1109)
    vocab = [f"tok{i}" for i in range(40)]
    for _ in range(25):
        texts = [
            " ".join(rng.choices(vocab, k=rng.randint(3, 60)))
            for _ in range(rng.randint(2, 30))
        ]
        docs_tokens = [tokenize(t) for t in texts]
        sparse = build_sparse_index(make_chunks(texts))
        for _ in range(4):
            query = rng.choices(vocab, k=rng.randint(1, 6))
            for doc_index in range(len(texts)):
                expected = oracle_bm25(query, docs_tokens, doc_index)
                assert bm25(query, doc_index, sparse) == pytest.approx(expected, abs=1e-9)


def test_bm25_repeated_query_token_counts_twice():
    sparse = build_sparse_index(make_chunks(["cargo ship cargo", "road"]))
    once = bm25(["cargo"], 0, sparse)
    twice = bm25(["cargo", "cargo"], 0, sparse)
    assert twice == pytest.approx(2 * once)


def test_bm25_unknown_chunk_id():
    sparse = build_sparse_index(make_chunks(["cargo"]))
    with pytest.raises(UnknownChunk):
        bm25(["cargo"], 5, sparse)
    with pytest.raises(UnknownChunk):
        bm25(["cargo"], -1, sparse)


def test_bm25_no_overlap_scores_zero():
    sparse = build_sparse_index(make_chunks(["cargo ship", "road"]))
    assert bm25(["zeppelin"], 0, sparse) == 0.0


# --- config / fusion ----------------------------------------------------------


def test_config_validation():
    RetrievalConfig()  # defaults are legal
    with pytest.raises(InvalidParams):
        RetrievalConfig(alpha=1.5)
    with pytest.raises(InvalidParams):
        RetrievalConfig(alpha=-0.1)
    with pytest.raises(InvalidParams):
        RetrievalConfig(k=0)
    with pytest.raises(InvalidParams):
        RetrievalConfig(k1=-0.5)
    with pytest.raises(InvalidParams):
        RetrievalConfig(b=1.2)


def test_hybrid_score_blend():
    assert hybrid_score(0.8, 0.4, 1.0) == pytest.approx(0.8)
    assert hybrid_score(0.8, 0.4, 0.0) == pytest.approx(0.4)
    assert hybrid_score(0.8, 0.4, 0.5) == pytest.approx(0.6)


CORPUS = [
    "the airline reservation system went down after a breach",
    "a ransomware crew encrypted the port terminal database",
    "railway signalling was disrupted across the metro network",
    "the trucking company lost its dispatch system for a week",
    "attackers leaked documents from the shipping line headquarters",
    "a university email server was compromised by phishing",
]


def test_retrieve_ranks_relevant_chunk_first():
    kb = make_kb(CORPUS)
    results = retrieve("who encrypted the port terminal", kb, HashedTfEmbedder())
    assert results[0].chunk_id == 1
    assert results[0].rank == 1
    assert [r.rank for r in results] == list(range(1, len(results) + 1))
    # hybrid really is the configured blend of the two signals
    for r in results:
        assert r.hybrid == pytest.approx(hybrid_score(r.dense, r.sparse, 0.5))
    # ranking is by descending hybrid score
    assert all(a.hybrid >= b.hybrid for a, b in zip(results, results[1:]))


def test_retrieve_alpha_one_is_dense_ordering():
    kb = make_kb(CORPUS)
    embedder = HashedTfEmbedder()
    query = "port terminal ransomware"
    results = retrieve(query, kb, embedder, RetrievalConfig(alpha=1.0, k=4))
    qv = embedder.embed_many([query])[0]
    dense = {i: cosine(qv, kb.dense.vectors[i]) for i in range(len(CORPUS))}
    for r in results:
        assert r.hybrid == pytest.approx(r.dense)
        assert r.dense == pytest.approx(dense[r.chunk_id])
    # order must match sorting the union by the dense signal alone
    expected = sorted(results, key=lambda r: (-dense[r.chunk_id], r.chunk_id))
    assert [r.chunk_id for r in results] == [r.chunk_id for r in expected]


def test_retrieve_alpha_zero_is_sparse_ordering():
    kb = make_kb(CORPUS)
    query = "port terminal ransomware"
    results = retrieve(query, kb, HashedTfEmbedder(), RetrievalConfig(alpha=0.0, k=4))
    tokens = tokenize(query)
    for r in results:
        assert r.hybrid == pytest.approx(r.sparse)
        assert r.sparse == pytest.approx(bm25(tokens, r.chunk_id, kb.sparse))
    scores = [r.sparse for r in results]
    assert scores == sorted(scores, reverse=True)


def test_retrieve_breaks_score_ties_on_ascending_chunk_id():
    kb = make_kb(["identical text here", "identical text here", "identical text here"])
    results = retrieve("identical text", kb, HashedTfEmbedder(), RetrievalConfig(k=3))
    assert [r.chunk_id for r in results] == [0, 1, 2]
    assert results[0].hybrid == pytest.approx(results[1].hybrid)


def test_retrieve_k_limits_results():
    kb = make_kb(CORPUS)
    results = retrieve("system breach network", kb, HashedTfEmbedder(), RetrievalConfig(k=2))
    assert len(results) == 2


def test_retrieve_candidates_come_from_both_signals():
    # Doc 0 shares no token with the query (so sparse ignores it) but the
    # query tokens hash into buckets that overlap doc 0's, so dense may rank
    # it. Conversely doc 1 shares a rare token. Union must include the
    # sparse hit even when the embedder is blind to it.
    kb = make_kb(["alpha bravo charlie", "zygomatic arch"], embedder=HashedTfEmbedder())
    results = retrieve("zygomatic", kb, HashedTfEmbedder(), RetrievalConfig(k=2))
    assert any(r.chunk_id == 1 for r in results)
    top = next(r for r in results if r.chunk_id == 1)
    assert top.rank == 1
    assert top.sparse > 0


def test_retrieve_normalization_rescales_union_to_unit_range():
    kb = make_kb(CORPUS)
    cfg = RetrievalConfig(normalize_scores=True)
    results = retrieve("the system was compromised by a crew", kb, HashedTfEmbedder(), cfg)
    assert len(results) == 5  # wide query: the union is most of the corpus
    dense_vals = [r.dense for r in results]
    sparse_vals = [r.sparse for r in results]
    assert all(-1e-9 <= v <= 1.0 + 1e-9 for v in dense_vals + sparse_vals)
    # min-max puts each signal's union extremes at exactly 1 and 0
    assert max(dense_vals) == pytest.approx(1.0)
    assert min(dense_vals) == pytest.approx(0.0)
    assert max(sparse_vals) == pytest.approx(1.0)
    # normalized scores still fuse through the same blend
    for r in results:
        assert r.hybrid == pytest.approx(hybrid_score(r.dense, r.sparse, 0.5))


def test_retrieve_single_candidate_normalization_is_degenerate():
    kb = make_kb(CORPUS)
    cfg = RetrievalConfig(normalize_scores=True)
    # exactly one chunk scores positive on either signal -> union of one,
    # whose min-max range collapses to zero by definition
    results = retrieve("port terminal ransomware attack", kb, HashedTfEmbedder(), cfg)
    assert [r.chunk_id for r in results] == [1]
    assert results[0].hybrid == 0.0


def test_retrieve_normalization_degenerate_range_scores_zero():
    kb = make_kb(["same words", "same words"])
    cfg = RetrievalConfig(normalize_scores=True, k=2)
    results = retrieve("same words", kb, HashedTfEmbedder(), cfg)
    assert all(r.hybrid == 0.0 for r in results)
    assert [r.chunk_id for r in results] == [0, 1]  # order still deterministic


def test_retrieve_empty_index():
    store = IncidentStore().seal()
    kb = KnowledgeBase(
        sparse=build_sparse_index([]),
        dense=VectorIndex(vectors=np.zeros((0, 8), dtype=np.float32), provider_id="x"),
        chunks=[],
        store=store,
    )
    with pytest.raises(EmptyIndex):
        retrieve("anything", kb, HashedTfEmbedder(8))


def test_retrieve_no_positive_signal_raises():
    kb = make_kb(["alpha bravo", "charlie delta"], embedder=ZeroEmbedder())
    with pytest.raises(EmptyRetrieval):
        retrieve("zeppelin", kb, ZeroEmbedder())


def test_retrieve_dimension_mismatch():
    kb = make_kb(CORPUS, embedder=HashedTfEmbedder(64))
    with pytest.raises(DimensionMismatch):
        retrieve("port", kb, HashedTfEmbedder(32))


def test_retrieve_via_build_knowledge_base_matches_manual_assembly():
    store = IncidentStore().seal()
    chunks = make_chunks(CORPUS)
    kb = build_knowledge_base(chunks, store, HashedTfEmbedder())
    manual = make_kb(CORPUS)
    q = "railway signalling disruption"
    got = retrieve(q, kb, HashedTfEmbedder())
    want = retrieve(q, manual, HashedTfEmbedder())
    assert [(r.chunk_id, r.hybrid) for r in got] == [(r.chunk_id, r.hybrid) for r in want]
