"""Index construction and on-disk persistence.

A knowledge base bundles four pieces: a sparse term index (postings and
chunk lengths), a dense vector matrix, the chunk texts, and the record
store they came from. Persistence is a directory:

    manifest.json   format version, tokenizer and embedder ids, corpus
                    stats, sha256 over the payload files
    postings.bin    term postings and chunk lengths (little-endian)
    vectors.bin     float32 matrix, row = chunk id
    chunks.json     chunk texts with provenance
    store.json      canonical record array

Every payload byte is covered by the manifest checksum, and nothing
non-deterministic (timestamps, hostnames) is written, so rebuilding the
same corpus reproduces the directory byte for byte.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .chunking import Chunk
from .errors import (
    ChecksumMismatch,
    EmptyCorpus,
    IncompatibleVersion,
    StorageFailure,
)
from .providers import EmbeddingProvider
from .records import IncidentStore, canonical_mapping, record_from_mapping
from .tokens import TOKENIZER_ID, tokenize

INDEX_FORMAT_VERSION = 1
_PAYLOAD_FILES = ("postings.bin", "vectors.bin", "chunks.json", "store.json")
_EMBED_BATCH = 64


@dataclass
class SparseIndex:
    """Term postings over the chunk corpus."""

    postings: dict[str, dict[int, int]]  # term -> {chunk_id: term frequency}
    chunk_lengths: list[int]  # token count per chunk, indexed by chunk id

    @property
    def chunk_count(self) -> int:
        return len(self.chunk_lengths)

    @property
    def avg_chunk_length(self) -> float:
        if not self.chunk_lengths:
            return 0.0
        return sum(self.chunk_lengths) / len(self.chunk_lengths)

    def doc_freq(self, term: str) -> int:
        return len(self.postings.get(term, ()))


@dataclass
class VectorIndex:
    """Dense chunk embeddings; row index is the chunk id."""

    vectors: np.ndarray  # float32, shape (chunk_count, dimension)
    provider_id: str

    @property
    def dimension(self) -> int:
        return int(self.vectors.shape[1])


@dataclass
class KnowledgeBase:
    sparse: SparseIndex
    dense: VectorIndex
    chunks: list[Chunk]
    store: IncidentStore


def build_sparse_index(chunks: Sequence[Chunk]) -> SparseIndex:
    postings: dict[str, dict[int, int]] = {}
    lengths: list[int] = []
    for chunk in chunks:
        tokens = tokenize(chunk.text)
        lengths.append(len(tokens))
        for token in tokens:
            postings.setdefault(token, {})
            postings[token][chunk.chunk_id] = postings[token].get(chunk.chunk_id, 0) + 1
    return SparseIndex(postings=postings, chunk_lengths=lengths)


def build_knowledge_base(
    chunks: Sequence[Chunk], store: IncidentStore, embedder: EmbeddingProvider
) -> KnowledgeBase:
    """Index a chunk corpus. Chunk ids must already be dense and ordered."""
    if not chunks:
        raise EmptyCorpus("no chunks to index")
    for i, chunk in enumerate(chunks):
        if chunk.chunk_id != i:
            raise StorageFailure(f"chunk ids must be dense, found {chunk.chunk_id} at position {i}")
    sparse = build_sparse_index(chunks)
    rows = []
    for start in range(0, len(chunks), _EMBED_BATCH):
        batch = [c.text for c in chunks[start : start + _EMBED_BATCH]]
        rows.append(embedder.embed_many(batch))
    vectors = np.vstack(rows).astype(np.float32)
    dense = VectorIndex(vectors=vectors, provider_id=embedder.id)
    return KnowledgeBase(sparse=sparse, dense=dense, chunks=list(chunks), store=store)


# --- binary encoding ---------------------------------------------------------

def _encode_postings(sparse: SparseIndex) -> bytes:
    out = bytearray()
    out += struct.pack("<I", len(sparse.postings))
    for term in sorted(sparse.postings):
        term_bytes = term.encode("utf-8")
        entries = sorted(sparse.postings[term].items())
        out += struct.pack("<I", len(term_bytes))
        out += term_bytes
        out += struct.pack("<I", len(entries))
        for chunk_id, freq in entries:
            out += struct.pack("<II", chunk_id, freq)
    out += struct.pack("<I", len(sparse.chunk_lengths))
    for length in sparse.chunk_lengths:
        out += struct.pack("<I", length)
    return bytes(out)


def _decode_postings(blob: bytes) -> SparseIndex:
    view = memoryview(blob)
    pos = 0

    def read(fmt: str):
        nonlocal pos
        size = struct.calcsize(fmt)
        values = struct.unpack_from(fmt, view, pos)
        pos += size
        return values

    try:
        (term_count,) = read("<I")
        postings: dict[str, dict[int, int]] = {}
        for _ in range(term_count):
            (term_len,) = read("<I")
            term = bytes(view[pos : pos + term_len]).decode("utf-8")
            pos += term_len
            (entry_count,) = read("<I")
            entries: dict[int, int] = {}
            for _ in range(entry_count):
                chunk_id, freq = read("<II")
                entries[chunk_id] = freq
            postings[term] = entries
        (n_chunks,) = read("<I")
        lengths = [read("<I")[0] for _ in range(n_chunks)]
    except (struct.error, UnicodeDecodeError) as exc:
        raise StorageFailure(f"postings file is truncated or corrupt: {exc}") from exc
    return SparseIndex(postings=postings, chunk_lengths=lengths)


def _encode_vectors(dense: VectorIndex) -> bytes:
    n, dim = dense.vectors.shape
    header = struct.pack("<II", n, dim)
    body = np.ascontiguousarray(dense.vectors, dtype="<f4").tobytes()
    return header + body


def _decode_vectors(blob: bytes, provider_id: str) -> VectorIndex:
    try:
        n, dim = struct.unpack_from("<II", blob, 0)
        body = np.frombuffer(blob, dtype="<f4", offset=8)
        matrix = body.reshape(n, dim).copy()
    except (struct.error, ValueError) as exc:
        raise StorageFailure(f"vectors file is truncated or corrupt: {exc}") from exc
    return VectorIndex(vectors=matrix, provider_id=provider_id)


def _encode_chunks(chunks: Sequence[Chunk]) -> str:
    docs = [
        {
            "chunk_id": c.chunk_id,
            "record_keys": list(c.record_keys),
            "text": c.text,
            "token_count": c.token_count,
            "start_token": c.start_token,
        }
        for c in chunks
    ]
    return json.dumps(docs, ensure_ascii=False, indent=2) + "\n"


def _decode_chunks(text: str) -> list[Chunk]:
    try:
        docs = json.loads(text)
    except json.JSONDecodeError as exc:
        raise StorageFailure(f"chunks file is not valid JSON: {exc}") from exc
    return [
        Chunk(
            chunk_id=d["chunk_id"],
            record_keys=tuple(d["record_keys"]),
            text=d["text"],
            token_count=d["token_count"],
            start_token=d["start_token"],
        )
        for d in docs
    ]


def _checksum(payloads: dict[str, bytes]) -> str:
    digest = hashlib.sha256()
    for name in _PAYLOAD_FILES:
        digest.update(name.encode("utf-8"))
        digest.update(struct.pack("<Q", len(payloads[name])))
        digest.update(payloads[name])
    return digest.hexdigest()


def save_knowledge_base(kb: KnowledgeBase, path: str | Path) -> None:
    directory = Path(path)
    store_text = json.dumps(
        [canonical_mapping(r) for r in kb.store], ensure_ascii=False, indent=2
    ) + "\n"
    payloads = {
        "postings.bin": _encode_postings(kb.sparse),
        "vectors.bin": _encode_vectors(kb.dense),
        "chunks.json": _encode_chunks(kb.chunks).encode("utf-8"),
        "store.json": store_text.encode("utf-8"),
    }
    manifest = {
        "format_version": INDEX_FORMAT_VERSION,
        "tokenizer": TOKENIZER_ID,
        "embedding_provider": kb.dense.provider_id,
        "dimension": kb.dense.dimension,
        "chunk_count": kb.sparse.chunk_count,
        "avg_chunk_length": kb.sparse.avg_chunk_length,
        "record_count": len(kb.store),
        "checksum": _checksum(payloads),
    }
    try:
        directory.mkdir(parents=True, exist_ok=True)
        for name, blob in payloads.items():
            (directory / name).write_bytes(blob)
        (directory / "manifest.json").write_text(
            json.dumps(manifest, indent=2) + "\n", encoding="utf-8"
        )
    except OSError as exc:
        raise StorageFailure(f"cannot write index directory: {exc}") from exc


def load_knowledge_base(path: str | Path) -> KnowledgeBase:
    directory = Path(path)
    try:
        manifest = json.loads((directory / "manifest.json").read_text(encoding="utf-8"))
        payloads = {name: (directory / name).read_bytes() for name in _PAYLOAD_FILES}
    except OSError as exc:
        raise StorageFailure(f"cannot read index directory: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise StorageFailure(f"manifest is not valid JSON: {exc}") from exc

    version = manifest.get("format_version")
    if version != INDEX_FORMAT_VERSION:
        raise IncompatibleVersion(f"index format {version!r}, supported {INDEX_FORMAT_VERSION}")
    actual = _checksum(payloads)
    if actual != manifest.get("checksum"):
        raise ChecksumMismatch(
            f"index payload checksum {actual[:12]}... does not match manifest"
        )

    sparse = _decode_postings(payloads["postings.bin"])
    dense = _decode_vectors(payloads["vectors.bin"], manifest.get("embedding_provider", "unknown"))
    chunks = _decode_chunks(payloads["chunks.json"].decode("utf-8"))

    store = IncidentStore()
    docs = json.loads(payloads["store.json"].decode("utf-8"))
    for doc in docs:
        store.add(record_from_mapping(doc))
    store.seal()

    if dense.vectors.shape[0] != sparse.chunk_count or len(chunks) != sparse.chunk_count:
        raise StorageFailure("index parts disagree on chunk count")
    return KnowledgeBase(sparse=sparse, dense=dense, chunks=chunks, store=store)
