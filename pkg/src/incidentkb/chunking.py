"""Turn stored records into retrievable text chunks.

Records render to labeled plain-text lines (field label, colon, value) in
canonical field order. Rendered documents are cut into fixed-size token
windows with overlap; window starts advance by stride = size - overlap
and windowing stops once a window reaches the end of the document.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InvalidParams
from .records import ActorRef, IncidentRecord, IncidentStore, TransportMode
from .tokens import token_spans

DEFAULT_CHUNK_SIZE = 768
DEFAULT_CHUNK_OVERLAP = 100


@dataclass
class Chunk:
    chunk_id: int  # dense, 0-based position in the corpus
    record_keys: tuple[str, ...]
    text: str
    token_count: int
    start_token: int  # offset of the window inside its source document


def _actor_line(actor: ActorRef) -> str:
    details = [p for p in (actor.country, actor.category) if p]
    if details:
        return f"{actor.name} ({', '.join(details)})"
    return actor.name


def render_record_text(record: IncidentRecord) -> str:
    """One labeled line per populated field, canonical order, no plumbing."""
    lines = [f"attack_name: {record.attack_name}"]
    if record.incident_type:
        lines.append(f"incident_type: {record.incident_type}")
    lines.append(f"description: {record.description}")
    if record.date:
        lines.append(f"Date: {record.date}")
    if record.detection:
        lines.append(f"detection: {record.detection}")
    if record.victim and record.victim.name:
        lines.append(f"victim: {_actor_line(record.victim)}")
    if record.attacker and record.attacker.name:
        lines.append(f"attacker: {_actor_line(record.attacker)}")
    if record.motive:
        lines.append(f"Motive: {record.motive}")
    if record.database_entry_date:
        lines.append(f"database_entry_date: {record.database_entry_date}")
    if record.reference:
        lines.append(f"Reference: {record.reference}")
    if record.mode is not TransportMode.NONE:
        lines.append(f"Transportation_mode: {record.mode.value}")
    return "\n".join(lines)


def window_starts(token_total: int, size: int, overlap: int) -> list[int]:
    """Start offsets of every window over a document of token_total tokens."""
    if size <= 0:
        raise InvalidParams("chunk size must be positive")
    if not 0 <= overlap < size:
        raise InvalidParams("overlap must satisfy 0 <= overlap < size")
    if token_total <= 0:
        return []
    stride = size - overlap
    starts = [0]
    while starts[-1] + size < token_total:
        starts.append(starts[-1] + stride)
    return starts


def chunk_text(
    text: str,
    size: int = DEFAULT_CHUNK_SIZE,
    overlap: int = DEFAULT_CHUNK_OVERLAP,
) -> list[tuple[str, int, int]]:
    """Cut text into (window_text, token_count, start_token) triples.

    Window text is sliced on token boundaries of the original string, so
    no token is ever split and surrounding punctuation stays attached.
    """
    spans = token_spans(text)
    out = []
    for start in window_starts(len(spans), size, overlap):
        end = min(start + size, len(spans))
        lo = spans[start][0]
        hi = spans[end - 1][1]
        out.append((text[lo:hi], end - start, start))
    return out


def chunk_corpus(
    store: IncidentStore,
    size: int = DEFAULT_CHUNK_SIZE,
    overlap: int = DEFAULT_CHUNK_OVERLAP,
) -> list[Chunk]:
    """Render every record and window the result; ids are dense and ordered.

    Records are visited in store (key) order so chunk ids are stable for a
    given store regardless of when the corpus is built.
    """
    chunks: list[Chunk] = []
    for record in store:
        for text, count, start in chunk_text(render_record_text(record), size, overlap):
            chunks.append(
                Chunk(
                    chunk_id=len(chunks),
                    record_keys=(record.key,),
                    text=text,
                    token_count=count,
                    start_token=start,
                )
            )
    return chunks
