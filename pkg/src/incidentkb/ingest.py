"""Source adapters: heterogeneous feeds in, canonical records out.

Three adapters cover the feed formats that matter in practice:

* delimited -- CSV-style tables with a header row, any single-character
  separator;
* text      -- "Label: value" blocks separated by a configurable pattern;
* llm       -- free prose handed to a chat model that returns canonical
  JSON documents.

Each adapter is driven by a per-source field map so new feeds need
configuration, not code. Rejected rows never abort a run; they are
reported alongside the records that survived.
"""

from __future__ import annotations

import csv
import json
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .assets import load_template
from .errors import (
    EmptyInput,
    HeaderMismatch,
    IncidentKbError,
    InvalidParams,
    StorageFailure,
    UnparseableProviderOutput,
)
from .providers import ChatProvider
from .records import (
    ActorRef,
    IncidentRecord,
    IncidentStore,
    dedup_key,
    parse_date_iso,
    parse_mode,
    record_from_mapping,
    _valid_date_iso,
)

# Targets a field map may write to. Actor fields use a dotted path.
FLAT_TARGETS = frozenset(
    {
        "attack_name",
        "incident_type",
        "description",
        "date",
        "date_iso",
        "detection",
        "motive",
        "database_entry_date",
        "reference",
        "transportation_mode",
        "source_row_id",
    }
)
ACTOR_TARGETS = frozenset(
    f"{block}.{leaf}"
    for block in ("victim", "attacker")
    for leaf in ("name", "country", "category")
)
ALL_TARGETS = FLAT_TARGETS | ACTOR_TARGETS


@dataclass
class FieldMap:
    """How one source's column/label names land on canonical fields."""

    columns: dict[str, str]
    defaults: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for col, target in self.columns.items():
            if target not in ALL_TARGETS:
                raise InvalidParams(f"field map column {col!r} points at unknown target {target!r}")
        for target in self.defaults:
            if target not in ALL_TARGETS:
                raise InvalidParams(f"field map default targets unknown field {target!r}")
        covered = set(self.columns.values()) | set(self.defaults)
        for required in ("attack_name", "description"):
            if required not in covered:
                raise InvalidParams(f"field map must cover {required!r}")


@dataclass
class SourceConfig:
    source: str
    field_map: FieldMap
    adapter: str = "delimited"
    separator: str = ","
    block_pattern: str = r"\n\s*\n"
    transport_only: bool = False  # source publishes transportation incidents only


def load_source_config(path: str | Path) -> SourceConfig:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise StorageFailure(f"cannot read source config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidParams(f"source config is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict) or "source" not in raw or "columns" not in raw:
        raise InvalidParams("source config needs at least 'source' and 'columns'")
    return SourceConfig(
        source=raw["source"],
        field_map=FieldMap(columns=dict(raw["columns"]), defaults=dict(raw.get("defaults", {}))),
        adapter=raw.get("adapter", "delimited"),
        separator=raw.get("separator", ","),
        block_pattern=raw.get("block_pattern", r"\n\s*\n"),
        transport_only=bool(raw.get("transport_only", False)),
    )


@dataclass
class IngestReport:
    source: str
    rows_read: int = 0
    produced: int = 0
    rejected: list[tuple[str, str]] = field(default_factory=list)  # (row id, reason)
    duplicates_flagged: int = 0

    @property
    def rejected_count(self) -> int:
        return len(self.rejected)


class _RowRejected(Exception):
    """Internal: one row failed; carry the reason, keep the run going."""


def _build_record(values: dict[str, str], config: SourceConfig, fallback_row_id: str) -> IncidentRecord:
    merged = dict(config.field_map.defaults)
    for target, value in values.items():
        if value.strip():
            merged[target] = value.strip()

    attack_name = merged.get("attack_name", "").strip()
    if not attack_name:
        raise _RowRejected("attack_name is empty")
    description = merged.get("description", "").strip()
    if not description:
        raise _RowRejected("description is empty")

    try:
        mode = parse_mode(merged.get("transportation_mode"))
    except IncidentKbError as exc:
        raise _RowRejected(str(exc)) from exc

    date = merged.get("date") or None
    date_iso = merged.get("date_iso") or None
    if date_iso is not None and not _valid_date_iso(date_iso):
        raise _RowRejected(f"date_iso not in YYYY[-MM[-DD]] form: {date_iso!r}")
    if date_iso is None and date:
        date_iso = parse_date_iso(date)

    def actor(block: str) -> Optional[ActorRef]:
        name = merged.get(f"{block}.name", "").strip()
        country = merged.get(f"{block}.country") or None
        category = merged.get(f"{block}.category") or None
        if not name:
            if country or category:
                raise _RowRejected(f"{block} block has details but no name")
            return None
        return ActorRef(name=name, country=country, category=category)

    return IncidentRecord(
        attack_name=attack_name,
        incident_type=merged.get("incident_type") or None,
        description=description,
        date=date,
        detection=merged.get("detection") or None,
        victim=actor("victim"),
        attacker=actor("attacker"),
        motive=merged.get("motive") or None,
        database_entry_date=merged.get("database_entry_date") or None,
        reference=merged.get("reference") or None,
        mode=mode,
        source_dataset=config.source,
        source_row_id=merged.get("source_row_id", "").strip() or fallback_row_id,
        date_iso=date_iso,
    )


def ingest_delimited(
    rows: Iterable[Sequence[str]], config: SourceConfig
) -> tuple[list[IncidentRecord], IngestReport]:
    """Header-checked delimited rows to records."""
    it = iter(rows)
    try:
        header = [cell.strip() for cell in next(it)]
    except StopIteration:
        raise EmptyInput(f"source {config.source!r} has no header row") from None
    missing = [col for col in config.field_map.columns if col not in header]
    if missing:
        raise HeaderMismatch(f"source {config.source!r} header lacks columns: {', '.join(missing)}")
    positions = {col: header.index(col) for col in config.field_map.columns}

    report = IngestReport(source=config.source)
    records: list[IncidentRecord] = []
    for row in it:
        if not any(cell.strip() for cell in row):
            continue
        report.rows_read += 1
        row_id = str(report.rows_read)
        if len(row) != len(header):
            report.rejected.append((row_id, f"expected {len(header)} columns, got {len(row)}"))
            continue
        values = {
            target: row[positions[col]] for col, target in config.field_map.columns.items()
        }
        try:
            records.append(_build_record(values, config, row_id))
        except _RowRejected as exc:
            report.rejected.append((row_id, str(exc)))
    report.produced = len(records)
    if report.rows_read == 0:
        raise EmptyInput(f"source {config.source!r} has a header but no data rows")
    return records, report


def load_delimited_file(path: str | Path, config: SourceConfig) -> tuple[list[IncidentRecord], IngestReport]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            return ingest_delimited(csv.reader(fh, delimiter=config.separator), config)
    except OSError as exc:
        raise StorageFailure(f"cannot read source file: {exc}") from exc


_LABEL_LINE_RE = re.compile(r"^([A-Za-z_][A-Za-z0-9 _-]*):\s?(.*)$")


def ingest_text_records(text: str, config: SourceConfig) -> tuple[list[IncidentRecord], IngestReport]:
    """'Label: value' blocks to records; blocks split on config.block_pattern."""
    if not text.strip():
        raise EmptyInput(f"source {config.source!r} text is empty")
    blocks = [b for b in re.split(config.block_pattern, text) if b.strip()]
    report = IngestReport(source=config.source)
    records: list[IncidentRecord] = []
    for block in blocks:
        report.rows_read += 1
        row_id = str(report.rows_read)
        raw: dict[str, str] = {}
        current: Optional[str] = None
        for line in block.splitlines():
            m = _LABEL_LINE_RE.match(line)
            if m:
                current = m.group(1).strip()
                raw[current] = m.group(2).strip()
            elif current is not None and line.strip():
                raw[current] = (raw[current] + " " + line.strip()).strip()
        values = {
            target: raw[label]
            for label, target in config.field_map.columns.items()
            if label in raw
        }
        if not values:
            report.rejected.append((row_id, "no recognized labeled fields"))
            continue
        try:
            records.append(_build_record(values, config, row_id))
        except _RowRejected as exc:
            report.rejected.append((row_id, str(exc)))
    report.produced = len(records)
    return records, report


def _parse_document_array(reply: str) -> list[dict]:
    body = reply.strip()
    fence = re.match(r"^```(?:json)?\s*(.*?)\s*```$", body, re.DOTALL)
    if fence:
        body = fence.group(1)
    docs = json.loads(body)  # may raise ValueError
    if not isinstance(docs, list) or not all(isinstance(d, dict) for d in docs):
        raise ValueError("expected a JSON array of objects")
    return docs


def extract_records_llm(
    text: str, provider: ChatProvider, config: SourceConfig
) -> tuple[list[IncidentRecord], IngestReport]:
    """Free prose to records via a chat model.

    The model is asked for a JSON array of canonical documents. One
    corrective re-ask is allowed when the reply does not parse; after
    that the run fails rather than guessing.
    """
    if not text.strip():
        raise EmptyInput(f"source {config.source!r} text is empty")
    prompt = load_template("extraction").replace("{text}", text)
    reply = provider.complete(prompt, temperature=0.0)
    try:
        docs = _parse_document_array(reply)
    except ValueError:
        retry = (
            prompt
            + "\n\nYour previous reply could not be parsed. Respond with only a JSON array"
            " of incident objects, no prose and no code fences."
        )
        reply = provider.complete(retry, temperature=0.0)
        try:
            docs = _parse_document_array(reply)
        except ValueError as exc:
            raise UnparseableProviderOutput(
                f"extraction output is not a JSON document array: {exc}"
            ) from exc

    report = IngestReport(source=config.source, rows_read=len(docs))
    records: list[IncidentRecord] = []
    for i, doc in enumerate(docs, start=1):
        doc = dict(doc)
        doc["source_dataset"] = config.source
        doc["source_row_id"] = str(i)
        try:
            records.append(record_from_mapping(doc))
        except IncidentKbError as exc:
            report.rejected.append((str(i), f"{type(exc).__name__}: {exc}"))
    report.produced = len(records)
    return records, report


def merge_sources(
    batches: Sequence[Sequence[IncidentRecord]],
) -> tuple[IncidentStore, IngestReport]:
    """Fold per-source batches into one sealed store, flagging cross-source
    duplicates.

    The earliest record with a given dedup fingerprint wins; later records
    from *other* sources get duplicate_of pointed at it. Same-source
    repeats are the source's own editorial problem and pass through
    unflagged.
    """
    store = IncidentStore()
    first_seen: dict[str, tuple[str, str]] = {}  # dedup fingerprint -> (record key, source)
    report = IngestReport(source="merged")
    for batch in batches:
        for record in batch:
            report.rows_read += 1
            fingerprint = dedup_key(record)
            earlier = first_seen.get(fingerprint)
            if earlier is None:
                first_seen[fingerprint] = (record.key, record.source_dataset)
            elif earlier[1] != record.source_dataset:
                record = replace(record, duplicate_of=earlier[0])
                report.duplicates_flagged += 1
            store.add(record)
    report.produced = len(store)
    return store.seal(), report
