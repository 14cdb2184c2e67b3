"""Canonical incident records: parsing, serialization, validation, dedup.

A record is stored and exchanged as a JSON document with a fixed field
order and fixed key casing (the mixed casing is intentional and must not
be "cleaned up": downstream artifacts depend on byte-identical
serialization). Parsing and serialization are exact inverses for any
valid record.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterator, Optional

from .errors import (
    KeyCollision,
    KeyMismatch,
    MalformedDocument,
    MissingRequiredField,
    StorageFailure,
    UnknownField,
    UnrecognizedLabel,
)


class TransportMode(Enum):
    """Transportation mode labels. NONE means "not transportation"."""

    AVIATION = "Aviation"
    MARITIME = "Maritime"
    RAIL = "Rail"
    ROAD = "Road"
    MULTIMODAL = "Multimodal"
    NONE = "None"


# Single-mode labels, in canonical order. Used by samplers and scorers.
SINGLE_MODES = (
    TransportMode.AVIATION,
    TransportMode.MARITIME,
    TransportMode.RAIL,
    TransportMode.ROAD,
)

_MODE_BY_NAME = {m.value.lower(): m for m in TransportMode}
_MODE_BY_NAME["null"] = TransportMode.NONE
_MODE_BY_NAME[""] = TransportMode.NONE


def parse_mode(value: Optional[str]) -> TransportMode:
    """Map a label string (or None) onto a TransportMode.

    Accepts any casing; "", "none" and "null" all mean NONE. Raises
    UnrecognizedLabel for anything else.
    """
    if value is None:
        return TransportMode.NONE
    key = value.strip().lower()
    if key in _MODE_BY_NAME:
        return _MODE_BY_NAME[key]
    raise UnrecognizedLabel(f"unknown transportation mode label: {value!r}")


@dataclass
class ActorRef:
    """Victim or attacker block."""

    name: str
    country: Optional[str] = None
    category: Optional[str] = None

    def as_mapping(self) -> dict:
        return {"name": self.name, "country": self.country, "category": self.category}


@dataclass
class IncidentRecord:
    attack_name: str
    description: str
    incident_type: Optional[str] = None
    date: Optional[str] = None  # free-text date as published by the source
    detection: Optional[str] = None
    victim: Optional[ActorRef] = None
    attacker: Optional[ActorRef] = None
    motive: Optional[str] = None
    database_entry_date: Optional[str] = None
    reference: Optional[str] = None
    mode: TransportMode = TransportMode.NONE
    source_dataset: str = "unspecified"
    source_row_id: str = "0"
    date_iso: Optional[str] = None  # normalized YYYY[-MM[-DD]] prefix
    duplicate_of: Optional[str] = None

    @property
    def key(self) -> str:
        return f"{self.source_dataset}:{self.source_row_id}"


# Canonical document keys, in serialization order. The first eleven mirror
# the public record layout; the last four carry pipeline provenance.
CANONICAL_FIELDS = (
    "attack_name",
    "incident_type",
    "description",
    "Date",
    "detection",
    "victim",
    "attacker",
    "Motive",
    "database_entry_date",
    "Reference",
    "Transportation_mode",
    "source_dataset",
    "source_row_id",
    "date_iso",
    "duplicate_of",
)

_ACTOR_FIELDS = ("name", "country", "category")


def canonical_mapping(record: IncidentRecord) -> dict:
    """Record as an ordered plain mapping ready for JSON dumping."""
    mode = None if record.mode is TransportMode.NONE else record.mode.value
    return {
        "attack_name": record.attack_name,
        "incident_type": record.incident_type,
        "description": record.description,
        "Date": record.date,
        "detection": record.detection,
        "victim": record.victim.as_mapping() if record.victim else None,
        "attacker": record.attacker.as_mapping() if record.attacker else None,
        "Motive": record.motive,
        "database_entry_date": record.database_entry_date,
        "Reference": record.reference,
        "Transportation_mode": mode,
        "source_dataset": record.source_dataset,
        "source_row_id": record.source_row_id,
        "date_iso": record.date_iso,
        "duplicate_of": record.duplicate_of,
    }


def serialize_record(record: IncidentRecord) -> str:
    """Canonical JSON text for one record. Deterministic byte for byte."""
    return json.dumps(canonical_mapping(record), ensure_ascii=False, indent=2)


def _as_opt_str(doc_field: str, value) -> Optional[str]:
    if value is None or isinstance(value, str):
        return value
    raise MalformedDocument(f"field {doc_field!r} must be a string or null")


def _parse_actor(doc_field: str, value) -> Optional[ActorRef]:
    if value is None:
        return None
    if not isinstance(value, dict):
        raise MalformedDocument(f"field {doc_field!r} must be an object or null")
    for key in value:
        if key not in _ACTOR_FIELDS:
            raise UnknownField(f"{doc_field}.{key}")
    name = _as_opt_str(f"{doc_field}.name", value.get("name")) or ""
    return ActorRef(
        name=name,
        country=_as_opt_str(f"{doc_field}.country", value.get("country")),
        category=_as_opt_str(f"{doc_field}.category", value.get("category")),
    )


_DATE_ISO_RE = re.compile(r"(\d{4})(?:-(\d{2})(?:-(\d{2}))?)?$")


def _valid_date_iso(value: str) -> bool:
    m = _DATE_ISO_RE.fullmatch(value)
    if not m:
        return False
    month, day = m.group(2), m.group(3)
    if month is not None and not 1 <= int(month) <= 12:
        return False
    if day is not None and not 1 <= int(day) <= 31:
        return False
    return True


def record_from_mapping(doc: dict) -> IncidentRecord:
    """Build a record from a decoded canonical mapping.

    Provenance fields may be absent (documents produced outside the
    pipeline); they default so that a key can always be formed.
    """
    if not isinstance(doc, dict):
        raise MalformedDocument("record document must be a JSON object")
    for key in doc:
        if key not in CANONICAL_FIELDS:
            raise UnknownField(key)

    attack_name = doc.get("attack_name")
    if not isinstance(attack_name, str) or not attack_name.strip():
        raise MissingRequiredField("attack_name")
    description = doc.get("description")
    if not isinstance(description, str) or not description.strip():
        raise MissingRequiredField("description")

    mode_value = doc.get("Transportation_mode")
    if mode_value is not None and not isinstance(mode_value, str):
        raise MalformedDocument("Transportation_mode must be a string or null")
    try:
        mode = parse_mode(mode_value)
    except UnrecognizedLabel as exc:
        raise MalformedDocument(str(exc)) from exc

    date_text = _as_opt_str("Date", doc.get("Date"))
    if "date_iso" in doc:
        date_iso = _as_opt_str("date_iso", doc["date_iso"])
        if date_iso is not None and not _valid_date_iso(date_iso):
            raise MalformedDocument(f"date_iso not in YYYY[-MM[-DD]] form: {date_iso!r}")
    else:
        date_iso = parse_date_iso(date_text or "")

    return IncidentRecord(
        attack_name=attack_name,
        incident_type=_as_opt_str("incident_type", doc.get("incident_type")),
        description=description,
        date=date_text,
        detection=_as_opt_str("detection", doc.get("detection")),
        victim=_parse_actor("victim", doc.get("victim")),
        attacker=_parse_actor("attacker", doc.get("attacker")),
        motive=_as_opt_str("Motive", doc.get("Motive")),
        database_entry_date=_as_opt_str("database_entry_date", doc.get("database_entry_date")),
        reference=_as_opt_str("Reference", doc.get("Reference")),
        mode=mode,
        source_dataset=_as_opt_str("source_dataset", doc.get("source_dataset")) or "unspecified",
        source_row_id=_as_opt_str("source_row_id", doc.get("source_row_id")) or "0",
        date_iso=date_iso,
        duplicate_of=_as_opt_str("duplicate_of", doc.get("duplicate_of")),
    )


def parse_record(text: str) -> IncidentRecord:
    """Parse one canonical JSON document into a record."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedDocument(f"not valid JSON: {exc}") from exc
    return record_from_mapping(doc)


# --- free-text date normalization ---------------------------------------------

_MONTHS = {
    "january": 1, "february": 2, "march": 3, "april": 4, "may": 5, "june": 6,
    "july": 7, "august": 8, "september": 9, "october": 10, "november": 11,
    "december": 12,
    "jan": 1, "feb": 2, "mar": 3, "apr": 4, "jun": 6, "jul": 7, "aug": 8,
    "sep": 9, "sept": 9, "oct": 10, "nov": 11, "dec": 12,
}

_MDY_RE = re.compile(r"([A-Za-z]+)\.?\s+(\d{1,2})(?:st|nd|rd|th)?,?\s+(\d{4})")
_DMY_RE = re.compile(r"(\d{1,2})(?:st|nd|rd|th)?\s+([A-Za-z]+)\.?,?\s+(\d{4})")
_MY_RE = re.compile(r"([A-Za-z]+)\.?,?\s+(\d{4})")
_SLASH_RE = re.compile(r"(\d{1,2})/(\d{1,2})/(\d{4})")
_YEAR_RE = re.compile(r"\b(1[89]\d{2}|20\d{2})\b")


def _iso(year: int, month: Optional[int] = None, day: Optional[int] = None) -> Optional[str]:
    if month is None:
        return f"{year:04d}"
    if not 1 <= month <= 12:
        return None
    if day is None:
        return f"{year:04d}-{month:02d}"
    if not 1 <= day <= 31:
        return f"{year:04d}-{month:02d}"
    return f"{year:04d}-{month:02d}-{day:02d}"


def parse_date_iso(text: str) -> Optional[str]:
    """Normalize a free-text date to a YYYY[-MM[-DD]] prefix.

    Returns None when no year can be recovered; precision never exceeds
    what the text states.
    """
    s = text.strip()
    if not s:
        return None
    m = _DATE_ISO_RE.fullmatch(s)
    if m and _valid_date_iso(s):
        return s
    m = _MDY_RE.search(s)
    if m and m.group(1).lower() in _MONTHS:
        out = _iso(int(m.group(3)), _MONTHS[m.group(1).lower()], int(m.group(2)))
        if out:
            return out
    m = _DMY_RE.search(s)
    if m and m.group(2).lower() in _MONTHS:
        out = _iso(int(m.group(3)), _MONTHS[m.group(2).lower()], int(m.group(1)))
        if out:
            return out
    m = _SLASH_RE.search(s)
    if m:
        out = _iso(int(m.group(3)), int(m.group(1)), int(m.group(2)))
        if out:
            return out
    m = _MY_RE.search(s)
    if m and m.group(1).lower() in _MONTHS:
        out = _iso(int(m.group(2)), _MONTHS[m.group(1).lower()])
        if out:
            return out
    m = _YEAR_RE.search(s)
    if m:
        return m.group(1)
    return None


# --- validation ----------------------------------------------------------------

@dataclass
class Violation:
    field: str
    rule: str

    def __str__(self) -> str:
        return f"{self.field}: {self.rule}"


def validate_record(record: IncidentRecord) -> list[Violation]:
    """Structural checks beyond what parsing enforces. Empty list means clean."""
    out: list[Violation] = []
    if not record.attack_name.strip():
        out.append(Violation("attack_name", "must be non-empty"))
    if not record.description.strip():
        out.append(Violation("description", "must be non-empty"))
    for label, actor in (("victim", record.victim), ("attacker", record.attacker)):
        if actor is not None and not actor.name.strip():
            out.append(Violation(f"{label}.name", "must be non-empty when the block is present"))
    if record.date_iso is not None and not _valid_date_iso(record.date_iso):
        out.append(Violation("date_iso", "not a YYYY[-MM[-DD]] prefix"))
    elif record.date_iso is not None and record.date:
        m = _YEAR_RE.search(record.date)
        if m and m.group(1) != record.date_iso[:4]:
            out.append(Violation("date_iso", "year disagrees with the Date text"))
    return out


def dedup_key(record: IncidentRecord) -> str:
    """Cross-source duplicate fingerprint.

    Victim name (attack name when no victim), year, and incident type,
    all lowercased, joined with "|". Missing year becomes "unknown".
    """
    base = record.attack_name
    if record.victim and record.victim.name.strip():
        base = record.victim.name
    year = record.date_iso[:4] if record.date_iso else "unknown"
    itype = (record.incident_type or "").strip().lower()
    return f"{base.strip().lower()}|{year}|{itype}"


# --- store ----------------------------------------------------------------------

class IncidentStore:
    """Keyed collection of records; iteration is in sorted key order."""

    def __init__(self) -> None:
        self._records: dict[str, IncidentRecord] = {}
        self._sealed = False

    def add(self, record: IncidentRecord) -> None:
        if self._sealed:
            raise ValueError("store is sealed")
        if record.key in self._records:
            raise KeyCollision(record.key)
        self._records[record.key] = record

    def seal(self) -> "IncidentStore":
        self._sealed = True
        return self

    @property
    def sealed(self) -> bool:
        return self._sealed

    def keys(self) -> list[str]:
        return sorted(self._records)

    def get(self, key: str) -> Optional[IncidentRecord]:
        return self._records.get(key)

    def __getitem__(self, key: str) -> IncidentRecord:
        try:
            return self._records[key]
        except KeyError:
            raise KeyMismatch(key) from None

    def __contains__(self, key: str) -> bool:
        return key in self._records

    def __len__(self) -> int:
        return len(self._records)

    def __iter__(self) -> Iterator[IncidentRecord]:
        for key in self.keys():
            yield self._records[key]

    def save(self, path: str | Path) -> None:
        docs = [canonical_mapping(r) for r in self]
        text = json.dumps(docs, ensure_ascii=False, indent=2)
        try:
            Path(path).write_text(text + "\n", encoding="utf-8")
        except OSError as exc:
            raise StorageFailure(f"cannot write store: {exc}") from exc

    @classmethod
    def load(cls, path: str | Path) -> "IncidentStore":
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise StorageFailure(f"cannot read store: {exc}") from exc
        try:
            docs = json.loads(text)
        except json.JSONDecodeError as exc:
            raise MalformedDocument(f"store file is not valid JSON: {exc}") from exc
        if not isinstance(docs, list):
            raise MalformedDocument("store file must hold a JSON array")
        store = cls()
        for doc in docs:
            store.add(record_from_mapping(doc))
        return store.seal()
