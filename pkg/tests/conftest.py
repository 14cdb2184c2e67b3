"""Shared fixtures plus the acceptance-summary hook."""

from __future__ import annotations

import random
import re
import string
from pathlib import Path

import pytest

from incidentkb.chunking import chunk_corpus
from incidentkb.classify import classify_store, filter_transportation
from incidentkb.indexes import KnowledgeBase, build_knowledge_base
from incidentkb.ingest import (
    ingest_text_records,
    load_delimited_file,
    load_source_config,
    merge_sources,
)
from incidentkb.providers import HashedTfEmbedder
from incidentkb.records import ActorRef, IncidentRecord, IncidentStore, TransportMode

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

_SOURCES = (
    ("umced", "umced.csv"),
    ("eurepoc", "eurepoc.csv"),
    ("mcad", "mcad.txt"),
    ("tracr", "tracr.csv"),
)
TRANSPORT_ONLY = ("mcad", "tracr")


def ingest_fixture_corpus():
    """All four bundled sources, merged. Returns (store, merge report)."""
    batches = []
    for name, filename in _SOURCES:
        config = load_source_config(FIXTURES / "maps" / f"{name}.json")
        path = FIXTURES / filename
        if config.adapter == "text":
            records, _ = ingest_text_records(path.read_text(encoding="utf-8"), config)
        else:
            records, _ = load_delimited_file(path, config)
        batches.append(records)
    return merge_sources(batches)


def build_fixture_kb() -> KnowledgeBase:
    """Full offline pipeline over the bundled corpus."""
    store, _ = ingest_fixture_corpus()
    verdicts = classify_store(store, engine="rules")
    filtered, _ = filter_transportation(store, verdicts, TRANSPORT_ONLY)
    chunks = chunk_corpus(filtered)
    return build_knowledge_base(chunks, filtered, HashedTfEmbedder())


@pytest.fixture(scope="session")
def fixture_store() -> IncidentStore:
    store, _ = ingest_fixture_corpus()
    return store


@pytest.fixture(scope="session")
def fixture_kb() -> KnowledgeBase:
    return build_fixture_kb()


# --- random valid records for round-trip style tests -------------------------

_WORDS = (
    "port breach ransomware outage rail attack network cargo airline disrupted "
    "systems operator data flight vessel truck metro toll signal backup"
).split()


def _words(rng: random.Random, low: int, high: int) -> str:
    return " ".join(rng.choice(_WORDS) for _ in range(rng.randint(low, high)))


def _maybe(rng: random.Random, value):
    return value if rng.random() < 0.7 else None


def _actor(rng: random.Random):
    if rng.random() < 0.3:
        return None
    name = _words(rng, 1, 3).title()
    return ActorRef(
        name=name,
        country=_maybe(rng, rng.choice(["USA", "France", "Japan", "Brazil", "Kenya"])),
        category=_maybe(rng, rng.choice(["corporate", "public authority", "criminal"])),
    )


def make_random_record(rng: random.Random) -> IncidentRecord:
    """A structurally valid record with a good spread of optional fields."""
    year = rng.randint(2010, 2024)
    month = rng.randint(1, 12)
    precision = rng.random()
    if precision < 0.3:
        date_iso = f"{year}"
    elif precision < 0.8:
        date_iso = f"{year}-{month:02d}"
    else:
        date_iso = f"{year}-{month:02d}-{rng.randint(1, 28):02d}"
    return IncidentRecord(
        attack_name=_words(rng, 2, 6),
        incident_type=_maybe(rng, rng.choice(["Ransomware", "Data Breach", "DDoS", "Intrusion"])),
        description=_words(rng, 8, 40),
        date=_maybe(rng, f"{rng.choice(['March', 'May', 'July'])} {year}"),
        detection=_maybe(rng, _words(rng, 1, 4)),
        victim=_actor(rng),
        attacker=_actor(rng),
        motive=_maybe(rng, rng.choice(["financial", "espionage", "political"])),
        database_entry_date=_maybe(rng, f"{year}-{month:02d}"),
        reference=_maybe(rng, "https://example.org/" + "".join(rng.choices(string.ascii_lowercase, k=6))),
        mode=rng.choice(list(TransportMode)),
        source_dataset=rng.choice(["alpha", "beta", "gamma"]),
        source_row_id=str(rng.randint(1, 10_000)),
        date_iso=_maybe(rng, date_iso),
        duplicate_of=None,
    )


# --- acceptance summary -------------------------------------------------------

_CRITERION_RE = re.compile(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    outcomes: dict[str, tuple[int, str]] = {}
    for status, label in (("passed", "PASS"), ("failed", "FAIL"), ("error", "FAIL")):
        for report in terminalreporter.stats.get(status, []):
            m = _CRITERION_RE.search(getattr(report, "nodeid", ""))
            if m and getattr(report, "when", "call") == "call":
                outcomes[report.nodeid] = (int(m.group(1)), f"{label}  criterion {int(m.group(1)):2d}: {m.group(2)}")
    if outcomes:
        terminalreporter.write_sep("-", "acceptance criteria")
        for _, line in sorted(outcomes.values()):
            terminalreporter.write_line(line)
