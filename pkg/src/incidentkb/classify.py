"""Transportation-mode classification, filtering, sampling, and scoring.

Two interchangeable engines produce verdicts: a chat-model classifier
driven by a guideline prompt, and a deterministic keyword engine that
doubles as the reference implementation in tests. Both emit the same
verdict shape so downstream filtering does not care which one ran.
"""

from __future__ import annotations

import csv
import random
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

from .assets import load_asset_json, load_template
from .chunking import render_record_text
from .errors import (
    InvalidParams,
    MissingVerdict,
    StorageFailure,
    UnparseableProviderOutput,
    UnrecognizedLabel,
)
from .providers import ChatProvider
from .records import (
    SINGLE_MODES,
    IncidentRecord,
    IncidentStore,
    TransportMode,
    parse_mode,
)


@dataclass
class ClassifierVerdict:
    key: str  # record key the verdict belongs to
    predicted: TransportMode
    classifier_id: str
    rationale: Optional[str] = None


@dataclass
class GuidelineRules:
    """Keyword table behind both engines.

    Keys are the four single modes; values are lowercase words or phrases
    matched on word boundaries. An incident matching one family gets that
    mode; matching at least `multimodal_threshold` families is Multimodal;
    matching none is not transportation.
    """

    keywords: dict[TransportMode, tuple[str, ...]]
    multimodal_threshold: int = 2

    def __post_init__(self) -> None:
        if self.multimodal_threshold < 2:
            raise InvalidParams("multimodal threshold must be at least 2")
        seen: dict[str, TransportMode] = {}
        for mode, words in self.keywords.items():
            if mode not in SINGLE_MODES:
                raise InvalidParams(f"keyword family for non-single mode {mode.value}")
            for word in words:
                if word != word.lower():
                    raise InvalidParams(f"keyword {word!r} must be lowercase")
                if word in seen and seen[word] is not mode:
                    raise InvalidParams(f"keyword {word!r} appears in two mode families")
                seen[word] = mode
        self._patterns = {
            mode: re.compile(r"\b(?:" + "|".join(re.escape(w) for w in words) + r")\b")
            for mode, words in self.keywords.items()
            if words
        }

    @classmethod
    def bundled(cls) -> "GuidelineRules":
        return cls.from_mapping(load_asset_json("guidelines"))

    @classmethod
    def from_mapping(cls, raw: Mapping) -> "GuidelineRules":
        keywords = {
            parse_mode(label): tuple(words) for label, words in raw["keywords"].items()
        }
        return cls(keywords=keywords, multimodal_threshold=int(raw.get("multimodal_threshold", 2)))

    def guideline_text(self) -> str:
        lines = []
        for mode in SINGLE_MODES:
            words = self.keywords.get(mode, ())
            if words:
                lines.append(f"- {mode.value}: {', '.join(words)}")
        return "\n".join(lines)

    def matched_modes(self, text: str) -> list[TransportMode]:
        lowered = text.lower()
        return [m for m in SINGLE_MODES if m in self._patterns and self._patterns[m].search(lowered)]


def _classification_haystack(record: IncidentRecord) -> str:
    parts = [record.attack_name, record.incident_type or "", record.description]
    for actor in (record.victim, record.attacker):
        if actor:
            parts.append(actor.name)
    parts.append(record.motive or "")
    return "\n".join(p for p in parts if p)


def classify_rules(record: IncidentRecord, rules: Optional[GuidelineRules] = None) -> ClassifierVerdict:
    """Deterministic keyword engine. No keyword family: not transportation."""
    rules = rules or GuidelineRules.bundled()
    matched = rules.matched_modes(_classification_haystack(record))
    if not matched:
        predicted = TransportMode.NONE
    elif len(matched) >= rules.multimodal_threshold:
        predicted = TransportMode.MULTIMODAL
    else:
        predicted = matched[0]
    rationale = ", ".join(m.value for m in matched) if matched else None
    return ClassifierVerdict(record.key, predicted, "rules", rationale)


def build_classification_prompt(record: IncidentRecord, rules: Optional[GuidelineRules] = None) -> str:
    rules = rules or GuidelineRules.bundled()
    # the record may already carry a label; hide it from the model
    shown = replace(record, mode=TransportMode.NONE)
    template = load_template("classification")
    return template.replace("{incident}", render_record_text(shown)).replace(
        "{guidelines}", rules.guideline_text()
    )


_LABEL_WORD_RE = re.compile(r"\b(aviation|maritime|rail|road|multimodal|null|none)\b", re.IGNORECASE)


def _parse_label_reply(reply: str) -> Optional[TransportMode]:
    """One unambiguous label from a model reply, else None."""
    body = reply.strip().rstrip(".")
    if not body:
        return None
    try:
        return parse_mode(body)
    except UnrecognizedLabel:
        pass
    found_modes = {parse_mode(m.group(1)) for m in _LABEL_WORD_RE.finditer(reply)}
    if len(found_modes) == 1:
        return found_modes.pop()
    return None


def classify_llm(
    record: IncidentRecord,
    provider: ChatProvider,
    rules: Optional[GuidelineRules] = None,
) -> ClassifierVerdict:
    """Chat-model engine; one corrective re-ask before giving up."""
    prompt = build_classification_prompt(record, rules)
    reply = provider.complete(prompt, temperature=0.0)
    predicted = _parse_label_reply(reply)
    if predicted is None:
        retry = (
            prompt
            + "\n\nYour previous reply was not a single label. Reply with exactly one of:"
            " Road, Rail, Maritime, Aviation, Multimodal, null."
        )
        reply = provider.complete(retry, temperature=0.0)
        predicted = _parse_label_reply(reply)
        if predicted is None:
            raise UnparseableProviderOutput(
                f"classifier reply for {record.key} is not a label: {reply[:120]!r}"
            )
    return ClassifierVerdict(record.key, predicted, "llm", reply.strip() or None)


def classify_store(
    store: IncidentStore,
    engine: str = "rules",
    provider: Optional[ChatProvider] = None,
    rules: Optional[GuidelineRules] = None,
    max_workers: int = 4,
) -> dict[str, ClassifierVerdict]:
    """Classify every record; returns verdicts keyed by record key.

    The chat engine fans out over a small thread pool (network-bound);
    the rules engine runs inline.
    """
    rules = rules or GuidelineRules.bundled()
    records = list(store)
    if engine == "rules":
        verdicts = [classify_rules(r, rules) for r in records]
    elif engine == "llm":
        if provider is None:
            raise InvalidParams("llm engine needs a chat provider")
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            verdicts = list(pool.map(lambda r: classify_llm(r, provider, rules), records))
    else:
        raise InvalidParams(f"unknown classification engine: {engine!r}")
    return {v.key: v for v in verdicts}


# --- verdict persistence ---------------------------------------------------------

def save_verdicts(verdicts: Mapping[str, ClassifierVerdict], path: str | Path) -> None:
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["key", "predicted", "classifier_id", "rationale"])
            for key in sorted(verdicts):
                v = verdicts[key]
                writer.writerow([v.key, v.predicted.value, v.classifier_id, v.rationale or ""])
    except OSError as exc:
        raise StorageFailure(f"cannot write verdicts: {exc}") from exc


def load_verdicts(path: str | Path) -> dict[str, ClassifierVerdict]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            out = {}
            for row in reader:
                verdict = ClassifierVerdict(
                    key=row["key"],
                    predicted=parse_mode(row["predicted"]),
                    classifier_id=row.get("classifier_id", "unknown"),
                    rationale=row.get("rationale") or None,
                )
                out[verdict.key] = verdict
            return out
    except OSError as exc:
        raise StorageFailure(f"cannot read verdicts: {exc}") from exc
    except KeyError as exc:
        raise UnrecognizedLabel(f"verdict file lacks column {exc}") from exc


# --- filtering --------------------------------------------------------------------

@dataclass
class FilterReport:
    kept: int = 0
    dropped: int = 0

    @property
    def retention(self) -> float:
        total = self.kept + self.dropped
        return self.kept / total if total else 0.0


def filter_transportation(
    store: IncidentStore,
    verdicts: Mapping[str, ClassifierVerdict],
    transport_only_sources: Iterable[str] = (),
) -> tuple[IncidentStore, FilterReport]:
    """Keep transportation incidents, stamping the predicted mode.

    Records from transport-only sources keep the mode their feed already
    assigned and bypass the verdict check entirely.
    """
    bypass = set(transport_only_sources)
    out = IncidentStore()
    report = FilterReport()
    for record in store:
        if record.source_dataset in bypass:
            out.add(record)
            report.kept += 1
            continue
        verdict = verdicts.get(record.key)
        if verdict is None:
            raise MissingVerdict(record.key)
        if verdict.predicted is TransportMode.NONE:
            report.dropped += 1
            continue
        out.add(replace(record, mode=verdict.predicted))
        report.kept += 1
    return out.seal(), report


# --- evaluation sampling and scoring ----------------------------------------------

def sample_eval_set(
    store: IncidentStore, seed: int, per_label: int = 5
) -> list[IncidentRecord]:
    """Deterministic stratified sample: per_label records for every
    (source, mode) cell that has candidates.

    Selection uses only rng.random() so one seed produces the same sample
    on every platform and Python version. Cells are visited in sorted
    source order, then mode declaration order; candidates keep store key
    order before shuffling.
    """
    if per_label <= 0:
        raise InvalidParams("per_label must be positive")
    rng = random.Random(seed)
    records = list(store)
    picked: list[IncidentRecord] = []
    for source in sorted({r.source_dataset for r in records}):
        for mode in TransportMode:
            pool = [r for r in records if r.source_dataset == source and r.mode is mode]
            take = min(per_label, len(pool))
            for i in range(take):
                j = i + int(rng.random() * (len(pool) - i))
                pool[i], pool[j] = pool[j], pool[i]
                picked.append(pool[i])
    return picked


@dataclass
class GoldLabel:
    key: str
    mode: TransportMode
    # single modes the incident actually involves; only meaningful for
    # multimodal gold, where a constituent prediction is "partially right"
    constituents: frozenset = field(default_factory=frozenset)


@dataclass
class ClassificationScore:
    total: int = 0
    correct: int = 0
    partial: int = 0
    incorrect: int = 0
    false_nulls: int = 0  # subset of incorrect: predicted null, gold has a mode

    @property
    def accuracy(self) -> float:
        return self.correct / self.total if self.total else 0.0

    @property
    def mislabeled(self) -> int:
        return self.partial + self.incorrect


def score_classification(
    verdicts: Iterable[ClassifierVerdict], gold: Sequence[GoldLabel]
) -> ClassificationScore:
    """Score verdicts against gold labels.

    correct: exact mode match. partial: a single constituent mode where
    the gold label is Multimodal. incorrect: every other mismatch, with
    predicted-null-against-real-mode mismatches also tallied as false
    nulls. total always equals correct + partial + incorrect.
    """
    by_key = {v.key: v for v in verdicts}
    score = ClassificationScore()
    for item in gold:
        verdict = by_key.get(item.key)
        if verdict is None:
            raise MissingVerdict(item.key)
        score.total += 1
        pred = verdict.predicted
        if pred is item.mode:
            score.correct += 1
        elif (
            item.mode is TransportMode.MULTIMODAL
            and pred in SINGLE_MODES
            and pred in item.constituents
        ):
            score.partial += 1
        else:
            score.incorrect += 1
            if pred is TransportMode.NONE and item.mode is not TransportMode.NONE:
                score.false_nulls += 1
    return score
