"""Answer-quality evaluation: ROUGE and token-overlap metrics.

All metrics share the package tokenizer. ROUGE-1/2 use clipped n-gram
counts; ROUGE-L uses the longest common subsequence; the token metrics
treat candidate and reference as unique token sets.
"""

from __future__ import annotations

import csv
import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

from .errors import EmptyInput, StorageFailure
from .tokens import tokenize

# Headline metrics: the six numbers a run is summarized by.
HEADLINE_METRICS = (
    "rouge1_f1",
    "rouge2_f1",
    "rougeL_f1",
    "token_precision",
    "token_recall",
    "token_accuracy",
)


def _prf(overlap: int, cand_total: int, ref_total: int) -> tuple[float, float, float]:
    precision = overlap / cand_total if cand_total else 0.0
    recall = overlap / ref_total if ref_total else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def ngrams(tokens: Sequence[str], n: int) -> list[tuple[str, ...]]:
    return [tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1)]


def rouge_n(candidate: str, reference: str, n: int) -> tuple[float, float, float]:
    """Clipped n-gram overlap (precision, recall, f1)."""
    cand = ngrams(tokenize(candidate), n)
    ref = ngrams(tokenize(reference), n)
    ref_counts = Counter(ref)
    overlap = sum(min(count, ref_counts[gram]) for gram, count in Counter(cand).items())
    return _prf(overlap, len(cand), len(ref))


def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    """Longest common subsequence length, standard quadratic table."""
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        row = [0]
        for j, y in enumerate(b, start=1):
            if x == y:
                row.append(prev[j - 1] + 1)
            else:
                row.append(max(prev[j], row[-1]))
        prev = row
    return prev[len(b)]


def rouge_l(candidate: str, reference: str) -> tuple[float, float, float]:
    """LCS-based (precision, recall, f1)."""
    cand = tokenize(candidate)
    ref = tokenize(reference)
    return _prf(lcs_length(cand, ref), len(cand), len(ref))


def token_metrics(candidate: str, reference: str) -> tuple[float, float, float]:
    """Unique-token-set (precision, recall, accuracy)."""
    cand = set(tokenize(candidate))
    ref = set(tokenize(reference))
    inter = len(cand & ref)
    union = len(cand | ref)
    precision = inter / len(cand) if cand else 0.0
    recall = inter / len(ref) if ref else 0.0
    accuracy = inter / union if union else 0.0
    return precision, recall, accuracy


def compute_metrics(candidate: str, reference: str) -> dict[str, float]:
    r1 = rouge_n(candidate, reference, 1)
    r2 = rouge_n(candidate, reference, 2)
    rl = rouge_l(candidate, reference)
    tok = token_metrics(candidate, reference)
    return {
        "rouge1_precision": r1[0], "rouge1_recall": r1[1], "rouge1_f1": r1[2],
        "rouge2_precision": r2[0], "rouge2_recall": r2[1], "rouge2_f1": r2[2],
        "rougeL_precision": rl[0], "rougeL_recall": rl[1], "rougeL_f1": rl[2],
        "token_precision": tok[0], "token_recall": tok[1], "token_accuracy": tok[2],
    }


# --- test sets and the harness --------------------------------------------------


@dataclass
class EvalItem:
    question: str
    reference: str
    record_keys: tuple[str, ...] = ()


def load_testset(path: str | Path) -> list[EvalItem]:
    """Test items from CSV (question, reference, record_keys ';'-joined) or JSON."""
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise StorageFailure(f"cannot read testset: {exc}") from exc
    items: list[EvalItem] = []
    if p.suffix.lower() == ".json":
        for doc in json.loads(text):
            items.append(
                EvalItem(
                    question=doc["question"],
                    reference=doc["reference"],
                    record_keys=tuple(doc.get("record_keys", ())),
                )
            )
    else:
        reader = csv.DictReader(text.splitlines())
        for row in reader:
            keys = tuple(k for k in (row.get("record_keys") or "").split(";") if k)
            items.append(EvalItem(row["question"], row["reference"], keys))
    if not items:
        raise EmptyInput("testset holds no items")
    return items


@dataclass
class ItemResult:
    index: int
    question: str
    answer: str = ""
    metrics: dict[str, float] = field(default_factory=dict)
    failed: bool = False
    error: Optional[str] = None


@dataclass
class MetricReport:
    items: list[ItemResult]
    averages: dict[str, float]
    failures: int

    @property
    def evaluated(self) -> int:
        return len(self.items) - self.failures


def run_eval(items: Sequence[EvalItem], system: Callable[[str], str]) -> MetricReport:
    """Run the system over every item and score its answers.

    A per-item exception marks that item failed; it is excluded from the
    averages and counted, never silently dropped.
    """
    if not items:
        raise EmptyInput("no test items to evaluate")
    results: list[ItemResult] = []
    for i, item in enumerate(items):
        result = ItemResult(index=i, question=item.question)
        try:
            result.answer = system(item.question)
            result.metrics = compute_metrics(result.answer, item.reference)
        except Exception as exc:  # noqa: BLE001 - the harness must survive any system
            result.failed = True
            result.error = f"{type(exc).__name__}: {exc}"
        results.append(result)

    scored = [r for r in results if not r.failed]
    averages = {
        name: (sum(r.metrics[name] for r in scored) / len(scored) if scored else 0.0)
        for name in HEADLINE_METRICS
    }
    return MetricReport(items=results, averages=averages, failures=len(results) - len(scored))


_DETAIL_METRICS = (
    "rouge1_precision", "rouge1_recall",
    "rouge2_precision", "rouge2_recall",
    "rougeL_precision", "rougeL_recall",
)


def write_report_csv(report: MetricReport, path: str | Path) -> None:
    """Per-item rows plus one trailing averages row."""
    header = ["index", "question", *HEADLINE_METRICS, *_DETAIL_METRICS, "failed", "error", "answer"]
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for r in report.items:
                row: list = [r.index, r.question]
                for name in (*HEADLINE_METRICS, *_DETAIL_METRICS):
                    row.append(f"{r.metrics[name]:.6f}" if r.metrics else "")
                row.extend(["yes" if r.failed else "no", r.error or "", r.answer])
                writer.writerow(row)
            avg_row: list = ["average", f"items={report.evaluated} failures={report.failures}"]
            avg_row.extend(f"{report.averages[name]:.6f}" for name in HEADLINE_METRICS)
            avg_row.extend("" for _ in _DETAIL_METRICS)
            avg_row.extend(["", "", ""])
            writer.writerow(avg_row)
    except OSError as exc:
        raise StorageFailure(f"cannot write report: {exc}") from exc
