"""Per-item metric charts for evaluation reports.

The evaluate pipeline writes one PNG per headline metric (bar per test
item, dashed line at the run average) plus a summary chart of the six
averages, next to the delimited report.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")  # headless environments; must precede pyplot

import matplotlib.pyplot as plt

from .evaluation import HEADLINE_METRICS, MetricReport

_BAR_COLOR = "#33658a"
_AVG_COLOR = "#f26419"
_FIGSIZE = (8.0, 4.0)
_DPI = 120

_TITLES = {
    "rouge1_f1": "ROUGE-1 F1 per item",
    "rouge2_f1": "ROUGE-2 F1 per item",
    "rougeL_f1": "ROUGE-L F1 per item",
    "token_precision": "Token precision per item",
    "token_recall": "Token recall per item",
    "token_accuracy": "Token accuracy per item",
}


def render_metric_figures(report: MetricReport, out_dir: str | Path, stem: str = "eval") -> list[Path]:
    """Write the metric charts; returns the paths written."""
    directory = Path(out_dir)
    directory.mkdir(parents=True, exist_ok=True)
    scored = [r for r in report.items if not r.failed]
    written: list[Path] = []

    for name in HEADLINE_METRICS:
        fig, ax = plt.subplots(figsize=_FIGSIZE, dpi=_DPI)
        xs = [r.index for r in scored]
        ys = [r.metrics[name] for r in scored]
        ax.bar(xs, ys, color=_BAR_COLOR, width=0.7)
        ax.axhline(report.averages[name], color=_AVG_COLOR, linestyle="--", linewidth=1.2,
                   label=f"average {report.averages[name]:.2f}")
        ax.set_xlabel("test item")
        ax.set_ylabel(name.replace("_", " "))
        ax.set_ylim(0.0, 1.05)
        ax.set_title(_TITLES[name])
        ax.legend(loc="upper right")
        ax.grid(axis="y", alpha=0.3)
        if xs:
            ax.set_xticks(xs)
        fig.tight_layout()
        path = directory / f"{stem}_{name}.png"
        fig.savefig(path)
        plt.close(fig)
        written.append(path)

    fig, ax = plt.subplots(figsize=_FIGSIZE, dpi=_DPI)
    labels = [name.replace("_", "\n") for name in HEADLINE_METRICS]
    values = [report.averages[name] for name in HEADLINE_METRICS]
    ax.bar(range(len(values)), values, color=_BAR_COLOR, width=0.6)
    ax.set_xticks(range(len(values)))
    ax.set_xticklabels(labels, fontsize=8)
    ax.set_ylim(0.0, 1.05)
    ax.set_title("Run averages")
    ax.grid(axis="y", alpha=0.3)
    for i, v in enumerate(values):
        ax.text(i, v + 0.02, f"{v:.2f}", ha="center", fontsize=8)
    fig.tight_layout()
    path = directory / f"{stem}_averages.png"
    fig.savefig(path)
    plt.close(fig)
    written.append(path)
    return written
