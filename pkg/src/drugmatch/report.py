"""Figure rendering for report paths.

Charts are written as PNG files next to the delimited report output: a
confusion-matrix grid, per-class token frequency bars, and categorical
breakdowns of decision reasons / inconsistency kinds.  Rendering is
headless (Agg) and deterministic.
"""

from __future__ import annotations

import warnings
from collections import Counter
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .correction import PipelineReport
from .matcher import MatchDecision, Metrics
from .records import DrugType

# CJK glyphs are typically missing from the bundled fonts; the charts stay
# useful (counts and layout) so the warning is noise.
_GLYPH_WARNING = r"Glyph .* missing from font"


def _save(fig, path: str | Path) -> None:
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message=_GLYPH_WARNING)
        fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)


def save_confusion_matrix(
    metrics: Metrics,
    path: str | Path,
    positive_name: str = "match",
    negative_name: str = "no match",
    title: str = "Confusion matrix",
) -> None:
    grid = [[metrics.tp, metrics.fn], [metrics.fp, metrics.tn]]
    fig, ax = plt.subplots(figsize=(4.2, 3.6))
    ax.imshow(grid, cmap="Blues")
    for i, row in enumerate(grid):
        for j, value in enumerate(row):
            color = "white" if value > max(max(r) for r in grid) / 2 else "black"
            ax.text(j, i, str(value), ha="center", va="center", color=color)
    ax.set_xticks([0, 1], [positive_name, negative_name])
    ax.set_yticks([0, 1], [positive_name, negative_name])
    ax.set_xlabel("predicted")
    ax.set_ylabel("actual")
    ax.set_title(title)
    _save(fig, path)


def save_token_frequency(
    freqs: Mapping[DrugType, Sequence[tuple[str, int]]],
    path: str | Path,
    title: str = "Most frequent name tokens per drug type",
) -> None:
    fig, axes = plt.subplots(1, len(freqs), figsize=(4.0 * len(freqs), 4.0))
    if len(freqs) == 1:
        axes = [axes]
    for ax, (klass, ranked) in zip(axes, freqs.items()):
        tokens = [t for t, _ in ranked]
        counts = [n for _, n in ranked]
        ax.barh(range(len(tokens)), counts, color="tab:blue")
        ax.set_yticks(range(len(tokens)), tokens)
        ax.invert_yaxis()
        ax.set_title(klass.value.replace("_", " "))
        ax.set_xlabel("count")
    fig.suptitle(title)
    _save(fig, path)


def save_reason_breakdown(
    decisions: Iterable[MatchDecision],
    path: str | Path,
    title: str = "Match decisions by reason",
) -> None:
    counts = Counter(d.reason.value for d in decisions)
    _save_bars(sorted(counts.items()), path, title)


def save_inconsistency_breakdown(
    report: PipelineReport,
    path: str | Path,
    title: str = "Approval inconsistencies by kind",
) -> None:
    counts = [(kind.value, n) for kind, n in sorted(report.summary.inconsistencies.items(), key=lambda kv: kv[0].value)]
    _save_bars(counts, path, title)


def _save_bars(items: Sequence[tuple[str, int]], path: str | Path, title: str) -> None:
    labels = [name for name, _ in items]
    values = [n for _, n in items]
    fig, ax = plt.subplots(figsize=(max(4.0, 1.3 * len(labels)), 3.6))
    ax.bar(range(len(labels)), values, color="tab:blue")
    ax.set_xticks(range(len(labels)), labels, rotation=30, ha="right")
    ax.set_ylabel("pairs")
    ax.set_title(title)
    _save(fig, path)
