"""Matplotlib renderings saved next to the delimited reports.

Every function takes data already computed by the report path and writes
a PNG; nothing here recomputes statistics. The Agg backend is forced so
rendering works headless.
"""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .score_stats import EcdfBand, ScoreHistogram, HISTOGRAM_BIN_LABELS
from .timeline_analytics import Block

_DPI = 150


def _save(fig: "plt.Figure", path: str | Path) -> None:
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def render_rule_counts(path: str | Path, hits_per_rule: Mapping[str, int]) -> None:
    """Horizontal bars of hit counts per rule, busiest rule on top."""
    items = sorted(hits_per_rule.items(), key=lambda kv: (kv[1], kv[0]))
    fig, ax = plt.subplots(figsize=(8, max(2.0, 0.3 * len(items) + 1)))
    if items:
        labels, counts = zip(*items)
        ax.barh(range(len(items)), counts, color="#b5452a")
        ax.set_yticks(range(len(items)), labels, fontsize=7)
    ax.set_xlabel("hits")
    ax.set_title("Hits per dictionary rule")
    fig.tight_layout()
    _save(fig, path)


def render_duration_histogram(path: str | Path, periods: Mapping[str, Sequence[int]]) -> None:
    """Overlaid assessment-duration histograms, one series per period."""
    fig, ax = plt.subplots(figsize=(8, 4.5))
    for label, durations in periods.items():
        if durations:
            ax.hist(durations, bins=40, alpha=0.5, label=f"{label} (n={len(durations)})")
    ax.set_xlabel("assessment duration (days)")
    ax.set_ylabel("articles")
    ax.set_title("Assessment durations")
    if periods:
        ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, path)


def render_blocks(path: str | Path, blocks: Sequence[Block]) -> None:
    """Block sizes by acceptance anchor date."""
    fig, ax = plt.subplots(figsize=(8, 4.5))
    if blocks:
        dates = [b.anchor[2] for b in blocks]
        sizes = [b.size for b in blocks]
        ax.stem(dates, sizes, basefmt=" ")
        fig.autofmt_xdate(rotation=30)
    ax.set_xlabel("acceptance anchor")
    ax.set_ylabel("block size")
    ax.set_title("Same-date blocks")
    fig.tight_layout()
    _save(fig, path)


def render_ecdf_bands(path: str | Path, bands: Mapping[str, EcdfBand]) -> None:
    """Step ECDFs with shaded confidence envelopes on one axis."""
    fig, ax = plt.subplots(figsize=(8, 5))
    for label, band in bands.items():
        xs = [0.0, *band.samples, 1.0]
        mids = [band.cdf(x) for x in xs]
        lowers = [max(0.0, m - band.epsilon) for m in mids]
        uppers = [min(1.0, m + band.epsilon) for m in mids]
        (line,) = ax.step(xs, mids, where="post", label=f"{label} (n={band.n})")
        ax.fill_between(xs, lowers, uppers, step="post", alpha=0.2, color=line.get_color())
    ax.set_xlabel("detector score")
    ax.set_ylabel("cumulative fraction")
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1.02)
    ax.set_title("Score ECDFs with confidence bands")
    ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, path)


def render_score_histograms(path: str | Path, histograms: Mapping[str, ScoreHistogram]) -> None:
    """Grouped decile bars, percentages per score set."""
    fig, ax = plt.subplots(figsize=(9, 4.5))
    names = list(histograms)
    width = 0.8 / max(1, len(names))
    for i, name in enumerate(names):
        pct = histograms[name].percentages()
        xs = [b + i * width for b in range(10)]
        ax.bar(xs, pct, width=width, label=name)
    ax.set_xticks([b + 0.4 for b in range(10)], HISTOGRAM_BIN_LABELS, rotation=30, fontsize=7)
    ax.set_ylabel("percent of documents")
    ax.set_title("Detector score distribution")
    ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, path)
