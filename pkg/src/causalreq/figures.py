"""Matplotlib figure rendering for the report paths.

Each report command renders its figures to files next to the delimited
output. The Agg backend keeps rendering headless-safe.
"""

from __future__ import annotations

from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .agreement import AgreementReport
from .evaluation import EvaluationReport
from .prevalence import CategoryDistribution


def render_domain_ratio_figure(
    series: Sequence[tuple[str, float, int]], path: str, title: str = "Causal share per domain"
) -> None:
    """Horizontal bars of the per-domain causal ratio series."""
    if not series:
        return
    domains = [d for d, _, _ in series]
    ratios = [r * 100 for _, r, _ in series]
    fig, ax = plt.subplots(figsize=(8, max(2.5, 0.4 * len(domains))))
    ax.barh(domains, ratios, color="#4878a8")
    ax.set_xlabel("causal sentences (%)")
    ax.set_title(title)
    ax.invert_yaxis()
    for i, value in enumerate(ratios):
        ax.text(value + 0.5, i, f"{value:.1f}", va="center", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_category_distribution_figure(dist: CategoryDistribution, path: str) -> None:
    """Per-category value counts as a grid of bar plots."""
    categories = [c for c, counts in dist.overall.items() if counts]
    if not categories:
        return
    cols = 3
    rows = (len(categories) + cols - 1) // cols
    fig, axes = plt.subplots(rows, cols, figsize=(3.2 * cols, 2.6 * rows), squeeze=False)
    for i, category in enumerate(categories):
        ax = axes[i // cols][i % cols]
        counts = dist.overall[category]
        keys = sorted(counts)
        ax.bar(keys, [counts[k] for k in keys], color="#4878a8")
        ax.set_title(category, fontsize=9)
        ax.tick_params(labelsize=8)
    for j in range(len(categories), rows * cols):
        axes[j // cols][j % cols].axis("off")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_agreement_figure(report: AgreementReport, path: str) -> None:
    """Grouped bars of percent agreement, kappa, and AC1 per category."""
    categories = list(report.categories)
    x = range(len(categories))
    width = 0.27
    fig, ax = plt.subplots(figsize=(max(6, 1.1 * len(categories)), 3.5))
    ax.bar(
        [i - width for i in x],
        [report.stats[c].percent_agreement for c in categories],
        width,
        label="agreement",
        color="#4878a8",
    )
    ax.bar(
        list(x),
        [report.stats[c].kappa or 0.0 for c in categories],
        width,
        label="kappa",
        color="#c26a4a",
    )
    ax.bar(
        [i + width for i in x],
        [report.stats[c].ac1 for c in categories],
        width,
        label="AC1",
        color="#6a9b5e",
    )
    ax.set_xticks(list(x))
    ax.set_xticklabels(categories, rotation=30, ha="right", fontsize=8)
    ax.set_ylim(0, 1.05)
    ax.legend(fontsize=8)
    ax.set_title("Inter-annotator agreement per category")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_evaluation_figure(report: EvaluationReport, path: str, title: str = "Evaluation") -> None:
    """Per-class recall/precision/F1 bars plus the accuracy line."""
    metrics = ("recall", "precision", "f1")
    causal = [getattr(report.causal, m) for m in metrics]
    not_causal = [getattr(report.not_causal, m) for m in metrics]
    x = range(len(metrics))
    width = 0.35
    fig, ax = plt.subplots(figsize=(5.5, 3.5))
    ax.bar([i - width / 2 for i in x], causal, width, label="causal", color="#4878a8")
    ax.bar([i + width / 2 for i in x], not_causal, width, label="not causal", color="#c26a4a")
    ax.axhline(report.accuracy, color="#444444", linestyle="--", linewidth=1, label="accuracy")
    ax.set_xticks(list(x))
    ax.set_xticklabels(metrics)
    ax.set_ylim(0, 1.05)
    ax.legend(fontsize=8)
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_significance_figure(
    rows: Sequence[tuple[str, float]], corrected_level: float, path: str, title: str
) -> None:
    """Per-domain -log10 p bars against the corrected significance level."""
    import math

    if not rows:
        return
    domains = [d for d, _ in rows]
    logs = [-math.log10(max(p, 1e-300)) for _, p in rows]
    fig, ax = plt.subplots(figsize=(8, max(2.5, 0.4 * len(domains))))
    ax.barh(domains, logs, color="#4878a8")
    ax.axvline(
        -math.log10(corrected_level),
        color="#c26a4a",
        linestyle="--",
        linewidth=1,
        label="corrected level",
    )
    ax.set_xlabel("-log10 p")
    ax.set_title(title)
    ax.invert_yaxis()
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
