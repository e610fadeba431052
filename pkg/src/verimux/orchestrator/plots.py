"""Static figures written next to reports (Agg backend, no display)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from ..verdict import TAGS  # noqa: E402

_COLORS = {"Valid": "tab:green", "Falsified": "tab:red", "Unknown": "tab:gray",
           "Timeout": "tab:orange", "Error": "black"}


def verdict_figure(report, path) -> Path:
    """Stacked bars: per engine, how many goals ended in each verdict."""
    engines = list(report.metadata.get("engines", []))
    for g in report.goals:
        for e in g.entries:
            if e.engine not in engines:
                engines.append(e.engine)
    labels = engines + ["combined"]
    counts = {t: [0] * len(labels) for t in TAGS}
    for g in report.goals:
        for e in g.entries:
            if e.verdict is not None:
                counts[e.verdict.tag][labels.index(e.engine)] += 1
        counts[g.combined.tag][-1] += 1
    fig, ax = plt.subplots(figsize=(1.6 + 1.2 * len(labels), 3.2))
    bottom = [0] * len(labels)
    for t in TAGS:
        if any(counts[t]):
            ax.bar(labels, counts[t], bottom=bottom, label=t, color=_COLORS[t])
            bottom = [b + c for b, c in zip(bottom, counts[t])]
    ax.set_ylabel("goals")
    ax.legend(fontsize=8, frameon=False)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def agreement_figure(table, path) -> Path:
    """Per-class share of rows whose transformed decision matched the relation."""
    names = [r.name for r in table.rows]
    pct = [r.percentage if r.percentage is not None else 0.0 for r in table.rows]
    fig, ax = plt.subplots(figsize=(1.6 + 0.8 * len(names), 3.0))
    ax.bar(names, pct, color="tab:blue")
    for k, r in enumerate(table.rows):
        ax.text(k, pct[k], f"{r.agree}/{r.count}", ha="center", va="bottom", fontsize=7)
    ax.set_ylim(0, 105)
    ax.set_ylabel("same decision (%)")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
