"""Matplotlib figures written next to the delimited report files.

The output format follows the file suffix (``.svg``, ``.png``, ``.pdf``).
SVG output is made byte-stable by fixing the hash salt and dropping the
creation date.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from fusionbench.core import PrevalenceReport  # noqa: E402
from fusionbench.curves import Curve  # noqa: E402

STYLE = {
    "font.size": 10,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "svg.hashsalt": "fusionbench",
    "svg.fonttype": "none",
}


def _save(fig, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    meta = {"Date": None} if path.suffix.lower() == ".svg" else None
    fig.savefig(path, metadata=meta, bbox_inches="tight")
    plt.close(fig)


def plot_curves(curves: Sequence[tuple[str, Curve]], path, title: str = "") -> None:
    """Overlay ROC or PRC curves of one kind, with the chance/prevalence baseline."""
    kinds = {c.kind for _, c in curves}
    if len(kinds) != 1:
        raise ValueError("plot_curves needs curves of a single kind")
    kind = kinds.pop()
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4.5, 4.2))
        for label, c in curves:
            name = f"{label} (AUC={c.auc:.4f})" if label else f"AUC={c.auc:.4f}"
            if kind == "prc":
                ax.step(c.x, c.y, where="post", label=name)
            else:
                ax.plot(c.x, c.y, label=name)
        if kind == "roc":
            ax.plot([0, 1], [0, 1], ls="--", color="grey", lw=1, label="chance")
            ax.set_xlabel("False positive rate")
            ax.set_ylabel("True positive rate")
        else:
            base = curves[0][1].baseline
            ax.axhline(base, ls="--", color="grey", lw=1, label=f"baseline={base:.4f}")
            ax.set_xlabel("Recall")
            ax.set_ylabel("Precision")
        ax.set_xlim(0, 1)
        ax.set_ylim(0, 1.02)
        if title:
            ax.set_title(title)
        ax.legend(loc="lower right" if kind == "roc" else "lower left", fontsize=8)
        _save(fig, path)


def plot_dataset_ratios(datasets: Sequence[tuple[str, PrevalenceReport]], path) -> None:
    """Stacked percentage bars of positives vs negatives per dataset, counts inside."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(1.4 * max(len(datasets), 2) + 1, 3.8))
        names = [n for n, _ in datasets]
        pos = [100.0 * r.prevalence for _, r in datasets]
        neg = [100.0 - p for p in pos]
        pos_label = datasets[0][1].positive_class if datasets else "positive"
        b1 = ax.bar(names, pos, label=pos_label, color="#d62728")
        b2 = ax.bar(names, neg, bottom=pos, label=f"non-{pos_label}", color="#1f77b4")
        ax.bar_label(b1, labels=[str(r.positives) for _, r in datasets], label_type="center", color="white")
        ax.bar_label(b2, labels=[str(r.negatives) for _, r in datasets], label_type="center", color="white")
        ax.set_ylabel("Percentage")
        ax.set_ylim(0, 100)
        ax.legend(loc="upper center", bbox_to_anchor=(0.5, -0.12), ncol=2, fontsize=8)
        _save(fig, path)
