"""ROC and precision-recall curves for a designated positive class."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from fusionbench.core import PredictionSet
from fusionbench.errors import DegenerateInputError, ValidationError


@dataclass(frozen=True)
class ScoredItem:
    score: float
    is_positive: bool

    def __post_init__(self):
        if not np.isfinite(self.score):
            raise ValidationError(f"score must be finite, got {self.score!r}")


@dataclass(frozen=True)
class Curve:
    kind: str  # "roc" or "prc"
    points: tuple[tuple[float, float], ...]
    auc: float
    baseline: float
    thresholds: tuple[float, ...] = ()

    @property
    def x(self) -> np.ndarray:
        return np.array([p[0] for p in self.points])

    @property
    def y(self) -> np.ndarray:
        return np.array([p[1] for p in self.points])

    @property
    def axes(self) -> tuple[str, str]:
        return ("fpr", "tpr") if self.kind == "roc" else ("recall", "precision")


def _arrays(items) -> tuple[np.ndarray, np.ndarray]:
    items = list(items)
    scores = np.array([float(i.score) for i in items], dtype=np.float64)
    labels = np.array([bool(i.is_positive) for i in items], dtype=bool)
    if not np.all(np.isfinite(scores)):
        raise ValidationError("scores must be finite")
    return scores, labels


def _sweep(scores: np.ndarray, labels: np.ndarray):
    """Cumulative TP/FP counts at each distinct threshold, highest first."""
    order = np.argsort(-scores, kind="mergesort")
    s, y = scores[order], labels[order]
    # last index of each run of equal scores
    ends = np.r_[np.nonzero(np.diff(s))[0], len(s) - 1]
    tps = np.cumsum(y)[ends]
    fps = np.cumsum(~y)[ends]
    return s[ends], tps, fps


def roc(items: Iterable[ScoredItem]) -> Curve:
    scores, labels = _arrays(items)
    n_pos = int(labels.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0:
        raise DegenerateInputError("ROC needs at least one positive item; none given")
    if n_neg == 0:
        raise DegenerateInputError("ROC needs at least one negative item; none given")
    thr, tps, fps = _sweep(scores, labels)
    tpr = np.r_[0.0, tps / n_pos]
    fpr = np.r_[0.0, fps / n_neg]
    # trapezoids give tied groups half credit, matching pairwise concordance
    auc = float(np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1]) / 2.0))
    return Curve(
        "roc",
        tuple(zip(fpr.tolist(), tpr.tolist())),
        auc,
        0.5,
        (float("inf"), *thr.tolist()),
    )


def prc(items: Iterable[ScoredItem]) -> Curve:
    scores, labels = _arrays(items)
    n_pos = int(labels.sum())
    if n_pos == 0:
        raise DegenerateInputError("PRC needs at least one positive item; none given")
    thr, tps, fps = _sweep(scores, labels)
    recall = tps / n_pos
    precision = tps / (tps + fps)
    # step interpolation: each recall increment is credited at its own precision
    auc = float(np.sum(np.diff(np.r_[0.0, recall]) * precision))
    return Curve(
        "prc",
        tuple(zip(recall.tolist(), precision.tolist())),
        auc,
        n_pos / len(labels),
        tuple(thr.tolist()),
    )


def scored_items(preds: PredictionSet, positive: int) -> list[ScoredItem]:
    """Score each record by its probability for class ``positive``."""
    probs = preds.prob_matrix()
    if not 0 <= positive < preds.space.size:
        raise ValidationError(f"positive index {positive} outside the label space")
    return [ScoredItem(float(p[positive]), r.true_label == positive) for r, p in zip(preds.records, probs)]


def items_from_arrays(scores: Sequence[float], is_positive: Sequence[bool]) -> list[ScoredItem]:
    return [ScoredItem(float(s), bool(y)) for s, y in zip(scores, is_positive)]
