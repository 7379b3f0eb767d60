"""Classifier evaluation and late-fusion toolkit."""

__version__ = "0.1.0"

from fusionbench.core import (
    ClassMap,
    ConfusionMatrix,
    LabelSpace,
    PredictionRecord,
    PredictionSet,
    build_cm,
    collapse,
    collapse_preds,
    dataset_summary,
)
from fusionbench.metrics import (
    BinaryCounts,
    MetricHexagon,
    binarize,
    binary_metrics,
    per_class_table,
    pooled_hexagon,
    rk_coefficient,
)

__all__ = [
    "BinaryCounts",
    "ClassMap",
    "ConfusionMatrix",
    "LabelSpace",
    "MetricHexagon",
    "PredictionRecord",
    "PredictionSet",
    "binarize",
    "binary_metrics",
    "build_cm",
    "collapse",
    "collapse_preds",
    "dataset_summary",
    "per_class_table",
    "pooled_hexagon",
    "rk_coefficient",
]
