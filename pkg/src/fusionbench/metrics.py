"""One-vs-rest metrics, the pooled six-metric hexagon and the Rk coefficient.

Counts stay exact Python integers until the final division. A metric whose
denominator is zero is reported as 0.0 and its name is added to
``MetricHexagon.undefined``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from fusionbench.core import ConfusionMatrix
from fusionbench.errors import EmptyInputError, ValidationError

METRIC_ORDER = ("rec", "prec", "spec", "acc", "mcc", "f1")
METRIC_LABELS = ("REC", "PREC", "SPEC", "ACC", "MCC", "F1")


@dataclass(frozen=True)
class BinaryCounts:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class MetricHexagon:
    rec: float
    prec: float
    spec: float
    acc: float
    mcc: float
    f1: float
    rk: float
    undefined: frozenset[str] = field(default_factory=frozenset)

    def values(self) -> tuple[float, ...]:
        """The six hexagon metrics in REC, PREC, SPEC, ACC, MCC, F1 order."""
        return tuple(getattr(self, k) for k in METRIC_ORDER)

    def as_dict(self) -> dict:
        d = {k: getattr(self, k) for k in METRIC_ORDER}
        d["rk"] = self.rk
        d["undefined"] = sorted(self.undefined)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "MetricHexagon":
        return cls(**{k: float(d[k]) for k in METRIC_ORDER}, rk=float(d["rk"]),
                   undefined=frozenset(d.get("undefined", ())))


def _ratio(num: int, den: int, name: str, undefined: set) -> float:
    if den == 0:
        undefined.add(name)
        return 0.0
    return num / den


def _sqrt_int(n: int) -> float:
    # exact for perfect squares, so a perfect classifier scores exactly 1
    r = math.isqrt(n)
    return float(r) if r * r == n else math.sqrt(n)


def _corr(num: int, factors: tuple[int, ...], name: str, undefined: set) -> float:
    if any(f == 0 for f in factors):
        undefined.add(name)
        return 0.0
    return num / _sqrt_int(math.prod(factors))


def binarize(cm: ConfusionMatrix, class_k: int) -> BinaryCounts:
    if not 0 <= class_k < cm.k:
        raise ValidationError(f"class index {class_k} outside [0, {cm.k})")
    tp = int(cm.counts[class_k, class_k])
    fn = int(cm.counts[class_k].sum()) - tp
    fp = int(cm.counts[:, class_k].sum()) - tp
    return BinaryCounts(tp, fp, fn, cm.total - tp - fp - fn)


def binary_metrics(b: BinaryCounts) -> MetricHexagon:
    n = b.total
    if n == 0:
        raise EmptyInputError("cannot compute metrics on zero items")
    und: set[str] = set()
    rec = _ratio(b.tp, b.tp + b.fn, "rec", und)
    prec = _ratio(b.tp, b.tp + b.fp, "prec", und)
    spec = _ratio(b.tn, b.tn + b.fp, "spec", und)
    acc = (b.tp + b.tn) / n
    if "rec" in und or "prec" in und or b.tp == 0:
        f1 = 0.0
        und.add("f1")
    else:
        # equals 2·P·R/(P+R) but stays in exact integer arithmetic
        f1 = 2 * b.tp / (2 * b.tp + b.fp + b.fn)
    mcc = _corr(
        b.tp * b.tn - b.fp * b.fn,
        (b.tp + b.fp, b.tp + b.fn, b.tn + b.fp, b.tn + b.fn),
        "mcc",
        und,
    )
    if "mcc" in und:
        und.add("rk")
    return MetricHexagon(rec, prec, spec, acc, mcc, f1, rk=mcc, undefined=frozenset(und))


def _rk(cm: ConfusionMatrix) -> tuple[float, bool]:
    n = cm.total
    if n == 0:
        raise EmptyInputError("cannot compute Rk on an empty confusion matrix")
    t = [int(v) for v in cm.actual_totals]
    p = [int(v) for v in cm.predicted_totals]
    num = cm.trace * n - sum(a * b for a, b in zip(t, p))
    dp = n * n - sum(v * v for v in p)
    dt = n * n - sum(v * v for v in t)
    if dp == 0 or dt == 0:
        return 0.0, False
    return num / _sqrt_int(dp * dt), True


def rk_coefficient(cm: ConfusionMatrix) -> float:
    """Gorodkin's K-class correlation coefficient, 0.0 when undefined."""
    return _rk(cm)[0]


def pooled_counts(cm: ConfusionMatrix) -> BinaryCounts:
    """Sum of the K one-vs-rest decompositions of ``cm``."""
    n, c, k = cm.total, cm.trace, cm.k
    return BinaryCounts(tp=c, fp=n - c, fn=n - c, tn=k * n - 2 * n + c)


def pooled_hexagon(cm: ConfusionMatrix, aggregate: str = "pooled") -> MetricHexagon:
    """Six-metric summary of a multi-class confusion matrix.

    Parameters
    ----------
    cm : ConfusionMatrix
    aggregate : {"pooled", "macro"}
        ``pooled`` sums the one-vs-rest counts over classes before computing
        each metric (so REC = PREC = F1 for single-label data). ``macro``
        averages the per-class metrics instead.
    """
    if cm.total == 0:
        raise EmptyInputError("cannot compute metrics on an empty confusion matrix")
    rk, rk_ok = _rk(cm)
    if aggregate == "pooled":
        h = binary_metrics(pooled_counts(cm))
        und = set(h.undefined) - {"rk"}
    elif aggregate == "macro":
        rows = [binary_metrics(binarize(cm, i)) for i in range(cm.k)]
        vals = {m: float(np.mean([getattr(r, m) for r in rows])) for m in METRIC_ORDER}
        h = MetricHexagon(**vals, rk=0.0)
        und = {m for r in rows for m in r.undefined if m != "rk"}
    else:
        raise ValidationError(f"unknown aggregation {aggregate!r}; use 'pooled' or 'macro'")
    if not rk_ok:
        und.add("rk")
    return MetricHexagon(h.rec, h.prec, h.spec, h.acc, h.mcc, h.f1, rk=rk, undefined=frozenset(und))


def per_class_table(cm: ConfusionMatrix) -> list[tuple[str, MetricHexagon]]:
    return [(name, binary_metrics(binarize(cm, i))) for i, name in enumerate(cm.space.names)]
