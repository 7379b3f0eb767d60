"""Label spaces, prediction records, confusion matrices and class collapse.

Confusion matrices are always stored with rows = actual class and
columns = predicted class.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from fusionbench.errors import (
    LabelSpaceMismatch,
    MalformedRecordError,
    MissingProbabilitiesError,
    ValidationError,
)

ORIENTATION = "rows=actual,columns=predicted"
PROB_SUM_TOL = 1e-6


@dataclass(frozen=True)
class LabelSpace:
    names: tuple[str, ...]

    def __post_init__(self):
        names = tuple(self.names)
        object.__setattr__(self, "names", names)
        if len(names) < 2:
            raise ValidationError(f"a label space needs at least 2 classes, got {len(names)}")
        for n in names:
            if not isinstance(n, str) or not n:
                raise ValidationError(f"class names must be non-empty strings, got {n!r}")
        if len(set(names)) != len(names):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise ValidationError(f"duplicate class names: {', '.join(dupes)}")

    @property
    def size(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise ValidationError(f"unknown class {name!r}; expected one of {list(self.names)}") from None

    def __len__(self):
        return len(self.names)


def argmax(probs: Sequence[float]) -> int:
    """Index of the largest entry; ties go to the lowest index."""
    return int(np.argmax(np.asarray(probs, dtype=np.float64)))


@dataclass(frozen=True)
class PredictionRecord:
    item_id: str
    true_label: int
    probs: tuple[float, ...] | None = None
    predicted_label: int | None = None

    def __post_init__(self):
        if self.probs is not None:
            object.__setattr__(self, "probs", tuple(float(p) for p in self.probs))

    @property
    def resolved_label(self) -> int:
        if self.predicted_label is not None:
            return self.predicted_label
        if self.probs is not None:
            return argmax(self.probs)
        raise MalformedRecordError(self.item_id, "has neither probabilities nor a predicted label")

    def check(self, k: int) -> None:
        """Validate against a label space of size ``k``."""
        if not 0 <= self.true_label < k:
            raise MalformedRecordError(self.item_id, f"true label {self.true_label} outside [0, {k})")
        if self.probs is None and self.predicted_label is None:
            raise MalformedRecordError(self.item_id, "has neither probabilities nor a predicted label")
        if self.predicted_label is not None and not 0 <= self.predicted_label < k:
            raise MalformedRecordError(
                self.item_id, f"predicted label {self.predicted_label} outside [0, {k})"
            )
        if self.probs is not None:
            if len(self.probs) != k:
                raise MalformedRecordError(self.item_id, f"expected {k} probabilities, got {len(self.probs)}")
            p = np.asarray(self.probs)
            if not np.all(np.isfinite(p)) or np.any(p < 0.0) or np.any(p > 1.0):
                raise MalformedRecordError(self.item_id, "probabilities must lie in [0, 1]")
            s = float(p.sum())
            if abs(s - 1.0) > PROB_SUM_TOL:
                raise MalformedRecordError(self.item_id, f"probabilities sum to {s:.9g}, not 1")
            if self.predicted_label is not None and self.predicted_label != argmax(self.probs):
                raise MalformedRecordError(
                    self.item_id,
                    f"predicted label {self.predicted_label} disagrees with argmax {argmax(self.probs)}",
                )


@dataclass(frozen=True)
class PredictionSet:
    space: LabelSpace
    records: tuple[PredictionRecord, ...]

    def __post_init__(self):
        records = tuple(self.records)
        object.__setattr__(self, "records", records)
        seen = set()
        for r in records:
            if r.item_id in seen:
                raise MalformedRecordError(r.item_id, "duplicate item id")
            seen.add(r.item_id)
            r.check(self.space.size)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    @property
    def has_probs(self) -> bool:
        return bool(self.records) and all(r.probs is not None for r in self.records)

    def prob_matrix(self) -> np.ndarray:
        """(N, K) array of probabilities; raises if any record lacks them."""
        missing = [r.item_id for r in self.records if r.probs is None]
        if missing:
            raise MissingProbabilitiesError(
                f"{len(missing)} record(s) have no probabilities (first: {missing[0]!r})"
            )
        if not self.records:
            return np.zeros((0, self.space.size))
        return np.array([r.probs for r in self.records], dtype=np.float64)

    def true_labels(self) -> np.ndarray:
        return np.array([r.true_label for r in self.records], dtype=np.int64)

    def predicted_labels(self) -> np.ndarray:
        return np.array([r.resolved_label for r in self.records], dtype=np.int64)

    def correct_ids(self) -> frozenset[str]:
        return frozenset(r.item_id for r in self.records if r.resolved_label == r.true_label)


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    space: LabelSpace
    counts: np.ndarray

    def __post_init__(self):
        arr = np.array(self.counts)
        k = self.space.size
        if arr.shape != (k, k):
            raise ValidationError(f"confusion matrix must be {k}x{k}, got shape {arr.shape}")
        if arr.dtype.kind == "f":
            if not np.all(arr == np.round(arr)):
                raise ValidationError("confusion matrix counts must be integers")
        elif arr.dtype.kind not in "iu":
            raise ValidationError("confusion matrix counts must be integers")
        arr = arr.astype(np.int64)
        if np.any(arr < 0):
            raise ValidationError("confusion matrix counts must be non-negative")
        arr.setflags(write=False)
        object.__setattr__(self, "counts", arr)

    @property
    def k(self) -> int:
        return self.space.size

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def trace(self) -> int:
        return int(np.trace(self.counts))

    @property
    def actual_totals(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def predicted_totals(self) -> np.ndarray:
        return self.counts.sum(axis=0)

    def diagonal(self) -> tuple[int, ...]:
        return tuple(int(v) for v in np.diag(self.counts))

    def __eq__(self, other):
        if not isinstance(other, ConfusionMatrix):
            return NotImplemented
        return self.space == other.space and np.array_equal(self.counts, other.counts)

    def __hash__(self):
        return hash((self.space, self.counts.tobytes()))


@dataclass(frozen=True)
class ClassMap:
    """Surjective mapping of a source label space onto a target label space."""

    source: LabelSpace
    target: LabelSpace
    assignment: tuple[int, ...] = field(default=())

    def __post_init__(self):
        a = tuple(int(i) for i in self.assignment)
        object.__setattr__(self, "assignment", a)
        if len(a) != self.source.size:
            raise ValidationError(
                f"class map assigns {len(a)} classes but the source space has {self.source.size}"
            )
        for s, t in enumerate(a):
            if not 0 <= t < self.target.size:
                raise ValidationError(f"source class {self.source.names[s]!r} maps outside the target space")
        unused = [self.target.names[t] for t in range(self.target.size) if t not in a]
        if unused:
            raise ValidationError(f"class map is not surjective; no source class maps to {unused}")

    @classmethod
    def identity(cls, space: LabelSpace) -> "ClassMap":
        return cls(space, space, tuple(range(space.size)))

    @classmethod
    def one_vs_rest(cls, space: LabelSpace, positive: str, rest: str | None = None) -> "ClassMap":
        """Map ``positive`` to target index 0 and every other class to index 1."""
        pos = space.index(positive)
        rest = rest or f"non-{positive}"
        target = LabelSpace((positive, rest))
        return cls(space, target, tuple(0 if i == pos else 1 for i in range(space.size)))

    @classmethod
    def from_groups(cls, space: LabelSpace, groups: Mapping[str, Iterable[str]]) -> "ClassMap":
        target = LabelSpace(tuple(groups))
        assignment: list[int | None] = [None] * space.size
        for t, members in enumerate(groups.values()):
            for name in members:
                s = space.index(name)
                if assignment[s] is not None:
                    raise ValidationError(f"class {name!r} assigned to more than one target class")
                assignment[s] = t
        missing = [space.names[i] for i, t in enumerate(assignment) if t is None]
        if missing:
            raise ValidationError(f"class map leaves source classes unassigned: {missing}")
        return cls(space, target, tuple(assignment))

    def matrix(self) -> np.ndarray:
        """(K_source, K_target) 0/1 indicator matrix."""
        m = np.zeros((self.source.size, self.target.size), dtype=np.int64)
        m[np.arange(self.source.size), self.assignment] = 1
        return m


def build_cm(preds: PredictionSet) -> ConfusionMatrix:
    k = preds.space.size
    counts = np.zeros((k, k), dtype=np.int64)
    for r in preds.records:
        counts[r.true_label, r.resolved_label] += 1
    return ConfusionMatrix(preds.space, counts)


def collapse(cm: ConfusionMatrix, cmap: ClassMap) -> ConfusionMatrix:
    if cmap.source != cm.space:
        raise LabelSpaceMismatch("class map source space does not match the confusion matrix space")
    m = cmap.matrix()
    return ConfusionMatrix(cmap.target, m.T @ cm.counts @ m)


def collapse_preds(preds: PredictionSet, cmap: ClassMap) -> PredictionSet:
    """Sum probability mass over each target class's preimage."""
    if cmap.source != preds.space:
        raise LabelSpaceMismatch("class map source space does not match the prediction space")
    m = cmap.matrix().astype(np.float64)
    probs = preds.prob_matrix() @ m
    records = tuple(
        PredictionRecord(r.item_id, cmap.assignment[r.true_label], tuple(p))
        for r, p in zip(preds.records, probs)
    )
    return PredictionSet(cmap.target, records)


@dataclass(frozen=True)
class PrevalenceReport:
    positive_class: str
    positives: int
    negatives: int

    @property
    def total(self) -> int:
        return self.positives + self.negatives

    @property
    def prevalence(self) -> float:
        return self.positives / self.total if self.total else 0.0


def dataset_summary(preds: PredictionSet, positive: int, cmap: ClassMap | None = None) -> PrevalenceReport:
    """Count actual positives and negatives after mapping into the target space."""
    cmap = cmap or ClassMap.identity(preds.space)
    if cmap.source != preds.space:
        raise LabelSpaceMismatch("class map source space does not match the prediction space")
    if not 0 <= positive < cmap.target.size:
        raise ValidationError(f"positive index {positive} outside the target space")
    pos = sum(1 for r in preds.records if cmap.assignment[r.true_label] == positive)
    return PrevalenceReport(cmap.target.names[positive], pos, len(preds) - pos)
