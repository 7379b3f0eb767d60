"""Multiclass LogitBoost with single-attribute linear regressors.

Each boosting iteration fits, for every class, the one attribute whose
weighted least-squares line best explains the class's working response. The
class scores are kept centred (they sum to zero over classes), so the
posterior is the softmax of the scores. Because every base learner is linear,
a fitted model collapses to one linear function per class:

    score_c(x) = sum_i beta_ci * x_i + beta_c0

The number of iterations is picked by stratified k-fold cross-validation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from fusionbench.core import LabelSpace, PredictionRecord, PredictionSet
from fusionbench.errors import StratificationError, ValidationError

MODEL_FORMAT = "fusionbench.logitboost"
MODEL_VERSION = 1

Z_MAX = 4.0
W_MIN = 2 * np.finfo(np.float64).eps
MAX_HALVINGS = 30


@dataclass(frozen=True, eq=False)
class FeatureDataset:
    space: LabelSpace
    features: np.ndarray
    labels: np.ndarray
    feature_names: tuple[str, ...] = ()

    def __post_init__(self):
        X = np.array(self.features, dtype=np.float64, ndmin=2)
        y = np.array(self.labels, dtype=np.int64).ravel()
        if X.shape[0] != y.shape[0]:
            raise ValidationError(f"{X.shape[0]} feature rows but {y.shape[0]} labels")
        if X.size and not np.all(np.isfinite(X)):
            raise ValidationError("features must be finite")
        if np.any((y < 0) | (y >= self.space.size)):
            raise ValidationError("labels outside the label space")
        names = tuple(self.feature_names) or tuple(f"f{i}" for i in range(X.shape[1]))
        if len(names) != X.shape[1]:
            raise ValidationError(f"{len(names)} feature names for {X.shape[1]} features")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "feature_names", names)

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def rows(self) -> list[tuple[np.ndarray, int]]:
        return list(zip(self.features, self.labels.tolist()))

    def __len__(self):
        return self.features.shape[0]

    def __eq__(self, other):
        if not isinstance(other, FeatureDataset):
            return NotImplemented
        return (
            self.space == other.space
            and self.feature_names == other.feature_names
            and np.array_equal(self.features, other.features)
            and np.array_equal(self.labels, other.labels)
        )

    @classmethod
    def concat(cls, parts: Sequence["FeatureDataset"]) -> "FeatureDataset":
        if not parts:
            raise ValidationError("nothing to concatenate")
        first = parts[0]
        for p in parts[1:]:
            if p.space != first.space or p.n_features != first.n_features:
                raise ValidationError("feature datasets differ in label space or feature count")
        return cls(
            first.space,
            np.vstack([p.features for p in parts]),
            np.concatenate([p.labels for p in parts]),
            first.feature_names,
        )


# (attribute index, slope, intercept)
Regressor = tuple[int, float, float]


@dataclass(frozen=True, eq=False)
class AdditiveModel:
    space: LabelSpace
    n_features: int
    stages: tuple[tuple[Regressor, ...], ...]
    seed: int = 0
    cv_errors: tuple[int, ...] = ()
    coefficients: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        stages = tuple(tuple((int(a), float(s), float(b)) for a, s, b in st) for st in self.stages)
        object.__setattr__(self, "stages", stages)
        k, n = self.space.size, self.n_features
        coef = np.zeros((k, n + 1))
        for st in stages:
            if len(st) != k:
                raise ValidationError(f"stage has {len(st)} regressors for {k} classes")
            raw = np.zeros((k, n + 1))
            for c, (a, s, b) in enumerate(st):
                if not 0 <= a < max(n, 1):
                    raise ValidationError(f"regressor attribute {a} outside [0, {n})")
                if n:
                    raw[c, a] += s
                raw[c, n] += b
            coef += (k - 1) / k * (raw - raw.mean(axis=0))
        coef.setflags(write=False)
        object.__setattr__(self, "coefficients", coef)

    @property
    def n_iterations(self) -> int:
        return len(self.stages)

    def scores(self, X) -> np.ndarray:
        X = np.array(X, dtype=np.float64, ndmin=2)
        if X.shape[1] != self.n_features:
            raise ValidationError(f"model expects {self.n_features} features, got {X.shape[1]}")
        return X @ self.coefficients[:, :-1].T + self.coefficients[:, -1]

    def to_json(self) -> str:
        doc = {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "labels": list(self.space.names),
            "n_features": self.n_features,
            "n_iterations": self.n_iterations,
            "seed": self.seed,
            "cv_errors": list(self.cv_errors),
            "stages": [[list(r) for r in st] for st in self.stages],
        }
        return json.dumps(doc) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "AdditiveModel":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as e:
            raise ValidationError(f"model file is not valid JSON: {e}") from None
        if doc.get("format") != MODEL_FORMAT or doc.get("version") != MODEL_VERSION:
            raise ValidationError("not a version-1 LogitBoost model file")
        model = cls(
            LabelSpace(tuple(doc["labels"])),
            int(doc["n_features"]),
            tuple(tuple(tuple(r) for r in st) for st in doc["stages"]),
            int(doc.get("seed", 0)),
            tuple(doc.get("cv_errors", ())),
        )
        if model.n_iterations != doc["n_iterations"]:
            raise ValidationError("declared iteration count does not match the stored stages")
        return model


def _softmax_rows(F: np.ndarray) -> np.ndarray:
    e = np.exp(F - F.max(axis=1, keepdims=True))
    return e / e.sum(axis=1, keepdims=True)


def posterior(model: AdditiveModel, x) -> np.ndarray:
    """Class probabilities for one feature vector."""
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.size != model.n_features:
        raise ValidationError(f"model expects {model.n_features} features, got {x.size}")
    return _softmax_rows(model.scores(x[None, :]))[0]


def _best_regressor(X: np.ndarray, z: np.ndarray, w: np.ndarray, varying: np.ndarray) -> Regressor:
    """Single-attribute weighted least-squares fit with the lowest weighted SSE."""
    sw = w.sum()
    zm = w @ z / sw
    szz = w @ (z - zm) ** 2
    if X.shape[1] == 0:
        return 0, 0.0, float(zm)
    xm = w @ X / sw
    Xc = X - xm
    sxx = w @ Xc**2
    sxz = (w * (z - zm)) @ Xc
    safe = varying & (sxx > 0)
    slope = np.where(safe, sxz / np.where(safe, sxx, 1.0), 0.0)
    sse = szz - slope * sxz
    a = int(np.argmin(sse))
    s = float(slope[a])
    return a, s, float(zm - s * xm[a])


def _log_loss(P: np.ndarray, y: np.ndarray) -> float:
    if not len(y):
        return 0.0
    p = np.clip(P[np.arange(len(y)), y], 1e-300, None)
    return float(-np.mean(np.log(p)))


class _Booster:
    """Stagewise state for one training set, optionally tracking a held-out set."""

    def __init__(self, X, y, k, X_eval=None):
        self.X, self.y, self.k = X, y, k
        self.Y = np.eye(k)[y]
        self.F = np.zeros((len(y), k))
        self.P = np.full((len(y), k), 1.0 / k)
        self.varying = X.max(axis=0) > X.min(axis=0) if len(y) else np.zeros(X.shape[1], bool)
        self.X_eval = X_eval
        self.F_eval = None if X_eval is None else np.zeros((X_eval.shape[0], k))

    def step(self) -> tuple[Regressor, ...]:
        k, X = self.k, self.X
        stage = []
        fs = np.zeros_like(self.F)
        for c in range(k):
            p = self.P[:, c]
            pos = self.Y[:, c] == 1
            with np.errstate(divide="ignore"):
                z = np.where(pos, 1.0 / p, -1.0 / (1.0 - p))
            z = np.clip(z, -Z_MAX, Z_MAX)
            w = np.maximum(p * (1.0 - p), W_MIN)
            a, s, b = _best_regressor(X, z, w, self.varying)
            fs[:, c] = b + (s * X[:, a] if X.shape[1] else 0.0)
            stage.append((a, s, b))
        delta = (k - 1) / k * (fs - fs.mean(axis=1, keepdims=True))
        # the Newton step can overshoot; halve it until the training loss does not rise
        before = self.log_loss()
        step = 1.0
        for _ in range(MAX_HALVINGS):
            P = _softmax_rows(self.F + step * delta)
            if _log_loss(P, self.y) <= before:
                break
            step *= 0.5
        else:
            step = 0.0
            P = self.P
        self.F = self.F + step * delta
        self.P = P
        stage = tuple((a, s * step, b * step) for a, s, b in stage)
        if self.X_eval is not None:
            fe = np.zeros_like(self.F_eval)
            for c, (a, s, b) in enumerate(stage):
                fe[:, c] = b + (s * self.X_eval[:, a] if self.X_eval.shape[1] else 0.0)
            self.F_eval += (k - 1) / k * (fe - fe.mean(axis=1, keepdims=True))
        return stage

    def log_loss(self) -> float:
        return _log_loss(self.P, self.y)


def stratified_folds(labels, folds: int, seed: int = 0) -> np.ndarray:
    """Fold index per row; every class is spread round-robin over the folds."""
    y = np.asarray(labels, dtype=np.int64)
    if folds < 2:
        raise StratificationError(f"need at least 2 folds, got {folds}")
    present, counts = np.unique(y, return_counts=True)
    if len(present) and counts.min() < folds:
        c = present[np.argmin(counts)]
        raise StratificationError(
            f"{folds} folds requested but class index {c} has only {counts.min()} rows"
        )
    rng = np.random.default_rng(seed)
    out = np.empty(len(y), dtype=np.int64)
    offset = 0
    for c in present:
        idx = rng.permutation(np.nonzero(y == c)[0])
        out[idx] = (np.arange(len(idx)) + offset) % folds
        offset += len(idx)
    return out


def boost(data: FeatureDataset, n_iter: int) -> tuple[AdditiveModel, list[float]]:
    """Run exactly ``n_iter`` iterations on all of ``data``.

    Returns the model and the training log-loss after each iteration.
    """
    b = _Booster(data.features, data.labels, data.space.size)
    stages, losses = [], []
    for _ in range(n_iter):
        stages.append(b.step())
        losses.append(b.log_loss())
    return AdditiveModel(data.space, data.n_features, tuple(stages)), losses


def cv_error_curve(data: FeatureDataset, max_iter: int, fold_ids: np.ndarray) -> np.ndarray:
    """Total held-out misclassifications after 1..max_iter iterations."""
    k = data.space.size
    errors = np.zeros(max_iter, dtype=np.int64)
    X, y = data.features, data.labels
    for f in np.unique(fold_ids):
        test = fold_ids == f
        b = _Booster(X[~test], y[~test], k, X_eval=X[test])
        for m in range(max_iter):
            b.step()
            errors[m] += int(np.sum(np.argmax(b.F_eval, axis=1) != y[test]))
    return errors


def choose_iterations(errors: Sequence[int], patience: int | None = 50) -> int:
    """First iteration count reaching the lowest error before the scan stalls."""
    best_m, best = 1, errors[0]
    for m, e in enumerate(errors[1:], start=2):
        if e < best:
            best_m, best = m, e
        elif patience is not None and m - best_m >= patience:
            break
    return best_m


def fit(
    data: FeatureDataset,
    max_iter: int = 500,
    folds: int = 5,
    seed: int = 0,
    patience: int | None = 50,
    fold_ids=None,
) -> AdditiveModel:
    """Cross-validate the iteration count, then refit on all rows."""
    if max_iter < 1:
        raise ValidationError(f"max_iter must be >= 1, got {max_iter}")
    if len(np.unique(data.labels)) < 2:
        raise ValidationError("training data must contain at least two classes")
    if fold_ids is None:
        fold_ids = stratified_folds(data.labels, folds, seed)
    else:
        fold_ids = np.asarray(fold_ids, dtype=np.int64)
        if fold_ids.shape != data.labels.shape:
            raise ValidationError("fold_ids must give one fold per row")
    errors = cv_error_curve(data, max_iter, fold_ids)
    m = choose_iterations(errors.tolist(), patience)
    model, _ = boost(data, m)
    return AdditiveModel(model.space, model.n_features, model.stages, seed, tuple(errors.tolist()))


def predict_set(model: AdditiveModel, data: FeatureDataset, ids: Sequence[str] | None = None) -> PredictionSet:
    if data.space != model.space:
        raise ValidationError("dataset label space differs from the model's")
    probs = _softmax_rows(model.scores(data.features)) if len(data) else np.zeros((0, model.space.size))
    ids = list(ids) if ids is not None else [f"row{i}" for i in range(len(data))]
    if len(ids) != len(data):
        raise ValidationError(f"{len(ids)} ids for {len(data)} rows")
    return PredictionSet(
        model.space,
        tuple(PredictionRecord(i, int(t), tuple(p)) for i, t, p in zip(ids, data.labels, probs)),
    )
