"""Late fusion of base-model probability vectors.

Two fusers are provided: plain averaging of the member vectors, and a small
fully connected head trained on the concatenated vectors with momentum SGD
while the base models stay frozen (they exist here only as stored outputs).
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from typing import Sequence

import numpy as np

from fusionbench.core import ConfusionMatrix, PredictionSet
from fusionbench.errors import DivergenceError, LabelSpaceMismatch, ValidationError

HEAD_FORMAT = "fusionbench.fusion-head"
HEAD_VERSION = 1
DEFAULT_DIMS = (32, 32, 16)


@dataclass(frozen=True)
class FusionInput:
    vectors: tuple[np.ndarray, ...]

    def __post_init__(self):
        vecs = tuple(np.asarray(v, dtype=np.float64).ravel() for v in self.vectors)
        if len(vecs) < 2:
            raise ValidationError(f"fusion needs at least 2 probability vectors, got {len(vecs)}")
        for i, v in enumerate(vecs):
            if v.size == 0 or not np.all(np.isfinite(v)) or np.any(v < 0):
                raise ValidationError(f"vector {i} is not a valid probability vector")
            if abs(v.sum() - 1.0) > 1e-6:
                raise ValidationError(f"vector {i} sums to {v.sum():.9g}, not 1")
        object.__setattr__(self, "vectors", vecs)

    @property
    def width(self) -> int:
        return sum(v.size for v in self.vectors)

    def concat(self) -> np.ndarray:
        return np.concatenate(self.vectors)


def average_fuse(inp: FusionInput) -> np.ndarray:
    lengths = {v.size for v in inp.vectors}
    if len(lengths) != 1:
        raise ValidationError(f"cannot average vectors of different lengths {sorted(lengths)}")
    return np.mean(np.stack(inp.vectors), axis=0)


@dataclass(frozen=True)
class LossConfig:
    kind: str = "plain"
    weights: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.kind not in ("plain", "weighted"):
            raise ValidationError(f"loss kind must be 'plain' or 'weighted', got {self.kind!r}")
        if self.kind == "weighted":
            if self.weights is None:
                raise ValidationError("weighted loss requires per-class weights")
            w = tuple(float(x) for x in self.weights)
            if any(not np.isfinite(x) or x <= 0 for x in w):
                raise ValidationError("class weights must be positive")
            object.__setattr__(self, "weights", w)

    def weight(self, cls: int) -> float:
        if self.kind == "plain":
            return 1.0
        if cls >= len(self.weights):
            raise ValidationError(f"no weight for class {cls}")
        return self.weights[cls]


def _logsumexp(x: np.ndarray) -> float:
    m = float(np.max(x))
    return m + float(np.log(np.sum(np.exp(x - m))))


def softmax(logits) -> np.ndarray:
    z = np.asarray(logits, dtype=np.float64)
    e = np.exp(z - np.max(z))
    return e / e.sum()


def cross_entropy(logits, cls: int, cfg: LossConfig = LossConfig()) -> float:
    x = np.asarray(logits, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise ValidationError("logits must be finite")
    if not 0 <= cls < x.size:
        raise ValidationError(f"class {cls} out of range for {x.size} logits")
    return cfg.weight(cls) * (_logsumexp(x) - float(x[cls]))


def class_weights(counts: Sequence[int]) -> tuple[float, ...]:
    """Inverse-frequency weights ``total / (K * count)``; mean 1 when balanced."""
    counts = [int(c) for c in counts]
    for i, c in enumerate(counts):
        if c <= 0:
            raise ValidationError(
                f"class {i} has no examples; fill the class with extra data or drop it from the label space"
            )
    total, k = sum(counts), len(counts)
    return tuple(total / (k * c) for c in counts)


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.01
    momentum: float = 0.9
    epochs: int = 200
    batch_size: int = 1
    seed: int = 0


@dataclass
class FusionHead:
    """Fully connected head: ReLU hidden layers, logits out.

    ``layers`` holds ``(weight, bias)`` pairs with ``weight`` shaped
    ``(fan_out, fan_in)``.
    """

    layers: list[tuple[np.ndarray, np.ndarray]]
    hyper: TrainConfig = field(default_factory=TrainConfig)

    def __post_init__(self):
        if not self.layers:
            raise ValidationError("a fusion head needs at least one layer")
        layers = []
        prev = None
        for i, (w, b) in enumerate(self.layers):
            w = np.array(w, dtype=np.float64, ndmin=2)
            b = np.array(b, dtype=np.float64).ravel()
            if b.shape != (w.shape[0],):
                raise ValidationError(f"layer {i}: bias length {b.size} != {w.shape[0]} outputs")
            if prev is not None and w.shape[1] != prev:
                raise ValidationError(f"layer {i}: expects {w.shape[1]} inputs but previous layer emits {prev}")
            prev = w.shape[0]
            layers.append((w, b))
        self.layers = layers

    @classmethod
    def init(cls, dims: Sequence[int] = DEFAULT_DIMS, hyper: TrainConfig | None = None,
             seed: int | None = None) -> "FusionHead":
        """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights and biases from ``seed``."""
        hyper = hyper or TrainConfig()
        if seed is not None:
            hyper = replace(hyper, seed=seed)
        dims = [int(d) for d in dims]
        if len(dims) < 2 or any(d < 1 for d in dims):
            raise ValidationError(f"invalid layer dimensions {dims}")
        rng = np.random.default_rng(hyper.seed)
        layers = []
        for fan_in, fan_out in zip(dims[:-1], dims[1:]):
            bound = 1.0 / np.sqrt(fan_in)
            w = rng.uniform(-bound, bound, size=(fan_out, fan_in))
            b = rng.uniform(-bound, bound, size=fan_out)
            layers.append((w, b))
        return cls(layers, hyper)

    @property
    def dims(self) -> tuple[int, ...]:
        return (self.layers[0][0].shape[1], *(w.shape[0] for w, _ in self.layers))

    @property
    def n_inputs(self) -> int:
        return self.dims[0]

    @property
    def n_classes(self) -> int:
        return self.dims[-1]

    def copy(self) -> "FusionHead":
        return FusionHead([(w.copy(), b.copy()) for w, b in self.layers], self.hyper)

    def to_json(self) -> str:
        doc = {
            "format": HEAD_FORMAT,
            "version": HEAD_VERSION,
            "dims": list(self.dims),
            "activation": {"hidden": "relu", "output": "identity"},
            "layers": [{"weight": w.tolist(), "bias": b.tolist()} for w, b in self.layers],
            "hyper": asdict(self.hyper),
            "seed": self.hyper.seed,
        }
        return json.dumps(doc, indent=1) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "FusionHead":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as e:
            raise ValidationError(f"fusion head is not valid JSON: {e}") from None
        if doc.get("format") != HEAD_FORMAT:
            raise ValidationError(f"not a fusion head file (format={doc.get('format')!r})")
        if doc.get("version") != HEAD_VERSION:
            raise ValidationError(f"unsupported fusion head version {doc.get('version')!r}")
        head = cls([(l["weight"], l["bias"]) for l in doc["layers"]], TrainConfig(**doc["hyper"]))
        if list(head.dims) != list(doc["dims"]):
            raise ValidationError(f"declared dims {doc['dims']} do not match weights {list(head.dims)}")
        return head


def _as_vector(inp, width: int) -> np.ndarray:
    x = inp.concat() if isinstance(inp, FusionInput) else np.asarray(inp, dtype=np.float64).ravel()
    if x.size != width:
        raise ValidationError(f"head expects {width} inputs, got {x.size}")
    return x


def _forward(head: FusionHead, x: np.ndarray):
    """Logits plus the activations needed for backprop."""
    acts = [x]
    pre = []
    h = x
    last = len(head.layers) - 1
    for i, (w, b) in enumerate(head.layers):
        z = w @ h + b
        pre.append(z)
        h = z if i == last else np.maximum(z, 0.0)
        acts.append(h)
    return h, acts, pre


def head_forward(head: FusionHead, inp) -> np.ndarray:
    return _forward(head, _as_vector(inp, head.n_inputs))[0]


def head_predict_proba(head: FusionHead, inp) -> np.ndarray:
    return softmax(head_forward(head, inp))


def _backprop(head: FusionHead, cls: int, cfg: LossConfig, logits, acts, pre):
    delta = softmax(logits)
    delta[cls] -= 1.0
    delta *= cfg.weight(cls)
    grads = [None] * len(head.layers)
    for i in range(len(head.layers) - 1, -1, -1):
        w, _ = head.layers[i]
        grads[i] = (np.outer(delta, acts[i]), delta.copy())
        if i > 0:
            delta = (w.T @ delta) * (pre[i - 1] > 0)
    return grads


def loss_and_grads(head: FusionHead, inp, cls: int, cfg: LossConfig = LossConfig()):
    """Loss for one example and its gradient for every ``(weight, bias)`` pair."""
    logits, acts, pre = _forward(head, _as_vector(inp, head.n_inputs))
    return cross_entropy(logits, cls, cfg), _backprop(head, cls, cfg, logits, acts, pre)


def head_train(head: FusionHead, data: Sequence[tuple[object, int]], cfg: LossConfig = LossConfig()):
    """Train a copy of ``head`` with momentum SGD.

    Returns
    -------
    trained : FusionHead
    trace : list of float
        Mean per-example loss of each epoch, accumulated during the epoch.
    """
    if not data:
        raise ValidationError("cannot train on an empty dataset")
    hp = head.hyper
    if hp.batch_size < 1 or hp.epochs < 0:
        raise ValidationError("batch_size must be >= 1 and epochs >= 0")
    xs = np.stack([_as_vector(x, head.n_inputs) for x, _ in data])
    ys = [int(y) for _, y in data]
    for y in ys:
        if not 0 <= y < head.n_classes:
            raise ValidationError(f"class {y} out of range for a {head.n_classes}-output head")
    net = head.copy()
    vel = [(np.zeros_like(w), np.zeros_like(b)) for w, b in net.layers]
    rng = np.random.default_rng(hp.seed)
    lr, mu = hp.learning_rate, hp.momentum
    trace = []
    for epoch in range(1, hp.epochs + 1):
        order = rng.permutation(len(ys))
        total = 0.0
        for start in range(0, len(order), hp.batch_size):
            batch = order[start:start + hp.batch_size]
            acc = [(np.zeros_like(w), np.zeros_like(b)) for w, b in net.layers]
            for i in batch:
                with np.errstate(over="ignore", invalid="ignore"):
                    logits, acts, pre = _forward(net, xs[i])
                if not np.all(np.isfinite(logits)):
                    raise DivergenceError(epoch, lr, float("nan"))
                loss = cross_entropy(logits, ys[i], cfg)
                grads = _backprop(net, ys[i], cfg, logits, acts, pre)
                total += loss
                for (gw, gb), (aw, ab) in zip(grads, acc):
                    aw += gw
                    ab += gb
            for (w, b), (vw, vb), (gw, gb) in zip(net.layers, vel, acc):
                vw *= mu
                vw -= lr * gw / len(batch)
                vb *= mu
                vb -= lr * gb / len(batch)
                w += vw
                b += vb
        mean = total / len(ys)
        if not np.isfinite(mean) or not all(np.all(np.isfinite(w)) for w, _ in net.layers):
            raise DivergenceError(epoch, lr, mean)
        trace.append(mean)
    return net, trace


def select_diverse(models: Sequence[tuple[ConfusionMatrix, PredictionSet | None]]) -> list[int]:
    """Indices of the models kept by a greedy diversity scan.

    A model is kept unless some already-kept model has the same CM diagonal
    and (when both prediction sets are available) the same set of correctly
    classified item ids. The first model is always kept.
    """
    if not models:
        return []
    space = models[0][0].space
    for cm, preds in models:
        if cm.space != space or (preds is not None and preds.space != space):
            raise LabelSpaceMismatch("all models must share one label space")
    kept: list[int] = []
    for i, (cm, preds) in enumerate(models):
        duplicate = False
        for j in kept:
            other_cm, other_preds = models[j]
            if cm.diagonal() != other_cm.diagonal():
                continue
            if preds is None or other_preds is None or preds.correct_ids() == other_preds.correct_ids():
                duplicate = True
                break
        if not duplicate:
            kept.append(i)
    return kept


def fusion_inputs(members: Sequence[PredictionSet]) -> tuple[list[str], list[FusionInput], list[int]]:
    """Align member prediction sets by item id into fusion inputs.

    Returns item ids (in the first member's order), inputs and true labels.
    """
    if len(members) < 2:
        raise ValidationError("fusion needs at least two member prediction sets")
    first = members[0]
    by_id = []
    for m in members:
        if m.space != first.space:
            raise LabelSpaceMismatch("fusion members must share one label space")
        by_id.append({r.item_id: r for r in m.records})
    ids = [r.item_id for r in first.records]
    for k, lookup in enumerate(by_id[1:], start=1):
        if set(lookup) != set(ids):
            raise ValidationError(f"fusion member {k} covers different item ids than member 0")
    inputs, labels = [], []
    for item in ids:
        recs = [lookup[item] for lookup in by_id]
        truth = {r.true_label for r in recs}
        if len(truth) != 1:
            raise ValidationError(f"item {item!r}: members disagree on the true label")
        probs = []
        for r in recs:
            if r.probs is None:
                raise ValidationError(f"item {item!r}: fusion needs probabilities from every member")
            probs.append(r.probs)
        inputs.append(FusionInput(tuple(probs)))
        labels.append(recs[0].true_label)
    return ids, inputs, labels

