"""Cross-dataset experiment matrices driven by a manifest.

Each scenario trains (or loads) one model and evaluates it on every listed
test dataset after mapping into the scenario's target label space. Scenarios
share nothing but immutable inputs, and each draws its random seed from the
run seed and its own name, so adding or removing one scenario never changes
another's numbers.
"""

from __future__ import annotations

import logging
import threading
import time
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from fusionbench import boost as lb
from fusionbench.core import ClassMap, ConfusionMatrix, PredictionRecord, PredictionSet, build_cm, collapse, collapse_preds
from fusionbench.curves import prc, roc, scored_items
from fusionbench.errors import TrainingError, ValidationError
from fusionbench.fusion import (
    FusionHead,
    LossConfig,
    TrainConfig,
    average_fuse,
    class_weights,
    fusion_inputs,
    head_predict_proba,
    head_train,
)
from fusionbench.io.arff import read_arff
from fusionbench.io.cmfile import read_cm
from fusionbench.io.manifest import ExperimentManifest, ScenarioSpec
from fusionbench.io.predictions import read_predictions
from fusionbench.io.report import write_curve_csv
from fusionbench.metrics import binarize, binary_metrics, per_class_table, pooled_hexagon, rk_coefficient
from fusionbench.results import ScenarioResult

log = logging.getLogger(__name__)

_plot_lock = threading.Lock()


def scenario_seed(seed: int, name: str) -> int:
    ss = np.random.SeedSequence([int(seed), zlib.crc32(name.encode("utf-8"))])
    return int(ss.generate_state(1)[0])


class _Data:
    """Lazily loaded datasets of one manifest."""

    def __init__(self, manifest: ExperimentManifest):
        self.manifest = manifest
        self._cache = {}

    def get(self, name: str):
        if name not in self._cache:
            spec = self.manifest.datasets[name]
            if spec.kind == "cm":
                value = read_cm(spec.path)
            elif spec.kind == "predictions":
                value = read_predictions(spec.path)
            elif spec.kind == "arff":
                value = read_arff(spec.path, spec.class_attribute)
            else:
                value = fusion_inputs([self.get(m) for m in spec.members])
            self._cache[name] = value
        return self._cache[name]

    def members_space(self, name: str):
        return self.get(self.manifest.datasets[name].members[0]).space


def _fused_set(space, ids, probs, labels) -> PredictionSet:
    return PredictionSet(
        space, tuple(PredictionRecord(i, int(t), tuple(p)) for i, t, p in zip(ids, labels, probs))
    )


def _predict(spec: ScenarioSpec, data: _Data, seed: int) -> dict:
    """Map each test ref to a PredictionSet or ConfusionMatrix."""
    p = spec.params
    if spec.model == "precomputed":
        return {t: data.get(t) for t in spec.test}
    if spec.model == "average":
        out = {}
        for t in spec.test:
            ids, inputs, labels = data.get(t)
            out[t] = _fused_set(data.members_space(t), ids, [average_fuse(x) for x in inputs], labels)
        return out
    if spec.model == "mlp":
        space = data.members_space(spec.train[0])
        xs, ys = [], []
        for ref in spec.train:
            if data.members_space(ref) != space:
                raise ValidationError(f"scenario {spec.name!r}: training datasets use different label spaces")
            _, inputs, labels = data.get(ref)
            xs += inputs
            ys += labels
        width = xs[0].width
        hidden = [int(h) for h in p.get("hidden", [width])]
        hyper = TrainConfig(
            learning_rate=float(p.get("learning_rate", 0.01)),
            momentum=float(p.get("momentum", 0.9)),
            epochs=int(p.get("epochs", 200)),
            batch_size=int(p.get("batch_size", 1)),
            seed=seed,
        )
        head = FusionHead.init((width, *hidden, space.size), hyper)
        if p.get("loss", "plain") == "weighted":
            cfg = LossConfig("weighted", class_weights(np.bincount(ys, minlength=space.size)))
        else:
            cfg = LossConfig()
        head, trace = head_train(head, list(zip(xs, ys)), cfg)
        log.info("scenario %s: mlp final epoch loss %.6g", spec.name, trace[-1] if trace else float("nan"))
        out = {}
        for t in spec.test:
            if data.members_space(t) != space:
                raise ValidationError(f"scenario {spec.name!r}: test dataset {t!r} uses a different label space")
            ids, inputs, labels = data.get(t)
            out[t] = _fused_set(space, ids, [head_predict_proba(head, x) for x in inputs], labels)
        return out
    if spec.model == "boost":
        train = lb.FeatureDataset.concat([data.get(r) for r in spec.train])
        model = lb.fit(
            train,
            max_iter=int(p.get("max_iter", 500)),
            folds=int(p.get("folds", 5)),
            seed=seed,
            patience=p.get("patience", 50),
        )
        out = {}
        for t in spec.test:
            ds = data.get(t)
            if ds.space != model.space:
                raise ValidationError(f"scenario {spec.name!r}: test dataset {t!r} uses a different label space")
            out[t] = lb.predict_set(model, ds)
        return out
    raise ValidationError(f"unknown model kind {spec.model!r}")


def _evaluate(spec, test, outcome, cmap: ClassMap, map_name, positive, seed, out_dir) -> ScenarioResult:
    cm = outcome if isinstance(outcome, ConfusionMatrix) else build_cm(outcome)
    cm2 = collapse(cm, cmap)
    if positive is not None and cm2.k == 2:
        k = cm2.space.index(positive)
        hexagon = replace(binary_metrics(binarize(cm2, k)), rk=rk_coefficient(cm2))
        aggregation = f"binary:{positive}"
    else:
        hexagon = pooled_hexagon(cm2)
        aggregation = "pooled"
    curves = None
    if spec.curves_positive is not None:
        preds = collapse_preds(outcome, cmap)
        k = preds.space.index(spec.curves_positive)
        items = scored_items(preds, k)
        r, pr = roc(items), prc(items)
        curves = {
            "positive": spec.curves_positive,
            "roc": {"auc": r.auc},
            "prc": {"auc": pr.auc, "baseline": pr.baseline},
        }
        if out_dir is not None:
            from fusionbench.plotting import plot_curves

            stem = f"{spec.name}__{test}"
            for kind, c in (("roc", r), ("prc", pr)):
                csv_name, svg_name = f"{stem}__{kind}.csv", f"{stem}__{kind}.svg"
                write_curve_csv(c, Path(out_dir) / csv_name)
                with _plot_lock:
                    plot_curves([(spec.name, c)], Path(out_dir) / svg_name, title=f"{spec.name} on {test}")
                curves[kind].update(csv=csv_name, svg=svg_name)
    return ScenarioResult(
        name=spec.name,
        model=spec.model,
        train=spec.train,
        test=test,
        map=map_name,
        aggregation=aggregation,
        labels=cm2.space.names,
        confusion=tuple(tuple(int(v) for v in row) for row in cm2.counts),
        hexagon=hexagon,
        per_class=tuple(per_class_table(cm2)),
        curves=curves,
        seed=seed,
    )


def run_scenario(manifest: ExperimentManifest, spec: ScenarioSpec, seed: int, out_dir=None,
                 data: _Data | None = None) -> list[ScenarioResult]:
    data = data or _Data(manifest)
    s_seed = scenario_seed(seed, spec.name)
    t0 = time.perf_counter()
    try:
        outcomes = _predict(spec, data, s_seed)
        train_time = time.perf_counter() - t0
        mspec = manifest.map_for(spec)
        results = []
        for test in spec.test:
            outcome = outcomes[test]
            t1 = time.perf_counter()
            cmap = mspec.build(outcome.space)
            positive = mspec.positive if mspec.positive is not None else spec.curves_positive
            r = _evaluate(spec, test, outcome, cmap, mspec.name, positive, s_seed, out_dir)
            timing = {"train_s": train_time, "eval_s": time.perf_counter() - t1}
            results.append(replace(r, timing=timing))
        return results
    except TrainingError as e:
        raise TrainingError(f"scenario {spec.name!r}: {e}") from e


def run_matrix(manifest: ExperimentManifest, seed: int = 0, out_dir=None, jobs: int = 1) -> list[ScenarioResult]:
    """Run every scenario; results follow manifest order regardless of ``jobs``."""
    data = _Data(manifest)
    if jobs <= 1 or len(manifest.scenarios) <= 1:
        per = [run_scenario(manifest, s, seed, out_dir, data) for s in manifest.scenarios]
    else:
        for s in manifest.scenarios:
            for ref in (*s.train, *s.test):
                data.get(ref)
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            per = list(pool.map(lambda s: run_scenario(manifest, s, seed, out_dir, data), manifest.scenarios))
    return [r for rs in per for r in rs]
