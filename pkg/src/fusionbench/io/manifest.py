"""Experiment manifests (JSON).

Example::

    {
      "version": 1,
      "datasets": {
        "medico_test": {"kind": "cm", "path": "table4.cm"},
        "resnet": {"kind": "predictions", "path": "resnet.csv"},
        "densenet": {"kind": "predictions", "path": "densenet.csv"},
        "pair": {"kind": "fusion", "members": ["resnet", "densenet"]},
        "feats": {"kind": "arff", "path": "train.arff"}
      },
      "class_maps": {"polyp": {"positive": "polyps", "rest": "non-polyp"}},
      "scenarios": [
        {"name": "T1", "model": "precomputed", "test": ["medico_test"], "map": "polyp"}
      ]
    }

Relative paths resolve against the manifest's directory.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from fusionbench.core import ClassMap, LabelSpace
from fusionbench.errors import ParseError, ValidationError
from fusionbench.io._text import read_text

MANIFEST_VERSION = 1
DATASET_KINDS = ("cm", "predictions", "arff", "fusion")
MODEL_KINDS = ("precomputed", "average", "mlp", "boost")

# model kind -> (allowed train dataset kinds, allowed test dataset kinds, params)
MODEL_RULES = {
    "precomputed": ((), ("cm", "predictions"), ()),
    "average": ((), ("fusion",), ()),
    "mlp": (("fusion",), ("fusion",),
            ("hidden", "epochs", "learning_rate", "momentum", "batch_size", "loss")),
    "boost": (("arff",), ("arff",), ("max_iter", "folds", "patience")),
}


@dataclass(frozen=True)
class DatasetSpec:
    name: str
    kind: str
    path: Path | None = None
    members: tuple[str, ...] = ()
    class_attribute: str | None = None


@dataclass(frozen=True)
class MapSpec:
    name: str
    positive: str | None = None
    rest: str | None = None
    groups: dict | None = None

    def build(self, space: LabelSpace) -> ClassMap:
        if self.groups is not None:
            return ClassMap.from_groups(space, self.groups)
        if self.positive is not None:
            return ClassMap.one_vs_rest(space, self.positive, self.rest)
        return ClassMap.identity(space)


IDENTITY = MapSpec("identity")


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    model: str
    train: tuple[str, ...]
    test: tuple[str, ...]
    map: str | None = None
    curves_positive: str | None = None
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ExperimentManifest:
    base_dir: Path
    datasets: dict[str, DatasetSpec]
    class_maps: dict[str, MapSpec]
    scenarios: tuple[ScenarioSpec, ...]

    def map_for(self, scenario: ScenarioSpec) -> MapSpec:
        if scenario.map in (None, "identity"):
            return IDENTITY
        return self.class_maps[scenario.map]

    def without(self, name: str) -> "ExperimentManifest":
        return ExperimentManifest(
            self.base_dir, self.datasets, self.class_maps,
            tuple(s for s in self.scenarios if s.name != name),
        )


def _no_line(token, nth=1):
    return None


def _require(cond: bool, path, msg: str, line=None):
    if not cond:
        raise ParseError(path, line, msg)


def _strs(v: Any, path, what: str) -> tuple[str, ...]:
    if isinstance(v, str):
        return (v,)
    _require(isinstance(v, list) and all(isinstance(x, str) for x in v), path, f"{what} must be a list of names")
    return tuple(v)


def manifest_from_dict(doc: dict, base_dir=".", path="<manifest>", locate=_no_line) -> ExperimentManifest:
    """Validate a decoded manifest.

    ``locate(token, nth)`` maps a JSON string value to the source line of its
    ``nth`` occurrence so semantic errors can point at a line.
    """
    base_dir = Path(base_dir)
    _require(isinstance(doc, dict), path, "manifest must be a JSON object")
    _require(doc.get("version", MANIFEST_VERSION) == MANIFEST_VERSION, path,
             f"unsupported manifest version {doc.get('version')!r}")
    unknown = set(doc) - {"version", "datasets", "class_maps", "scenarios", "description"}
    _require(not unknown, path, f"unknown manifest keys {sorted(unknown)}")

    datasets = {}
    for name, d in (doc.get("datasets") or {}).items():
        at = locate(name)
        _require(isinstance(d, dict), path, f"dataset {name!r} must be an object", at)
        kind = d.get("kind")
        _require(kind in DATASET_KINDS, path, f"dataset {name!r}: kind must be one of {DATASET_KINDS}", at)
        if kind == "fusion":
            members = _strs(d.get("members", []), path, f"dataset {name!r} members")
            _require(len(members) >= 2, path, f"fusion dataset {name!r} needs at least two members", at)
            datasets[name] = DatasetSpec(name, kind, members=members)
        else:
            _require(isinstance(d.get("path"), str), path, f"dataset {name!r} needs a path", at)
            p = Path(d["path"])
            datasets[name] = DatasetSpec(
                name, kind, p if p.is_absolute() else base_dir / p, class_attribute=d.get("class_attribute")
            )
    for ds in datasets.values():
        for m in ds.members:
            at = locate(ds.name)
            _require(m in datasets, path, f"fusion dataset {ds.name!r} references unknown dataset {m!r}", at)
            _require(datasets[m].kind == "predictions", path,
                     f"fusion dataset {ds.name!r}: member {m!r} must be a predictions dataset", at)

    maps = {}
    for name, m in (doc.get("class_maps") or {}).items():
        at = locate(name)
        _require(name != "identity", path, "'identity' is reserved for the identity map", at)
        _require(isinstance(m, dict), path, f"class map {name!r} must be an object", at)
        if "groups" in m:
            g = m["groups"]
            _require(isinstance(g, dict) and g, path, f"class map {name!r}: groups must be a non-empty object", at)
            maps[name] = MapSpec(name, groups={k: list(_strs(v, path, f"group {k!r}")) for k, v in g.items()})
        else:
            _require(isinstance(m.get("positive"), str), path, f"class map {name!r} needs 'positive' or 'groups'", at)
            maps[name] = MapSpec(name, positive=m["positive"], rest=m.get("rest"))

    scenarios = []
    seen = set()
    for i, s in enumerate(doc.get("scenarios") or []):
        _require(isinstance(s, dict), path, f"scenario #{i} must be an object", locate("scenarios"))
        name = s.get("name")
        _require(isinstance(name, str) and name, path, f"scenario #{i} needs a name", locate("scenarios"))
        _require(name not in seen, path, f"duplicate scenario name {name!r}", locate(name, 2))
        seen.add(name)
        at = locate(name)
        model = s.get("model")
        _require(model in MODEL_KINDS, path, f"scenario {name!r}: model must be one of {MODEL_KINDS}", at)
        train = _strs(s.get("train", []), path, f"scenario {name!r} train")
        test = _strs(s.get("test", []), path, f"scenario {name!r} test")
        _require(bool(test), path, f"scenario {name!r} has no test datasets", at)
        train_kinds, test_kinds, param_names = MODEL_RULES[model]
        if train_kinds:
            _require(bool(train), path, f"scenario {name!r}: model {model!r} needs training datasets", at)
        else:
            _require(not train, path, f"scenario {name!r}: model {model!r} takes no training datasets", at)
        for ref in (*train, *test):
            _require(ref in datasets, path, f"scenario {name!r} references unknown dataset {ref!r}", at)
        for ref in train:
            _require(datasets[ref].kind in train_kinds, path,
                     f"scenario {name!r}: {model!r} cannot train on {datasets[ref].kind} dataset {ref!r}", at)
        for ref in test:
            _require(datasets[ref].kind in test_kinds, path,
                     f"scenario {name!r}: {model!r} cannot test on {datasets[ref].kind} dataset {ref!r}", at)
        mref = s.get("map")
        _require(mref is None or mref == "identity" or mref in maps, path,
                 f"scenario {name!r} references unknown class map {mref!r}", at)
        curves = s.get("curves")
        positive = None
        if curves is not None:
            _require(isinstance(curves, dict) and isinstance(curves.get("positive"), str), path,
                     f"scenario {name!r}: curves must be {{\"positive\": <class>}}", at)
            positive = curves["positive"]
            for ref in test:
                _require(datasets[ref].kind != "cm", path,
                         f"scenario {name!r}: curves need probabilities but {ref!r} is a confusion matrix", at)
        params = s.get("params") or {}
        _require(isinstance(params, dict), path, f"scenario {name!r}: params must be an object", at)
        bad = set(params) - set(param_names)
        _require(not bad, path, f"scenario {name!r}: unknown params {sorted(bad)} for model {model!r}", at)
        scenarios.append(ScenarioSpec(name, model, train, test, mref, positive, dict(params)))

    return ExperimentManifest(base_dir, datasets, maps, tuple(scenarios))


def load_manifest(path) -> ExperimentManifest:
    text = read_text(path)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(path, e.lineno, f"invalid JSON: {e.msg}") from None
    lines = text.splitlines()

    def locate(token, nth=1):
        needle = json.dumps(token)
        for lineno, line in enumerate(lines, start=1):
            nth -= line.count(needle)
            if nth <= 0:
                return lineno
        return None

    try:
        return manifest_from_dict(doc, Path(path).parent, path, locate)
    except ParseError:
        raise
    except ValidationError as e:
        raise ParseError(path, None, str(e)) from None
