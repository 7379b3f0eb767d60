"""Report files.

The JSON report is the complete record; the CSV mirrors the Table-5 style
column order (REC, PREC, SPEC, ACC, MCC, F1) with one row per scenario and
test dataset. Numbers are rounded to 12 significant digits.
"""

from __future__ import annotations

import json

from fusionbench import __version__
from fusionbench.core import ORIENTATION
from fusionbench.curves import Curve
from fusionbench.errors import ParseError
from fusionbench.io._text import fmt, join_row, read_text, write_text
from fusionbench.metrics import METRIC_LABELS, MetricHexagon
from fusionbench.results import ScenarioResult

REPORT_FORMAT = "fusionbench.report"
REPORT_VERSION = 1
CSV_COLUMNS = ("scenario", "model", "test", *METRIC_LABELS)


def _round(x):
    if isinstance(x, float):
        return float(fmt(x))
    if isinstance(x, dict):
        return {k: _round(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_round(v) for v in x]
    return x


def result_to_dict(r: ScenarioResult) -> dict:
    return {
        "name": r.name,
        "model": r.model,
        "train": list(r.train),
        "test": r.test,
        "map": r.map,
        "labels": list(r.labels),
        "confusion_matrix": [list(row) for row in r.confusion],
        "aggregation": r.aggregation,
        "hexagon": _round(r.hexagon.as_dict()),
        "per_class": [{"class": n, **_round(h.as_dict())} for n, h in r.per_class],
        "curves": _round(r.curves) if r.curves else None,
        "seed": r.seed,
        "timing": _round(dict(r.timing)),
    }


def result_from_dict(d: dict) -> ScenarioResult:
    return ScenarioResult(
        name=d["name"],
        model=d["model"],
        train=tuple(d["train"]),
        test=d["test"],
        map=d["map"],
        labels=tuple(d["labels"]),
        confusion=tuple(tuple(int(v) for v in row) for row in d["confusion_matrix"]),
        hexagon=MetricHexagon.from_dict(d["hexagon"]),
        per_class=tuple((p["class"], MetricHexagon.from_dict(p)) for p in d["per_class"]),
        aggregation=d.get("aggregation", "pooled"),
        curves=d.get("curves"),
        seed=int(d["seed"]),
        timing=dict(d.get("timing") or {}),
    )


def report_json(results, seed=None) -> str:
    doc = {
        "format": REPORT_FORMAT,
        "version": REPORT_VERSION,
        "tool_version": __version__,
        "orientation": ORIENTATION,
        "seed": seed,
        "scenarios": [result_to_dict(r) for r in results],
    }
    return json.dumps(doc, indent=2) + "\n"


def report_csv(results) -> str:
    lines = [join_row(CSV_COLUMNS)]
    for r in results:
        lines.append(join_row([r.name, r.model, r.test, *(fmt(v) for v in r.hexagon.values())]))
    return "\n".join(lines) + "\n"


def write_report(results, json_path, csv_path=None, seed=None) -> None:
    results = list(results)
    write_text(json_path, report_json(results, seed))
    if csv_path is not None:
        write_text(csv_path, report_csv(results))


def read_report(path) -> tuple[list[ScenarioResult], dict]:
    """Results plus the report header fields."""
    text = read_text(path)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(path, e.lineno, f"invalid JSON: {e.msg}") from None
    if doc.get("format") != REPORT_FORMAT:
        raise ParseError(path, None, f"not a report file (format={doc.get('format')!r})")
    if doc.get("version") != REPORT_VERSION:
        raise ParseError(path, None, f"unsupported report version {doc.get('version')!r}")
    try:
        results = [result_from_dict(d) for d in doc["scenarios"]]
    except (KeyError, TypeError, ValueError) as e:
        raise ParseError(path, None, f"malformed scenario entry: {e}") from None
    header = {k: v for k, v in doc.items() if k != "scenarios"}
    return results, header


def curve_csv(curve: Curve) -> str:
    xa, ya = curve.axes
    lines = [
        f"# curve={curve.kind}",
        f"# baseline={fmt(curve.baseline)}",
        f"# auc={fmt(curve.auc)}",
        f"{xa},{ya}",
    ]
    lines += [f"{fmt(x)},{fmt(y)}" for x, y in curve.points]
    return "\n".join(lines) + "\n"


def write_curve_csv(curve: Curve, path) -> None:
    write_text(path, curve_csv(curve))
