"""Prediction CSV files.

::

    item_id,true_label,prob_<c1>,...,prob_<cK>[,predicted]

The label space is taken from the ``prob_`` column order. A file without
probability columns must declare its classes in a ``# labels=a,b,...``
pragma. ``true_label`` and ``predicted`` hold class names; an empty
``predicted`` cell means "use the argmax".
"""

from __future__ import annotations

import math

from fusionbench.core import LabelSpace, PredictionRecord, PredictionSet
from fusionbench.errors import MalformedRecordError, ParseError, ValidationError
from fusionbench.io._text import fmt, join_row, read_text, split_row, write_text

PROB_PREFIX = "prob_"


def _pragma(line: str):
    body = line.lstrip("#").strip()
    if "=" in body:
        key, _, value = body.partition("=")
        return key.strip().lower(), value.strip()
    return None, None


def parse_predictions(text: str, path="<string>", space: LabelSpace | None = None) -> PredictionSet:
    header = None
    labels_pragma = None
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        if line.startswith("#"):
            key, value = _pragma(line)
            if key == "labels" and header is None:
                labels_pragma = (lineno, [v.strip() for v in split_row(value)])
            continue
        cells = split_row(line)
        if header is None:
            header = (lineno, cells)
        else:
            rows.append((lineno, cells))
    if header is None:
        raise ParseError(path, None, "missing header line")
    hline, cols = header
    for needed in ("item_id", "true_label"):
        if needed not in cols:
            raise ParseError(path, hline, f"missing required column {needed!r}")
    if cols[:2] != ["item_id", "true_label"]:
        raise ParseError(path, hline, "header must start with item_id,true_label")
    prob_cols = [c for c in cols[2:] if c.startswith(PROB_PREFIX)]
    rest = [c for c in cols[2 + len(prob_cols):]]
    if cols[2:2 + len(prob_cols)] != prob_cols:
        raise ParseError(path, hline, "probability columns must be contiguous after true_label")
    if rest not in ([], ["predicted"]):
        raise ParseError(path, hline, f"unexpected columns {rest}")
    has_pred = rest == ["predicted"]

    try:
        if prob_cols:
            names = tuple(c[len(PROB_PREFIX):] for c in prob_cols)
            file_space = LabelSpace(names)
            if space is not None and space != file_space:
                raise ValidationError("probability columns do not match the expected label space")
            space = file_space
        elif space is None:
            if labels_pragma is None:
                raise ParseError(path, hline, "no prob_ columns and no '# labels=' pragma to define the classes")
            space = LabelSpace(tuple(labels_pragma[1]))
    except ValidationError as e:
        if isinstance(e, ParseError):
            raise
        raise ParseError(path, hline, str(e)) from None
    if not prob_cols and not has_pred:
        raise ParseError(path, hline, "file has neither probability columns nor a predicted column")

    records = []
    seen = {}
    for lineno, cells in rows:
        if len(cells) != len(cols):
            raise ParseError(path, lineno, f"expected {len(cols)} columns, got {len(cells)}")
        item_id, true_name = cells[0], cells[1]
        if not item_id:
            raise ParseError(path, lineno, "empty item_id")
        if item_id in seen:
            raise ParseError(path, lineno, f"duplicate item_id {item_id!r} (first on line {seen[item_id]})")
        seen[item_id] = lineno
        try:
            true_label = space.index(true_name)
        except ValidationError:
            raise ParseError(path, lineno, f"unknown true_label {true_name!r}") from None
        probs = None
        raw = cells[2:2 + len(prob_cols)]
        if prob_cols and any(raw):
            if not all(raw):
                raise ParseError(path, lineno, "probability cells must be all filled or all empty")
            try:
                probs = tuple(float(v) for v in raw)
            except ValueError:
                bad = next(v for v in raw if not _is_float(v))
                raise ParseError(path, lineno, f"non-numeric probability {bad!r}") from None
            if not all(math.isfinite(p) for p in probs):
                raise ParseError(path, lineno, "probabilities must be finite")
        predicted = None
        if has_pred and cells[-1]:
            try:
                predicted = space.index(cells[-1])
            except ValidationError:
                raise ParseError(path, lineno, f"unknown predicted label {cells[-1]!r}") from None
        rec = PredictionRecord(item_id, true_label, probs, predicted)
        try:
            rec.check(space.size)
        except MalformedRecordError as e:
            raise ParseError(path, lineno, str(e)) from None
        records.append(rec)
    return PredictionSet(space, tuple(records))


def _is_float(v: str) -> bool:
    try:
        float(v)
        return True
    except ValueError:
        return False


def read_predictions(path, space: LabelSpace | None = None) -> PredictionSet:
    return parse_predictions(read_text(path), path, space)


def format_predictions(preds: PredictionSet) -> str:
    any_probs = any(r.probs is not None for r in preds.records)
    any_pred = any(r.predicted_label is not None for r in preds.records)
    names = preds.space.names
    lines = []
    if not any_probs:
        lines.append("# labels=" + join_row(names))
        any_pred = True
    cols = ["item_id", "true_label"]
    if any_probs:
        cols += [PROB_PREFIX + n for n in names]
    if any_pred:
        cols.append("predicted")
    lines.append(join_row(cols))
    for r in preds.records:
        cells = [r.item_id, names[r.true_label]]
        if any_probs:
            cells += [fmt(p) for p in r.probs] if r.probs is not None else [""] * len(names)
        if any_pred:
            if r.predicted_label is not None:
                cells.append(names[r.predicted_label])
            elif r.probs is None:
                cells.append(names[r.resolved_label])
            else:
                cells.append("")
        lines.append(join_row(cells))
    return "\n".join(lines) + "\n"


def write_predictions(preds: PredictionSet, path) -> None:
    write_text(path, format_predictions(preds))
