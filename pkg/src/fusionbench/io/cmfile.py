"""Confusion-matrix files.

::

    # rows=actual
    class,a,b
    a,5,1
    b,0,4

The orientation pragma is mandatory. ``# rows=predicted`` files are
transposed on read so the in-memory matrix is always rows = actual.
Other ``#`` lines are comments.
"""

from __future__ import annotations

import numpy as np

from fusionbench.core import ConfusionMatrix, LabelSpace
from fusionbench.errors import ParseError, ValidationError
from fusionbench.io._text import join_row, read_text, split_row, write_text


def parse_cm(text: str, path="<string>") -> ConfusionMatrix:
    orientation = None
    header = None
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        if line.startswith("#"):
            body = line[1:].strip().lower().replace(" ", "")
            if body.startswith("rows="):
                value = body[5:]
                if value not in ("actual", "predicted"):
                    raise ParseError(path, lineno, f"orientation must be rows=actual or rows=predicted, got {value!r}")
                orientation = value
            continue
        cells = [c.strip() for c in split_row(line)]
        if header is None:
            header = (lineno, cells[1:])
        else:
            rows.append((lineno, cells))
    if orientation is None:
        raise ParseError(path, 1, "missing '# rows=actual' (or '# rows=predicted') orientation pragma")
    if header is None:
        raise ParseError(path, None, "missing header row of class names")
    hline, names = header
    try:
        space = LabelSpace(tuple(names))
    except ValidationError as e:
        raise ParseError(path, hline, str(e)) from None
    k = space.size
    if len(rows) != k:
        where = rows[-1][0] if rows else hline
        raise ParseError(path, where, f"matrix is not square: {len(rows)} rows for {k} columns")
    counts = np.zeros((k, k), dtype=np.int64)
    for i, (lineno, cells) in enumerate(rows):
        if len(cells) != k + 1:
            raise ParseError(path, lineno, f"matrix is not square: expected {k} counts, got {len(cells) - 1}")
        if cells[0] != names[i]:
            raise ParseError(path, lineno, f"row label {cells[0]!r} does not match column {names[i]!r}")
        for j, v in enumerate(cells[1:]):
            try:
                n = int(v)
            except ValueError:
                raise ParseError(path, lineno, f"count {v!r} is not an integer") from None
            if n < 0:
                raise ParseError(path, lineno, f"negative count {n}")
            counts[i, j] = n
    if orientation == "predicted":
        counts = counts.T
    return ConfusionMatrix(space, counts)


def read_cm(path) -> ConfusionMatrix:
    return parse_cm(read_text(path), path)


def format_cm(cm: ConfusionMatrix) -> str:
    lines = ["# rows=actual", join_row(["class", *cm.space.names])]
    for name, row in zip(cm.space.names, cm.counts):
        lines.append(join_row([name, *(int(v) for v in row)]))
    return "\n".join(lines) + "\n"


def write_cm(cm: ConfusionMatrix, path) -> None:
    write_text(path, format_cm(cm))
