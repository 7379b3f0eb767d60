"""Dense ARFF files with numeric and nominal attributes.

Supported: ``%`` comments, ``@relation``, ``@attribute <name> numeric|real|integer``,
``@attribute <name> {v1,v2,...}`` and ``@data`` followed by comma-separated
rows. Keywords are case-insensitive. Sparse rows, missing values (``?``) and
string/date/relational attributes are rejected.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from fusionbench.boost import FeatureDataset
from fusionbench.core import LabelSpace
from fusionbench.errors import ParseError, ValidationError
from fusionbench.io._text import fmt, read_text, split_row, write_text

NUMERIC_KINDS = {"numeric", "real", "integer"}
UNSUPPORTED_KINDS = {"string", "date", "relational"}


@dataclass(frozen=True)
class ArffAttribute:
    name: str
    kind: str  # "numeric" or "nominal"
    values: tuple[str, ...] = ()


@dataclass(frozen=True)
class ArffDocument:
    relation: str
    attributes: tuple[ArffAttribute, ...]
    data: tuple[tuple, ...]


def _unquote(s: str) -> str:
    s = s.strip()
    if len(s) >= 2 and s[0] == s[-1] and s[0] in "'\"":
        return s[1:-1]
    return s


def _split_name(rest: str, path, lineno) -> tuple[str, str]:
    rest = rest.strip()
    if not rest:
        raise ParseError(path, lineno, "attribute declaration has no name")
    if rest[0] in "'\"":
        end = rest.find(rest[0], 1)
        if end < 0:
            raise ParseError(path, lineno, "unterminated quoted attribute name")
        return rest[1:end], rest[end + 1:].strip()
    parts = rest.split(None, 1)
    return parts[0], parts[1].strip() if len(parts) > 1 else ""


def _data_cells(line: str) -> list[str]:
    quote = "'" if "'" in line else '"'
    return [c.strip() for c in split_row(line, quotechar=quote)]


def parse_arff(text: str, path="<string>") -> ArffDocument:
    relation = None
    attributes: list[ArffAttribute] = []
    data = []
    in_data = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        if not in_data:
            if not line.startswith("@"):
                raise ParseError(path, lineno, f"expected a declaration, got {line[:40]!r}")
            keyword, _, rest = line.partition(" ")
            keyword = keyword.lower()
            if keyword == "@relation":
                relation = _unquote(rest)
            elif keyword == "@attribute":
                name, spec = _split_name(rest, path, lineno)
                if any(a.name == name for a in attributes):
                    raise ParseError(path, lineno, f"duplicate attribute {name!r}")
                if spec.startswith("{"):
                    if not spec.endswith("}"):
                        raise ParseError(path, lineno, "unterminated nominal value list")
                    values = tuple(_unquote(v) for v in split_row(spec[1:-1], quotechar="'") if v.strip())
                    if not values:
                        raise ParseError(path, lineno, f"nominal attribute {name!r} declares no values")
                    if len(set(values)) != len(values):
                        raise ParseError(path, lineno, f"nominal attribute {name!r} repeats a value")
                    attributes.append(ArffAttribute(name, "nominal", values))
                else:
                    kind = spec.split()[0].lower() if spec else ""
                    if kind in NUMERIC_KINDS:
                        attributes.append(ArffAttribute(name, "numeric"))
                    elif kind in UNSUPPORTED_KINDS:
                        raise ParseError(path, lineno, f"attribute kind {kind!r} is not supported (numeric and nominal only)")
                    else:
                        raise ParseError(path, lineno, f"unknown attribute kind {spec!r}")
            elif keyword == "@data":
                if not attributes:
                    raise ParseError(path, lineno, "@data before any @attribute")
                in_data = True
            else:
                raise ParseError(path, lineno, f"unknown declaration {keyword!r}")
            continue
        if line.startswith("{"):
            raise ParseError(path, lineno, "sparse ARFF rows are not supported")
        cells = _data_cells(line)
        if len(cells) != len(attributes):
            raise ParseError(path, lineno, f"row has {len(cells)} values but {len(attributes)} attributes are declared")
        row = []
        for attr, cell in zip(attributes, cells):
            if cell == "?":
                raise ParseError(path, lineno, f"missing value for {attr.name!r} is not supported")
            if attr.kind == "numeric":
                try:
                    v = float(cell)
                except ValueError:
                    raise ParseError(path, lineno, f"non-numeric value {cell!r} for attribute {attr.name!r}") from None
                if not math.isfinite(v):
                    raise ParseError(path, lineno, f"non-finite value for attribute {attr.name!r}")
                row.append(v)
            else:
                v = _unquote(cell)
                if v not in attr.values:
                    raise ParseError(path, lineno, f"value {v!r} not declared for attribute {attr.name!r} {{{','.join(attr.values)}}}")
                row.append(v)
        data.append(tuple(row))
    if relation is None:
        raise ParseError(path, None, "missing @relation")
    if not in_data:
        raise ParseError(path, None, "missing @data section")
    return ArffDocument(relation, tuple(attributes), tuple(data))


def to_dataset(doc: ArffDocument, class_attribute: str | None = None, path="<string>") -> FeatureDataset:
    """Numeric attributes become features; one nominal attribute is the class."""
    if class_attribute is None:
        nominal = [i for i, a in enumerate(doc.attributes) if a.kind == "nominal"]
        if not nominal:
            raise ParseError(path, None, "no nominal attribute to use as the class")
        ci = nominal[-1]
    else:
        names = [a.name for a in doc.attributes]
        if class_attribute not in names:
            raise ParseError(path, None, f"class attribute {class_attribute!r} not declared")
        ci = names.index(class_attribute)
        if doc.attributes[ci].kind != "nominal":
            raise ParseError(path, None, f"class attribute {class_attribute!r} is not nominal")
    cls = doc.attributes[ci]
    feats = [i for i in range(len(doc.attributes)) if i != ci]
    for i in feats:
        if doc.attributes[i].kind != "numeric":
            raise ParseError(path, None, f"nominal feature attribute {doc.attributes[i].name!r} is not supported")
    try:
        space = LabelSpace(cls.values)
    except ValidationError as e:
        raise ParseError(path, None, f"class attribute {cls.name!r}: {e}") from None
    X = np.array([[row[i] for i in feats] for row in doc.data], dtype=np.float64).reshape(len(doc.data), len(feats))
    y = np.array([space.index(row[ci]) for row in doc.data], dtype=np.int64)
    return FeatureDataset(space, X, y, tuple(doc.attributes[i].name for i in feats))


def from_dataset(ds: FeatureDataset, relation: str = "features", class_name: str = "class") -> ArffDocument:
    attrs = [ArffAttribute(n, "numeric") for n in ds.feature_names]
    attrs.append(ArffAttribute(class_name, "nominal", ds.space.names))
    rows = tuple(
        (*(float(v) for v in x), ds.space.names[int(c)]) for x, c in zip(ds.features, ds.labels)
    )
    return ArffDocument(relation, tuple(attrs), rows)


_BARE = re.compile(r"^[^\s,{}'\"%]+$")


def _quote(s: str) -> str:
    return s if _BARE.match(s) else "'" + s.replace("'", "\\'") + "'"


def format_arff(doc: ArffDocument) -> str:
    lines = [f"@relation {_quote(doc.relation)}", ""]
    for a in doc.attributes:
        if a.kind == "numeric":
            lines.append(f"@attribute {_quote(a.name)} numeric")
        else:
            lines.append(f"@attribute {_quote(a.name)} {{{','.join(_quote(v) for v in a.values)}}}")
    lines += ["", "@data"]
    for row in doc.data:
        lines.append(",".join(fmt(v) if isinstance(v, float) else _quote(v) for v in row))
    return "\n".join(lines) + "\n"


def read_arff(path, class_attribute: str | None = None) -> FeatureDataset:
    return to_dataset(parse_arff(read_text(path), path), class_attribute, path)


def write_arff(ds: FeatureDataset, path, relation: str = "features") -> None:
    write_text(path, format_arff(from_dataset(ds, relation)))
