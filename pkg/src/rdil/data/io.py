"""ARFF and CSV reading/writing.

Only the dense ARFF subset is handled: ``@relation``, numeric and nominal
``@attribute`` declarations, ``@data``, ``?`` for missing values and ``%``
comments. Keywords are case-insensitive.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import os
from typing import Optional, Union

import numpy as np

from ..errors import EmptyDatasetError, ParseError
from .dataset import Attribute, Dataset, Schema

logger = logging.getLogger(__name__)

_NUMERIC_TYPES = {"numeric", "real", "integer"}
_MISSING_CSV = {"", "?"}


def load_dataset(source, format: Optional[str] = None, class_column=None, relation=None) -> Dataset:
    """Read a dataset from a byte/text stream or a filesystem path.

    ``format`` is ``"csv"`` or ``"arff"``; when ``source`` is a path it may be
    omitted and is taken from the file extension. ``class_column`` selects the
    label column by name or index (default: the last column).
    """
    if isinstance(source, (str, os.PathLike)):
        path = os.fspath(source)
        if format is None:
            format = os.path.splitext(path)[1].lstrip(".").lower()
        if relation is None:
            relation = os.path.splitext(os.path.basename(path))[0]
        with open(path, "rb") as fh:
            text = _decode(fh.read())
    else:
        text = _decode(source.read())
    if format is None:
        raise ValueError("format must be given for streams")
    format = format.lower()
    if format == "arff":
        return _parse_arff(text, class_column)
    if format == "csv":
        return _parse_csv(text, class_column, relation or "data")
    raise ValueError(f"unsupported format {format!r}")


def dump_dataset(d: Dataset, stream, format: str) -> None:
    """Write ``d`` to a text stream in ``format`` (class column last)."""
    format = format.lower()
    if format == "arff":
        stream.write(dumps_arff(d))
    elif format == "csv":
        stream.write(dumps_csv(d))
    else:
        raise ValueError(f"unsupported format {format!r}")


def _decode(data) -> str:
    if isinstance(data, bytes):
        return data.decode("utf-8-sig")
    return data


# ---------------------------------------------------------------------------
# ARFF


def _split_arff_row(line: str, lineno: int) -> list[tuple[str, bool]]:
    """Split a data row into (token, was_quoted) pairs."""
    out = []
    i, n = 0, len(line)
    while True:
        while i < n and line[i] in " \t":
            i += 1
        if i < n and line[i] in "'\"":
            quote = line[i]
            i += 1
            buf = []
            while i < n and line[i] != quote:
                if line[i] == "\\" and i + 1 < n:
                    i += 1
                buf.append(line[i])
                i += 1
            if i >= n:
                raise ParseError("unterminated quoted value", lineno)
            i += 1
            token, quoted = "".join(buf), True
            while i < n and line[i] in " \t":
                i += 1
            if i < n and line[i] != ",":
                raise ParseError("unexpected text after quoted value", lineno)
        else:
            j = line.find(",", i)
            j = n if j < 0 else j
            token, quoted = line[i:j].strip(), False
            i = j
        out.append((token, quoted))
        if i >= n:
            break
        i += 1  # skip comma
    return out


def _split_header_name(rest: str, lineno: int) -> tuple[str, str]:
    rest = rest.strip()
    if not rest:
        raise ParseError("missing name", lineno)
    if rest[0] in "'\"":
        end = rest.find(rest[0], 1)
        if end < 0:
            raise ParseError("unterminated quoted name", lineno)
        return rest[1:end], rest[end + 1 :].strip()
    parts = rest.split(None, 1)
    return parts[0], parts[1].strip() if len(parts) > 1 else ""


def _parse_arff(text: str, class_column) -> Dataset:
    relation = "data"
    attributes: list[Attribute] = []
    rows: list[tuple[int, list[tuple[str, bool]]]] = []
    in_data = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        if not in_data:
            if not line.startswith("@"):
                raise ParseError(f"expected a header declaration, got {line!r}", lineno)
            keyword, _, rest = line.partition(" ")
            if "\t" in keyword:
                keyword, _, more = keyword.partition("\t")
                rest = more + " " + rest
            keyword = keyword.lower()
            if keyword == "@relation":
                relation, _ = _split_header_name(rest, lineno)
            elif keyword == "@attribute":
                name, type_text = _split_header_name(rest, lineno)
                attributes.append(_parse_attribute_type(name, type_text, lineno))
            elif keyword == "@data":
                in_data = True
            else:
                raise ParseError(f"unknown declaration {keyword!r}", lineno)
            continue
        if line.startswith("{"):
            raise ParseError("sparse ARFF rows are not supported", lineno)
        tokens = _split_arff_row(line, lineno)
        if len(tokens) != len(attributes):
            raise ParseError(
                f"row has {len(tokens)} values but {len(attributes)} attributes are declared", lineno
            )
        rows.append((lineno, tokens))
    if not attributes:
        raise ParseError("no @attribute declarations")
    if not in_data:
        raise ParseError("missing @data section")
    cls_idx = _resolve_class_column(class_column, [a.name for a in attributes])
    if not attributes[cls_idx].is_nominal:
        raise ParseError(f"class attribute {attributes[cls_idx].name!r} must be nominal")
    return _build(relation, attributes, cls_idx, rows, missing={"?"})


def _parse_attribute_type(name: str, type_text: str, lineno: int) -> Attribute:
    if type_text.startswith("{"):
        if not type_text.endswith("}"):
            raise ParseError("unterminated nominal value list", lineno)
        inner = type_text[1:-1].strip()
        values = [tok for tok, _ in _split_arff_row(inner, lineno)] if inner else []
        if not values:
            raise ParseError(f"nominal attribute {name!r} has no values", lineno)
        if len(set(values)) != len(values):
            raise ParseError(f"nominal attribute {name!r} has duplicate values", lineno)
        return Attribute.nominal(name, values)
    kind = type_text.split()[0].lower() if type_text else ""
    if kind in _NUMERIC_TYPES:
        return Attribute.numeric(name)
    raise ParseError(f"unsupported attribute type {type_text!r} for {name!r}", lineno)


def _build(relation, columns, cls_idx, rows, missing) -> Dataset:
    feats = [a for j, a in enumerate(columns) if j != cls_idx]
    cls_attr = columns[cls_idx]
    lookups = [
        {v: k for k, v in enumerate(a.values)} if a.is_nominal else None for a in columns
    ]
    X = []
    y = []
    dropped = 0
    for lineno, tokens in rows:
        tok, quoted = tokens[cls_idx]
        if tok in missing and not quoted:
            dropped += 1
            continue
        label = lookups[cls_idx].get(tok)
        if label is None:
            raise ParseError(f"unknown class value {tok!r}", lineno)
        row = []
        for j, (tok, quoted) in enumerate(tokens):
            if j == cls_idx:
                continue
            if tok in missing and not quoted:
                row.append(math.nan)
            elif lookups[j] is not None:
                idx = lookups[j].get(tok)
                if idx is None:
                    raise ParseError(f"unknown nominal value {tok!r} for {columns[j].name!r}", lineno)
                row.append(float(idx))
            else:
                try:
                    row.append(float(tok))
                except ValueError:
                    raise ParseError(f"non-numeric value {tok!r} for {columns[j].name!r}", lineno) from None
        X.append(row)
        y.append(label)
    if dropped:
        logger.warning("dropped %d instance(s) with a missing class value", dropped)
    if not y:
        raise EmptyDatasetError("dataset has zero instances")
    schema = Schema(tuple(feats), cls_attr, relation)
    return Dataset(schema, np.array(X, dtype=np.float64).reshape(len(y), len(feats)), y)


def _resolve_class_column(class_column, names) -> int:
    if class_column is None:
        return len(names) - 1
    if isinstance(class_column, int):
        idx = class_column if class_column >= 0 else len(names) + class_column
        if not 0 <= idx < len(names):
            raise ParseError(f"class column index {class_column} out of range")
        return idx
    if class_column in names:
        return names.index(class_column)
    if isinstance(class_column, str) and class_column.lstrip("-").isdigit():
        return _resolve_class_column(int(class_column), names)
    raise ParseError(f"class column {class_column!r} not found")


def _quote_arff(value: str) -> str:
    if value == "" or any(c in value for c in " \t,'\"{}%?\\"):
        return "'" + value.replace("\\", "\\\\").replace("'", "\\'") + "'"
    return value


def _format_number(v: float) -> str:
    if not math.isfinite(v):
        return repr(float(v))
    if v == int(v) and abs(v) < 1e15:
        return str(int(v)) if not (v == 0 and math.copysign(1, v) < 0) else "-0.0"
    return repr(float(v))


def dumps_arff(d: Dataset) -> str:
    schema = d.schema
    lines = [f"@relation {_quote_arff(schema.relation)}", ""]
    for a in schema.attributes + (schema.class_attribute,):
        if a.is_nominal:
            vals = ",".join(_quote_arff(v) for v in a.values)
            lines.append(f"@attribute {_quote_arff(a.name)} {{{vals}}}")
        else:
            lines.append(f"@attribute {_quote_arff(a.name)} numeric")
    lines += ["", "@data"]
    for x, label in zip(d.X, d.y):
        cells = []
        for v, a in zip(x, schema.attributes):
            if np.isnan(v):
                cells.append("?")
            elif a.is_nominal:
                cells.append(_quote_arff(a.values[int(v)]))
            else:
                cells.append(_format_number(v))
        cells.append(_quote_arff(schema.class_names[label]))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def _row_cells(schema, x, missing) -> list[str]:
    cells = []
    for v, a in zip(x, schema.attributes):
        if np.isnan(v):
            cells.append(missing)
        elif a.is_nominal:
            cells.append(a.values[int(v)])
        else:
            cells.append(_format_number(v))
    return cells


# ---------------------------------------------------------------------------
# CSV


def _is_number(token: str) -> bool:
    try:
        return math.isfinite(float(token))
    except ValueError:
        return False


def _parse_csv(text: str, class_column, relation: str) -> Dataset:
    reader = csv.reader(io.StringIO(text, newline=""))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("missing header row", 1) from None
    header = [h.strip() for h in header]
    if not header or header == [""]:
        raise ParseError("empty header row", 1)
    if len(set(header)) != len(header):
        raise ParseError("duplicate column names in header", 1)
    width = len(header)
    raw_rows = []
    for row in reader:
        lineno = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != width:
            raise ParseError(f"row has {len(row)} values but header has {width} columns", lineno)
        raw_rows.append((lineno, [c.strip() for c in row]))
    if not raw_rows:
        raise EmptyDatasetError("dataset has zero instances")
    cls_idx = _resolve_class_column(class_column, header)

    columns = []
    for j, name in enumerate(header):
        present = [r[j] for _, r in raw_rows if r[j] not in _MISSING_CSV]
        numeric = all(_is_number(t) for t in present)
        if j == cls_idx:
            distinct = set(present)
            if numeric:
                values = sorted(distinct, key=lambda t: (float(t), t))
            else:
                values = sorted(distinct)
            if not values:
                raise EmptyDatasetError("class column has no values")
            columns.append(Attribute.nominal(name, values))
        elif numeric:
            columns.append(Attribute.numeric(name))
        else:
            columns.append(Attribute.nominal(name, sorted(set(present))))
    rows = [(ln, [(tok, False) for tok in r]) for ln, r in raw_rows]
    return _build(relation, columns, cls_idx, rows, missing=_MISSING_CSV)


def dumps_csv(d: Dataset) -> str:
    schema = d.schema
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([a.name for a in schema.attributes] + [schema.class_attribute.name])
    for x, label in zip(d.X, d.y):
        writer.writerow(_row_cells(schema, x, "?") + [schema.class_names[label]])
    return buf.getvalue()


def read_path(path: Union[str, os.PathLike], class_column=None) -> Dataset:
    return load_dataset(path, None, class_column=class_column)
