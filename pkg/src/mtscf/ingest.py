"""Readers and writers for dataset and feature-weight files.

Three dataset layouts are understood:

* the sktime/UEA ``.ts`` text format (equal length, no timestamps),
* a flat CSV with ``id,label,v0,...`` rows in time-major order,
* a JSON document ``{"n_classes": K, "instances": [{"id", "label", "series"}]}``.

Feature weights are CSV rows of ``id,w0,...,w{t-1}``.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, TextIO

import numpy as np

from .core import LabeledDataset, MtsInstance
from .errors import (
    DimensionMismatchError,
    DuplicateIdError,
    FieldCountError,
    HeaderError,
    MissingDataSectionError,
    NonNumericValueError,
    RaggedSeriesError,
    StructuralError,
    TimestampsUnsupportedError,
    UnequalLengthError,
    UnknownLabelError,
)


@dataclass(frozen=True)
class TsHeader:
    problem_name: str
    dimensions: int
    series_length: int
    class_labels: tuple[str, ...]
    equal_length: bool = True


def _lines(text: str | TextIO) -> list[str]:
    if not isinstance(text, str):
        text = text.read()
    if text.startswith("﻿"):
        text = text[1:]
    return text.splitlines()


def _bool(value: str, lineno: int, key: str) -> bool:
    v = value.strip().lower()
    if v in ("true", "1", "yes"):
        return True
    if v in ("false", "0", "no"):
        return False
    raise HeaderError(f"@{key} expects true/false, got {value!r}", lineno)


def _positive_int(value: str, lineno: int, key: str) -> int:
    try:
        n = int(value)
    except ValueError:
        raise HeaderError(f"@{key} expects an integer, got {value!r}", lineno) from None
    if n < 1:
        raise HeaderError(f"@{key} must be positive, got {n}", lineno)
    return n


def _float(token: str, lineno: int) -> float:
    try:
        v = float(token)
    except ValueError:
        raise NonNumericValueError(f"non-numeric value {token.strip()!r}", lineno) from None
    if not math.isfinite(v):
        raise NonNumericValueError(f"non-finite value {token.strip()!r}", lineno)
    return v


def parse_ts_header(lines: Iterable[str]) -> tuple[TsHeader, int]:
    """Parse directives up to ``@data``; returns the header and the 0-based index of the @data line."""
    problem = ""
    dims: int | None = None
    length: int | None = None
    labels: tuple[str, ...] | None = None
    univariate: bool | None = None
    for idx, raw in enumerate(lines):
        lineno = idx + 1
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not line.startswith("@"):
            raise MissingDataSectionError("record found before @data", lineno)
        key, _, rest = line[1:].partition(" ")
        key, rest = key.lower(), rest.strip()
        if key == "data":
            if labels is None:
                raise HeaderError("@classLabel true <labels...> is required", lineno)
            if dims is None and univariate:
                dims = 1
            header = TsHeader(problem, dims or 0, length or 0, labels, True)
            return header, idx
        if key == "problemname":
            problem = rest
        elif key == "timestamps":
            if _bool(rest, lineno, key):
                raise TimestampsUnsupportedError("timestamped series are not supported", lineno)
        elif key == "univariate":
            univariate = _bool(rest, lineno, key)
        elif key == "dimensions":
            dims = _positive_int(rest, lineno, key)
        elif key == "equallength":
            if not _bool(rest, lineno, key):
                raise UnequalLengthError("only equal-length datasets are supported", lineno)
        elif key == "serieslength":
            length = _positive_int(rest, lineno, key)
        elif key == "classlabel":
            parts = rest.split()
            if not parts or not _bool(parts[0], lineno, key):
                raise HeaderError("classification datasets need '@classLabel true <labels...>'", lineno)
            if len(parts) < 2:
                raise HeaderError("@classLabel declares no labels", lineno)
            if len(set(parts[1:])) != len(parts) - 1:
                raise HeaderError("@classLabel lists a label twice", lineno)
            labels = tuple(parts[1:])
        elif key in ("missing", "targetlabel"):
            if key == "targetlabel" and _bool(rest.split()[0] if rest else "false", lineno, key):
                raise HeaderError("regression targets are not supported", lineno)
        else:
            raise HeaderError(f"unknown directive @{key}", lineno)
    raise MissingDataSectionError("no @data section", None)


def parse_ts(text: str | TextIO, id_prefix: str = "") -> LabeledDataset:
    """Parse a ``.ts`` document. Instance ids are ``f"{id_prefix}{row}"``."""
    lines = _lines(text)
    header, data_idx = parse_ts_header(lines)
    label_index = {lab: i for i, lab in enumerate(header.class_labels)}
    d, t = header.dimensions or None, header.series_length or None

    series, labels = [], []
    for idx in range(data_idx + 1, len(lines)):
        lineno = idx + 1
        line = lines[idx].strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split(":")
        if len(fields) < 2:
            raise DimensionMismatchError("record has no class label field", lineno)
        label, channels = fields[-1].strip(), fields[:-1]
        if d is None:
            d = len(channels)
        if len(channels) != d:
            raise DimensionMismatchError(f"expected {d} channels, found {len(channels)}", lineno)
        rows = []
        for ch, chunk in enumerate(channels):
            values = [_float(tok, lineno) for tok in chunk.split(",")] if chunk.strip() else []
            if t is None:
                t = len(values)
            if len(values) != t:
                raise RaggedSeriesError(
                    f"channel {ch} has {len(values)} values, expected {t}", lineno
                )
            rows.append(values)
        if label not in label_index:
            raise UnknownLabelError(f"class label {label!r} not declared in header", lineno)
        series.append(np.array(rows, dtype=np.float64).T)
        labels.append(label_index[label])

    instances = [MtsInstance(x, id=f"{id_prefix}{i}") for i, x in enumerate(series)]
    return LabeledDataset(instances, np.array(labels, dtype=np.int64), len(header.class_labels))


def parse_ts_with_header(text: str | TextIO, id_prefix: str = "") -> tuple[LabeledDataset, TsHeader]:
    lines = _lines(text)
    header, _ = parse_ts_header(lines)
    ds = parse_ts("\n".join(lines), id_prefix)
    if len(ds):
        header = TsHeader(header.problem_name, ds.d, ds.t, header.class_labels, True)
    return ds, header


def serialize_ts(
    dataset: LabeledDataset,
    problem_name: str = "problem",
    class_labels: Iterable[str] | None = None,
) -> str:
    """Write a dataset in ``.ts`` form; floats use ``repr`` so parsing restores them exactly."""
    labels = list(class_labels) if class_labels is not None else [str(i) for i in range(dataset.n_classes)]
    if len(labels) != dataset.n_classes:
        raise StructuralError("class_labels must have n_classes entries")
    t, d = dataset.shape
    out = [
        f"@problemName {problem_name}",
        "@timeStamps false",
        "@missing false",
        f"@univariate {'true' if d == 1 else 'false'}",
        f"@dimensions {d}",
        "@equalLength true",
        f"@seriesLength {t}",
        f"@classLabel true {' '.join(labels)}",
        "@data",
    ]
    for inst, y in zip(dataset.instances, dataset.labels):
        chans = [",".join(repr(float(v)) for v in inst.values[:, j]) for j in range(d)]
        out.append(":".join(chans) + ":" + labels[int(y)])
    return "\n".join(out) + "\n"


def parse_csv(text: str | TextIO, t: int, d: int, n_classes: int | None = None) -> LabeledDataset:
    """Rows of ``id,label`` followed by ``t*d`` values in time-major order."""
    expected = 2 + t * d
    instances, labels = [], []
    reader = csv.reader(io.StringIO("\n".join(_lines(text))))
    for lineno, row in enumerate(reader, start=1):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != expected:
            raise FieldCountError(f"expected {expected} fields, found {len(row)}", lineno)
        try:
            label = int(row[1])
        except ValueError:
            raise NonNumericValueError(f"label {row[1]!r} is not an integer", lineno) from None
        values = np.array([_float(c, lineno) for c in row[2:]]).reshape(t, d)
        instances.append(MtsInstance(values, id=row[0].strip()))
        labels.append(label)
    if n_classes is None:
        n_classes = max(labels) + 1 if labels else 1
    return LabeledDataset(instances, np.array(labels, dtype=np.int64), n_classes)


def serialize_csv(dataset: LabeledDataset) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for inst, y in zip(dataset.instances, dataset.labels):
        w.writerow([inst.id, int(y), *(repr(float(v)) for v in inst.values.reshape(-1))])
    return buf.getvalue()


def parse_json_dataset(text: str | TextIO) -> LabeledDataset:
    doc = json.loads(text if isinstance(text, str) else text.read())
    try:
        items = doc["instances"]
        instances = [MtsInstance(item["series"], id=item["id"]) for item in items]
        labels = [int(item["label"]) for item in items]
        n_classes = int(doc.get("n_classes", max(labels, default=0) + 1))
    except (KeyError, TypeError) as exc:
        raise HeaderError(f"malformed JSON dataset: {exc}") from None
    return LabeledDataset(instances, np.array(labels, dtype=np.int64), n_classes)


def serialize_json_dataset(dataset: LabeledDataset) -> str:
    doc = {
        "n_classes": dataset.n_classes,
        "instances": [
            {"id": inst.id, "label": int(y), "series": inst.values.tolist()}
            for inst, y in zip(dataset.instances, dataset.labels)
        ],
    }
    return json.dumps(doc)


def parse_weights(text: str | TextIO, t: int) -> dict[str, np.ndarray]:
    """CSV rows of ``id`` followed by ``t`` importance values."""
    out: dict[str, np.ndarray] = {}
    reader = csv.reader(io.StringIO("\n".join(_lines(text))))
    for lineno, row in enumerate(reader, start=1):
        if not row or all(not c.strip() for c in row):
            continue
        key = row[0].strip()
        if len(row) - 1 != t:
            raise FieldCountError(f"weights for {key!r} have {len(row) - 1} values, expected {t}", lineno)
        if key in out:
            raise DuplicateIdError(f"duplicate id {key!r}", lineno)
        w = np.array([_float(c, lineno) for c in row[1:]])
        w.setflags(write=False)
        out[key] = w
    return out


def serialize_weights(weights: Mapping[str, np.ndarray]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for key, vec in weights.items():
        w.writerow([key, *(repr(float(v)) for v in np.asarray(vec).reshape(-1))])
    return buf.getvalue()


def load_dataset(path: str | Path, shape: tuple[int, int] | None = None) -> LabeledDataset:
    """Load a dataset, choosing the reader from the file suffix."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    suffix = path.suffix.lower()
    if suffix == ".ts":
        return parse_ts(text)
    if suffix == ".json":
        return parse_json_dataset(text)
    if suffix == ".csv":
        if shape is None:
            raise StructuralError(f"{path}: CSV datasets need an explicit (t, d) shape")
        return parse_csv(text, *shape)
    raise StructuralError(f"{path}: unsupported dataset format {suffix!r}")


def load_weights(path: str | Path, t: int) -> dict[str, np.ndarray]:
    return parse_weights(Path(path).read_text(encoding="utf-8"), t)
