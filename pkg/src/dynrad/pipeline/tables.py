"""CSV and JSON files exchanged between pipeline stages.

Floats are written with ``repr`` (shortest round-trip form), so rewriting
the same numbers gives the same bytes and reading them back is exact.
"""

from __future__ import annotations

import csv
import json
from collections import OrderedDict
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..dynamic import ColumnSpec
from ..errors import ValidationError

STATIC_KEYS = ("subjectId", "timeIndex", "time")


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _write_rows(path, header, rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _read_rows(path) -> tuple[list[str], list[list[str]]]:
    try:
        with Path(path).open(newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from None
    if not rows:
        raise ValidationError(f"{path}: empty CSV")
    header, body = rows[0], rows[1:]
    for i, r in enumerate(body, start=2):
        if len(r) != len(header):
            raise ValidationError(f"{path}:{i}: expected {len(header)} fields, got {len(r)}")
    return header, body


def write_json(path, obj) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=False) + "\n")


def read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from None


# -- static table -----------------------------------------------------------

@dataclass
class StaticRow:
    subject_id: str
    time_index: int
    time: float
    values: np.ndarray


def write_static(path, feature_names, rows: list[StaticRow]) -> None:
    _write_rows(path, list(STATIC_KEYS) + list(feature_names),
                ([r.subject_id, r.time_index, float(r.time)] + [float(v) for v in r.values] for r in rows))


def read_static(path) -> tuple[list[str], "OrderedDict[str, list[StaticRow]]"]:
    """Feature names and rows grouped by subject, in file order."""
    header, body = _read_rows(path)
    if tuple(header[:3]) != STATIC_KEYS:
        raise ValidationError(f"{path}: static table must start with columns {STATIC_KEYS}")
    names = header[3:]
    groups: OrderedDict[str, list[StaticRow]] = OrderedDict()
    for r in body:
        try:
            row = StaticRow(r[0], int(r[1]), float(r[2]), np.array([float(v) for v in r[3:]]))
        except ValueError as exc:
            raise ValidationError(f"{path}: bad value ({exc})") from None
        groups.setdefault(row.subject_id, []).append(row)
    return names, groups


# -- labels -----------------------------------------------------------------

def write_labels(path, labels: dict[str, int]) -> None:
    _write_rows(path, ["subjectId", "label"], ([s, int(v)] for s, v in labels.items()))


def read_labels(path) -> dict[str, int]:
    header, body = _read_rows(path)
    if header != ["subjectId", "label"]:
        raise ValidationError(f"{path}: labels table must have columns subjectId,label")
    out = {}
    for sid, lab in body:
        if lab not in ("0", "1"):
            raise ValidationError(f"{path}: label for {sid!r} must be 0 or 1")
        out[sid] = int(lab)
    return out


# -- dynamic table ----------------------------------------------------------

def schema_path_for(table_path) -> Path:
    p = Path(table_path)
    return p.with_name(p.stem + ".schema.json")


def write_dynamic(path, columns: list[ColumnSpec], subjects: list[str], X: np.ndarray, meta: dict) -> None:
    _write_rows(path, ["subjectId"] + [c.name for c in columns],
                ([s] + [float(v) for v in row] for s, row in zip(subjects, X)))
    write_json(schema_path_for(path), {
        **meta,
        "columns": [{"name": c.name, "staticName": c.static, "transform": c.transform, "index": c.index}
                    for c in columns],
    })


def read_dynamic(path) -> tuple[list[str], list[str], np.ndarray]:
    """(column names, subject ids, matrix).  Column names must match the schema sidecar."""
    header, body = _read_rows(path)
    if not header or header[0] != "subjectId":
        raise ValidationError(f"{path}: first column must be subjectId")
    names = header[1:]
    schema_file = schema_path_for(path)
    if schema_file.exists():
        listed = [c["name"] for c in read_json(schema_file)["columns"]]
        if listed != names:
            raise ValidationError(f"{path}: columns disagree with {schema_file.name}")
    try:
        X = np.array([[float(v) for v in r[1:]] for r in body], dtype=np.float64).reshape(len(body), len(names))
    except ValueError as exc:
        raise ValidationError(f"{path}: bad value ({exc})") from None
    return names, [r[0] for r in body], X


def write_roc(path, fpr, tpr) -> None:
    _write_rows(path, ["fpr", "tpr"], ([float(a), float(b)] for a, b in zip(fpr, tpr)))
