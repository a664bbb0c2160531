"""Raw volume files with JSON sidecars, and series manifests.

A volume ``foo`` is stored as ``foo.json``::

    {"dims": [m, n, p], "spacing": [sx, sy, sz], "dtype": "f32", "order": "slice-row-col"}

next to a little-endian payload ``foo.raw``.  Masks use dtype ``u8`` (0/1).

A manifest lists subjects::

    {"subjects": [{"subjectId": "s001", "label": 1,
                   "timepoints": [{"time": 1.0, "volumePath": "...json", "maskPath": "...json"}, ...]}]}

Paths inside a manifest are resolved relative to the manifest's directory.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .grid import RoiMask, SeriesSample, Timepoint, VoxelGrid

DTYPES = {"f32": "<f4", "f64": "<f8", "u8": "u1", "i16": "<i2", "u16": "<u2", "i32": "<i4"}
ORDER = "slice-row-col"


def _sidecar_and_payload(path) -> tuple[Path, Path]:
    path = Path(path)
    if path.suffix == ".raw":
        return path.with_suffix(".json"), path
    return path.with_suffix(".json"), path.with_suffix(".raw")


def write_volume(path, array: np.ndarray, spacing=(1.0, 1.0, 1.0), dtype: str = "f32") -> Path:
    """Write a ``(p, m, n)`` array; returns the sidecar path."""
    if dtype not in DTYPES:
        raise ValidationError(f"unsupported dtype {dtype!r}")
    array = np.asarray(array)
    if array.ndim != 3:
        raise ValidationError("volume arrays must be 3-D (slice,row,col)")
    p, m, n = array.shape
    sidecar, payload = _sidecar_and_payload(path)
    header = {
        "dims": [m, n, p],
        "spacing": [float(s) for s in spacing],
        "dtype": dtype,
        "order": ORDER,
    }
    sidecar.parent.mkdir(parents=True, exist_ok=True)
    sidecar.write_text(json.dumps(header) + "\n")
    payload.write_bytes(np.ascontiguousarray(array, dtype=DTYPES[dtype]).tobytes())
    return sidecar


def read_volume(path) -> tuple[np.ndarray, tuple[float, float, float], str]:
    sidecar, payload = _sidecar_and_payload(path)
    try:
        header = json.loads(sidecar.read_text())
        m, n, p = (int(d) for d in header["dims"])
        spacing = tuple(float(s) for s in header["spacing"])
        dtype = header["dtype"]
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise ValidationError(f"{sidecar}: unreadable volume header ({exc})") from exc
    if header.get("order", ORDER) != ORDER:
        raise ValidationError(f"{sidecar}: unsupported voxel order {header.get('order')!r}")
    if dtype not in DTYPES:
        raise ValidationError(f"{sidecar}: unsupported dtype {dtype!r}")
    try:
        raw = payload.read_bytes()
    except OSError as exc:
        raise ValidationError(f"{payload}: cannot read payload ({exc})") from exc
    expected = m * n * p * np.dtype(DTYPES[dtype]).itemsize
    if len(raw) != expected:
        raise ValidationError(f"{payload}: payload has {len(raw)} bytes, expected {expected}")
    array = np.frombuffer(raw, dtype=DTYPES[dtype]).reshape(p, m, n)
    return array, spacing, dtype


def read_grid(path) -> VoxelGrid:
    array, spacing, _ = read_volume(path)
    return VoxelGrid(array.astype(np.float64), spacing)


def read_mask(path) -> RoiMask:
    array, _, _ = read_volume(path)
    if not np.isin(array, (0, 1)).all():
        raise ValidationError(f"{path}: mask values must be 0 or 1")
    return RoiMask(array != 0)


@dataclass(frozen=True)
class ManifestEntry:
    subject_id: str
    label: int
    timepoints: tuple[tuple[float, Path, Path], ...]


def load_manifest(path) -> list[ManifestEntry]:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except (OSError, ValueError) as exc:
        raise ValidationError(f"{path}: unreadable manifest ({exc})") from exc
    base = path.parent
    entries = []
    seen = set()
    try:
        for subj in doc["subjects"]:
            sid = str(subj["subjectId"])
            if sid in seen:
                raise ValidationError(f"{path}: duplicate subjectId {sid!r}")
            seen.add(sid)
            label = int(subj["label"])
            tps = tuple(
                (float(tp["time"]), base / tp["volumePath"], base / tp["maskPath"])
                for tp in subj["timepoints"]
            )
            entries.append(ManifestEntry(sid, label, tps))
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"{path}: malformed manifest ({exc!r})") from exc
    return entries


def write_manifest(path, entries: list[ManifestEntry]) -> None:
    path = Path(path)
    base = path.parent

    def rel(p: Path) -> str:
        try:
            return Path(p).relative_to(base).as_posix()
        except ValueError:
            return str(p)

    doc = {
        "subjects": [
            {
                "subjectId": e.subject_id,
                "label": e.label,
                "timepoints": [
                    {"time": t, "volumePath": rel(v), "maskPath": rel(m)} for t, v, m in e.timepoints
                ],
            }
            for e in entries
        ]
    }
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2) + "\n")


def load_sample(entry: ManifestEntry) -> SeriesSample:
    """Read every timepoint of one manifest entry; raises on any IO or geometry problem."""
    tps = tuple(Timepoint(t, read_grid(v), read_mask(m)) for t, v, m in entry.timepoints)
    return SeriesSample(entry.subject_id, tps, entry.label)
