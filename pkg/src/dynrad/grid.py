"""Voxel containers, ROI masks, quantization and time-series samples.

Arrays are stored with axes ``(slice, row, column)`` so that a C-order
flattening matches the on-disk ``slice-row-col`` layout.  ``dims`` is always
reported as ``(m, n, p)`` = (rows, columns, slices).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, EmptyRoi, ValidationError

OUTSIDE = 0  # quantized code for voxels outside the ROI


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


def _check_dims(dims: Sequence[int]) -> tuple[int, int, int]:
    if len(dims) != 3 or any(int(d) != d or d < 1 for d in dims):
        raise ValidationError(f"dims must be three positive integers, got {dims!r}")
    return tuple(int(d) for d in dims)


@dataclass(frozen=True, eq=False)
class VoxelGrid:
    """Real-valued intensity grid of shape ``(p, m, n)`` with physical spacing.

    ``spacing`` is ``(sx, sy, sz)`` in mm and pairs with ``dims = (m, n, p)``:
    row pitch, column pitch, slice pitch.
    """

    voxels: np.ndarray
    spacing: tuple[float, float, float] = (1.0, 1.0, 1.0)

    def __post_init__(self):
        v = np.asarray(self.voxels, dtype=np.float64)
        if v.ndim != 3:
            raise ValidationError(f"voxels must be 3-D (slice,row,col), got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValidationError("voxel intensities must be finite")
        sp = tuple(float(s) for s in self.spacing)
        if len(sp) != 3 or not all(s > 0 and np.isfinite(s) for s in sp):
            raise ValidationError(f"spacing must be three positive numbers, got {self.spacing!r}")
        object.__setattr__(self, "voxels", _frozen(v))
        object.__setattr__(self, "spacing", sp)

    @classmethod
    def from_flat(cls, dims: Sequence[int], values, spacing=(1.0, 1.0, 1.0)) -> "VoxelGrid":
        m, n, p = _check_dims(dims)
        flat = np.asarray(values, dtype=np.float64).ravel()
        if flat.size != m * n * p:
            raise ValidationError(f"expected {m * n * p} voxels for dims {dims}, got {flat.size}")
        return cls(flat.reshape(p, m, n), spacing)

    @property
    def dims(self) -> tuple[int, int, int]:
        p, m, n = self.voxels.shape
        return (m, n, p)


@dataclass(frozen=True, eq=False)
class RoiMask:
    """Boolean ROI of shape ``(p, m, n)``; must contain at least one voxel."""

    inside: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.inside)
        if a.ndim != 3:
            raise ValidationError(f"mask must be 3-D (slice,row,col), got shape {a.shape}")
        a = a.astype(bool)
        if not a.any():
            raise EmptyRoi("ROI mask contains no voxels")
        object.__setattr__(self, "inside", _frozen(a))

    @classmethod
    def from_flat(cls, dims: Sequence[int], values) -> "RoiMask":
        m, n, p = _check_dims(dims)
        flat = np.asarray(values).ravel()
        if flat.size != m * n * p:
            raise ValidationError(f"expected {m * n * p} mask values for dims {dims}, got {flat.size}")
        return cls(flat.reshape(p, m, n) != 0)

    @property
    def dims(self) -> tuple[int, int, int]:
        p, m, n = self.inside.shape
        return (m, n, p)

    @property
    def count(self) -> int:
        return int(self.inside.sum())


@dataclass(frozen=True, eq=False)
class QuantizedRoi:
    """Integer gray codes in ``[1, levels]`` inside the ROI, ``OUTSIDE`` elsewhere."""

    codes: np.ndarray
    levels: int
    min_intensity: float
    max_intensity: float

    def __post_init__(self):
        object.__setattr__(self, "codes", _frozen(np.asarray(self.codes, dtype=np.int64)))

    @property
    def mask(self) -> np.ndarray:
        return self.codes != OUTSIDE

    @property
    def dims(self) -> tuple[int, int, int]:
        p, m, n = self.codes.shape
        return (m, n, p)

    @property
    def is_2d(self) -> bool:
        return self.codes.shape[0] == 1


def _check_pair(grid: VoxelGrid, mask: RoiMask) -> None:
    if grid.dims != mask.dims:
        raise DimensionMismatch(f"grid dims {grid.dims} != mask dims {mask.dims}")


def quantize(grid: VoxelGrid, mask: RoiMask, levels: int = 32) -> QuantizedRoi:
    """Fixed bin-count discretisation of the in-mask intensities.

    code = min(levels, floor(levels * (v - min) / (max - min)) + 1); a constant
    ROI maps every voxel to code 1.
    """
    if int(levels) != levels or levels < 2:
        raise ValidationError(f"levels must be an integer >= 2, got {levels!r}")
    levels = int(levels)
    _check_pair(grid, mask)
    inside = mask.inside
    vals = grid.voxels[inside]
    lo, hi = float(vals.min()), float(vals.max())
    codes = np.zeros(grid.voxels.shape, dtype=np.int64)
    if hi == lo:
        codes[inside] = 1
    else:
        binned = np.floor(levels * (vals - lo) / (hi - lo)).astype(np.int64) + 1
        codes[inside] = np.minimum(binned, levels)
    return QuantizedRoi(codes, levels, lo, hi)


def largest_roi_slice(mask: RoiMask) -> int:
    """Slice index with the most ROI voxels; ties go to the lowest index."""
    counts = mask.inside.reshape(mask.inside.shape[0], -1).sum(axis=1)
    return int(np.argmax(counts))


def extract_slice(grid: VoxelGrid, mask: RoiMask, slice_index: int) -> tuple[VoxelGrid, RoiMask]:
    _check_pair(grid, mask)
    p = grid.voxels.shape[0]
    if not 0 <= slice_index < p:
        raise IndexError(f"slice index {slice_index} out of range for p={p}")
    s = slice(slice_index, slice_index + 1)
    # RoiMask raises EmptyRoi if the slice holds no ROI voxels
    sub_mask = RoiMask(mask.inside[s])
    return VoxelGrid(grid.voxels[s], grid.spacing), sub_mask


@dataclass(frozen=True, eq=False)
class Timepoint:
    time: float
    grid: VoxelGrid
    mask: RoiMask


@dataclass(frozen=True, eq=False)
class SeriesSample:
    """One subject: k >= 2 time-stamped ROIs sharing geometry, plus a binary label."""

    subject_id: str
    timepoints: tuple[Timepoint, ...]
    label: int

    def __post_init__(self):
        tps = tuple(self.timepoints)
        object.__setattr__(self, "timepoints", tps)
        if len(tps) < 2:
            raise ValidationError(f"{self.subject_id}: need at least 2 timepoints, got {len(tps)}")
        if self.label not in (0, 1):
            raise ValidationError(f"{self.subject_id}: label must be 0 or 1, got {self.label!r}")
        times = [tp.time for tp in tps]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValidationError(f"{self.subject_id}: timestamps must be strictly increasing: {times}")
        ref = tps[0].grid
        for tp in tps:
            _check_pair(tp.grid, tp.mask)
            if tp.grid.dims != ref.dims or tp.grid.spacing != ref.spacing:
                raise DimensionMismatch(f"{self.subject_id}: timepoints differ in dims or spacing")

    @property
    def k(self) -> int:
        return len(self.timepoints)

    @property
    def times(self) -> np.ndarray:
        return np.array([tp.time for tp in self.timepoints], dtype=np.float64)
