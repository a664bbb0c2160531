"""Offsets and shifted views over ``(slice, row, col)`` code arrays."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

# one representative per +/- pair, first nonzero component positive
DIRECTIONS_3D: tuple[tuple[int, int, int], ...] = (
    (0, 0, 1), (0, 1, 0), (0, 1, 1), (0, 1, -1),
    (1, 0, 0), (1, 0, 1), (1, 0, -1), (1, 1, 0), (1, -1, 0),
    (1, 1, 1), (1, 1, -1), (1, -1, 1), (1, -1, -1),
)
DIRECTIONS_2D: tuple[tuple[int, int, int], ...] = DIRECTIONS_3D[:4]

NEIGHBOR_OFFSETS: tuple[tuple[int, int, int], ...] = tuple(
    d for d in itertools.product((-1, 0, 1), repeat=3) if d != (0, 0, 0)
)


def directions_for(codes: np.ndarray) -> tuple[tuple[int, int, int], ...]:
    """In-plane directions for single-slice input, all 13 otherwise."""
    return DIRECTIONS_2D if codes.shape[0] == 1 else DIRECTIONS_3D


def pair_slices(shape, offset) -> tuple[tuple[slice, ...], tuple[slice, ...]]:
    """Index tuples (src, dst) so that ``a[src]`` and ``a[dst]`` align v with v+offset."""
    src, dst = [], []
    for size, o in zip(shape, offset):
        if o >= 0:
            src.append(slice(0, max(size - o, 0)))
            dst.append(slice(o, size))
        else:
            src.append(slice(-o, size))
            dst.append(slice(0, max(size + o, 0)))
    return tuple(src), tuple(dst)


def shifted(a: np.ndarray, offset, fill=0) -> np.ndarray:
    """``out[v] = a[v + offset]`` where in bounds, ``fill`` elsewhere."""
    out = np.full_like(a, fill)
    src, dst = pair_slices(a.shape, offset)
    out[src] = a[dst]
    return out


@dataclass(frozen=True, eq=False)
class TextureMatrix:
    """A texture count matrix.

    GLCM: symmetrised ``(levels, levels)`` pair counts.
    GLRLM: ``(levels, max_run)`` run counts, column ``l-1`` holds length ``l``.
    GLSZM: ``(levels, n_voxels)`` zone counts, column ``s-1`` holds size ``s``.
    NGTDM: ``(levels, 2)`` with columns (n_a, s_a).
    """

    kind: str
    data: np.ndarray
    levels: int
    aux: dict = field(default_factory=dict)

    def __post_init__(self):
        if np.any(self.data < 0):
            raise ValueError("texture matrices are nonnegative")
        self.data.setflags(write=False)

    @property
    def probabilities(self) -> np.ndarray:
        total = self.data.sum()
        return self.data / total
