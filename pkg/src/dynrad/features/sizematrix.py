"""Run-length (GLRLM) and size-zone (GLSZM) matrices.

Both are (gray level x size) count matrices and share one feature family;
only the prefix and the word "run"/"zone" differ.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from ..errors import EmptyRoi, ValidationError
from ..grid import QuantizedRoi
from ._lattice import DIRECTIONS_3D, TextureMatrix, directions_for, shifted


_FORMULAS = (
    "sum M(a,s) / s^2 / N",
    "sum M(a,s) s^2 / N",
    "sum M(a,s) / a^2 / N",
    "sum M(a,s) a^2 / N",
    "sum_a (sum_s M)^2 / N",
    "sum_a (sum_s M)^2 / N^2",
    "sum_s (sum_a M)^2 / N",
    "sum_s (sum_a M)^2 / N^2",
    "N / N_voxels",
    "sum p(a,s) (a - mu_a)^2",
    "sum p(a,s) (s - mu_s)^2",
    "-sum p(a,s) log2 p(a,s)",
)
_GLRLM_NAMES = (
    "ShortRunEmphasis", "LongRunEmphasis", "LowGrayLevelRunEmphasis", "HighGrayLevelRunEmphasis",
    "GrayLevelNonUniformity", "GrayLevelNonUniformityNormalized",
    "RunLengthNonUniformity", "RunLengthNonUniformityNormalized",
    "RunPercentage", "GrayLevelVariance", "RunVariance", "RunEntropy",
)
_GLSZM_NAMES = (
    "SmallAreaEmphasis", "LargeAreaEmphasis", "LowGrayLevelZoneEmphasis", "HighGrayLevelZoneEmphasis",
    "GrayLevelNonUniformity", "GrayLevelNonUniformityNormalized",
    "SizeZoneNonUniformity", "SizeZoneNonUniformityNormalized",
    "ZonePercentage", "GrayLevelVariance", "ZoneVariance", "ZoneEntropy",
)
GLRLM_FORMULAS = {f"glrlm_{n}": f for n, f in zip(_GLRLM_NAMES, _FORMULAS)}
GLSZM_FORMULAS = {f"glszm_{n}": f for n, f in zip(_GLSZM_NAMES, _FORMULAS)}


def glrlm(q: QuantizedRoi, direction) -> TextureMatrix:
    """Counts of maximal same-code runs along ``direction``, confined to the ROI."""
    direction = tuple(int(d) for d in direction)
    if direction not in DIRECTIONS_3D and tuple(-d for d in direction) not in DIRECTIONS_3D:
        raise ValidationError(f"{direction} is not one of the 13 lattice directions")
    codes = q.codes
    inside = codes > 0
    if not inside.any():
        raise EmptyRoi("empty ROI")
    back = tuple(-d for d in direction)
    cont = inside & (shifted(codes, direction) == codes)
    starts = inside & ~(shifted(codes, back) == codes)

    # length[v] = 1 + length[v + d] while the run continues; converges in <= max(shape) passes
    length = np.ones(codes.shape, dtype=np.int64)
    max_len = max(codes.shape)
    for _ in range(max_len):
        nxt = np.where(cont, 1 + shifted(length, direction), 1)
        if np.array_equal(nxt, length):
            break
        length = nxt

    L = q.levels
    a = codes[starts] - 1
    l = length[starts] - 1
    counts = np.bincount(a * max_len + l, minlength=L * max_len).reshape(L, max_len)
    return TextureMatrix("GLRLM", counts, L, {"direction": direction, "n_voxels": int(inside.sum())})


def glrlm_all_directions(q: QuantizedRoi) -> list[TextureMatrix]:
    return [glrlm(q, d) for d in directions_for(q.codes)]


def glszm(q: QuantizedRoi) -> TextureMatrix:
    """Counts of connected same-code zones by size.

    Connectivity is 26 in 3D and 8 within a single slice.
    """
    codes = q.codes
    inside = codes > 0
    n_vox = int(inside.sum())
    if n_vox == 0:
        raise EmptyRoi("empty ROI")
    structure = np.ones((3, 3, 3), dtype=bool)
    L = q.levels
    counts = np.zeros((L, n_vox), dtype=np.int64)
    for level in np.unique(codes[inside]):
        labels, n_zones = ndimage.label(codes == level, structure=structure)
        sizes = np.bincount(labels.ravel())[1:]
        counts[level - 1] += np.bincount(sizes - 1, minlength=n_vox)
    return TextureMatrix("GLSZM", counts, L, {"n_voxels": n_vox})


def _size_features(M: np.ndarray, n_voxels: int, names: list[str]) -> dict[str, float]:
    M = M.astype(np.float64)
    N = M.sum()
    a = np.arange(1, M.shape[0] + 1, dtype=np.float64)[:, None]
    s = np.arange(1, M.shape[1] + 1, dtype=np.float64)[None, :]
    by_level = M.sum(axis=1)
    by_size = M.sum(axis=0)
    p = M / N
    mu_a = (p * a).sum()
    mu_s = (p * s).sum()
    nz = p[p > 0]
    values = [
        (M / s ** 2).sum() / N,
        (M * s ** 2).sum() / N,
        (M / a ** 2).sum() / N,
        (M * a ** 2).sum() / N,
        (by_level ** 2).sum() / N,
        (by_level ** 2).sum() / N ** 2,
        (by_size ** 2).sum() / N,
        (by_size ** 2).sum() / N ** 2,
        N / n_voxels,
        (p * (a - mu_a) ** 2).sum(),
        (p * (s - mu_s) ** 2).sum(),
        -(nz * np.log2(nz)).sum(),
    ]
    return {k: float(v) for k, v in zip(names, values)}


def glrlm_features(matrix: TextureMatrix) -> dict[str, float]:
    return _size_features(matrix.data, matrix.aux["n_voxels"], list(GLRLM_FORMULAS))


def glszm_features(matrix: TextureMatrix) -> dict[str, float]:
    return _size_features(matrix.data, matrix.aux["n_voxels"], list(GLSZM_FORMULAS))
