"""Neighbourhood gray-tone difference matrix (Amadasun & King).

The source literature sometimes calls this NGLDM; the implementation here is
the gray-tone *difference* matrix.  Voxels without any in-ROI neighbour are
left out of the counts, as in IBSI.
"""

from __future__ import annotations

import numpy as np

from ..errors import EmptyRoi, NoNeighborhood
from ..grid import QuantizedRoi
from ._lattice import NEIGHBOR_OFFSETS, TextureMatrix, shifted

COARSENESS_CAP = 1e6

FORMULAS = {
    "ngtdm_Coarseness": "1 / sum_a p_a s_a (capped at 1e6)",
    "ngtdm_Contrast": "[sum_ab p_a p_b (a-b)^2 / (Ngp (Ngp-1))] [sum_a s_a / Nvp]",
    "ngtdm_Busyness": "sum_a p_a s_a / sum_ab |a p_a - b p_b|",
    "ngtdm_Complexity": "sum_ab |a-b| (p_a s_a + p_b s_b) / (p_a + p_b) / Nvp",
    "ngtdm_Strength": "sum_ab (p_a + p_b)(a-b)^2 / sum_a s_a",
}


def ngtdm(q: QuantizedRoi) -> TextureMatrix:
    """Per-level (n_a, s_a) where s_a sums |a - mean neighbour code|.

    Neighbours are in-ROI voxels at Chebyshev distance 1.
    """
    codes = q.codes
    inside = codes > 0
    if not inside.any():
        raise EmptyRoi("empty ROI")
    total = np.zeros(codes.shape, dtype=np.float64)
    count = np.zeros(codes.shape, dtype=np.int64)
    for off in NEIGHBOR_OFFSETS:
        nb = shifted(codes, off)
        total += nb
        count += nb > 0
    valid = inside & (count > 0)
    if not valid.any():
        raise NoNeighborhood("no ROI voxel has an in-ROI neighbour")
    a = codes[valid]
    diff = np.abs(a - total[valid] / count[valid])
    L = q.levels
    n_a = np.bincount(a - 1, minlength=L).astype(np.float64)
    s_a = np.bincount(a - 1, weights=diff, minlength=L)
    return TextureMatrix("NGTDM", np.column_stack([n_a, s_a]), L, {"n_valid": int(valid.sum())})


def ngtdm_features(matrix: TextureMatrix) -> dict[str, float]:
    n_a, s_a = matrix.data[:, 0], matrix.data[:, 1]
    nvp = n_a.sum()
    p = n_a / nvp
    levels = np.arange(1, p.size + 1, dtype=np.float64)
    present = p > 0
    pa, sa, ga = p[present], s_a[present], levels[present]
    ngp = pa.size

    ps = float((pa * sa).sum())
    coarseness = COARSENESS_CAP if ps <= 1.0 / COARSENESS_CAP else 1.0 / ps

    dg = ga[:, None] - ga[None, :]
    s_total = float(sa.sum())
    if ngp > 1:
        contrast = (pa[:, None] * pa[None, :] * dg ** 2).sum() / (ngp * (ngp - 1)) * s_total / nvp
    else:
        contrast = 0.0

    gp = ga * pa
    denom = np.abs(gp[:, None] - gp[None, :]).sum()
    busyness = ps / denom if denom > 0 else 0.0

    psa = pa * sa
    complexity = (np.abs(dg) * (psa[:, None] + psa[None, :]) / (pa[:, None] + pa[None, :])).sum() / nvp

    strength = ((pa[:, None] + pa[None, :]) * dg ** 2).sum() / s_total if s_total > 0 else 0.0
    return {
        "ngtdm_Coarseness": float(coarseness),
        "ngtdm_Contrast": float(contrast),
        "ngtdm_Busyness": float(busyness),
        "ngtdm_Complexity": float(complexity),
        "ngtdm_Strength": float(strength),
    }
