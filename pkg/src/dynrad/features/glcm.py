"""Gray-level co-occurrence matrix and its IBSI features."""

from __future__ import annotations

import numpy as np

from ..errors import NoPairs, ValidationError
from ..grid import QuantizedRoi
from ._lattice import TextureMatrix, directions_for, pair_slices

FORMULAS = {
    "glcm_JointAverage": "sum_ij i P(i,j)",
    "glcm_JointVariance": "sum_ij (i - mu)^2 P(i,j)",
    "glcm_JointEntropy": "-sum_ij P log2 P",
    "glcm_JointEnergy": "sum_ij P^2",
    "glcm_MaximumProbability": "max P",
    "glcm_Contrast": "sum_ij (i-j)^2 P",
    "glcm_DifferenceAverage": "sum_ij |i-j| P",
    "glcm_DifferenceEntropy": "-sum_k p_{x-y}(k) log2 p_{x-y}(k)",
    "glcm_SumAverage": "sum_k k p_{x+y}(k)",
    "glcm_SumEntropy": "-sum_k p_{x+y}(k) log2 p_{x+y}(k)",
    "glcm_Correlation": "(sum_ij ij P - mu_x mu_y) / (sigma_x sigma_y); 1 if sigma = 0",
    "glcm_Autocorrelation": "sum_ij i j P",
    "glcm_ClusterTendency": "sum_ij (i + j - 2 mu)^2 P",
    "glcm_ClusterShade": "sum_ij (i + j - 2 mu)^3 P",
    "glcm_ClusterProminence": "sum_ij (i + j - 2 mu)^4 P",
    "glcm_Id": "sum_ij P / (1 + |i-j|)",
    "glcm_Idn": "sum_ij P / (1 + |i-j| / Ng)",
    "glcm_Idm": "sum_ij P / (1 + (i-j)^2)",
    "glcm_Idmn": "sum_ij P / (1 + (i-j)^2 / Ng^2)",
    "glcm_InverseVariance": "sum_{i != j} P / (i-j)^2",
}


def glcm(q: QuantizedRoi, offset) -> TextureMatrix:
    """Symmetrised co-occurrence counts for one displacement.

    Both voxels of a pair must lie inside the ROI.  Raises ``NoPairs`` when
    the offset yields no such pair.
    """
    offset = tuple(int(o) for o in offset)
    if len(offset) != 3 or offset == (0, 0, 0):
        raise ValidationError(f"offset must be a nonzero 3-vector, got {offset}")
    codes = q.codes
    src, dst = pair_slices(codes.shape, offset)
    a, b = codes[src], codes[dst]
    valid = (a > 0) & (b > 0)
    if not valid.any():
        raise NoPairs(f"no in-ROI voxel pairs for offset {offset}")
    L = q.levels
    flat = (a[valid] - 1) * L + (b[valid] - 1)
    counts = np.bincount(flat, minlength=L * L).reshape(L, L)
    return TextureMatrix("GLCM", counts + counts.T, L, {"offset": offset})


def glcm_all_directions(q: QuantizedRoi) -> list[TextureMatrix]:
    """Matrices for every direction that has at least one valid pair."""
    out = []
    for d in directions_for(q.codes):
        try:
            out.append(glcm(q, d))
        except NoPairs:
            continue
    if not out:
        raise NoPairs("ROI has no neighbouring voxel pairs in any direction")
    return out


def _entropy(p: np.ndarray) -> float:
    nz = p[p > 0]
    return float(-(nz * np.log2(nz)).sum())


def glcm_features(matrix: TextureMatrix | np.ndarray, levels: int | None = None) -> dict[str, float]:
    """IBSI GLCM features of a symmetric matrix (counts or probabilities)."""
    if isinstance(matrix, TextureMatrix):
        P = matrix.probabilities
        Ng = matrix.levels
    else:
        P = np.asarray(matrix, dtype=np.float64)
        P = P / P.sum()
        Ng = levels or P.shape[0]
    idx = np.arange(1, P.shape[0] + 1, dtype=np.float64)
    i, j = np.meshgrid(idx, idx, indexing="ij")
    diff = np.abs(i - j)

    px = P.sum(axis=1)
    py = P.sum(axis=0)
    mu_x = float((idx * px).sum())
    mu_y = float((idx * py).sum())
    sd_x = float(np.sqrt((((idx - mu_x) ** 2) * px).sum()))
    sd_y = float(np.sqrt((((idx - mu_y) ** 2) * py).sum()))
    autocorr = float((i * j * P).sum())
    if sd_x * sd_y < 1e-12:
        correlation = 1.0
    else:
        correlation = (autocorr - mu_x * mu_y) / (sd_x * sd_y)

    n = P.shape[0]
    p_minus = np.bincount(diff.astype(np.int64).ravel(), weights=P.ravel(), minlength=n)
    p_plus = np.bincount((i + j).astype(np.int64).ravel(), weights=P.ravel(), minlength=2 * n + 1)
    k_plus = np.arange(p_plus.size, dtype=np.float64)

    cluster = i + j - mu_x - mu_y
    off = diff > 0
    return {
        "glcm_JointAverage": mu_x,
        "glcm_JointVariance": float((((i - mu_x) ** 2) * P).sum()),
        "glcm_JointEntropy": _entropy(P),
        "glcm_JointEnergy": float((P ** 2).sum()),
        "glcm_MaximumProbability": float(P.max()),
        "glcm_Contrast": float((diff ** 2 * P).sum()),
        "glcm_DifferenceAverage": float((diff * P).sum()),
        "glcm_DifferenceEntropy": _entropy(p_minus),
        "glcm_SumAverage": float((k_plus * p_plus).sum()),
        "glcm_SumEntropy": _entropy(p_plus),
        "glcm_Correlation": float(correlation),
        "glcm_Autocorrelation": autocorr,
        "glcm_ClusterTendency": float((cluster ** 2 * P).sum()),
        "glcm_ClusterShade": float((cluster ** 3 * P).sum()),
        "glcm_ClusterProminence": float((cluster ** 4 * P).sum()),
        "glcm_Id": float((P / (1.0 + diff)).sum()),
        "glcm_Idn": float((P / (1.0 + diff / Ng)).sum()),
        "glcm_Idm": float((P / (1.0 + diff ** 2)).sum()),
        "glcm_Idmn": float((P / (1.0 + diff ** 2 / Ng ** 2)).sum()),
        "glcm_InverseVariance": float((P[off] / diff[off] ** 2).sum()),
    }
