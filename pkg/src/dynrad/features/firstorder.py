"""Intensity-histogram (first-order) statistics over the ROI."""

from __future__ import annotations

import numpy as np

from ..grid import QuantizedRoi, RoiMask, VoxelGrid, _check_pair, quantize

FORMULAS = {
    "fos_Mean": "mean(v)",
    "fos_Variance": "population variance of v",
    "fos_Skewness": "E[(v-mu)^3] / sigma^3; 0 for a constant ROI",
    "fos_Kurtosis": "E[(v-mu)^4] / sigma^4 - 3; 0 for a constant ROI",
    "fos_Median": "median(v)",
    "fos_Minimum": "min(v)",
    "fos_Maximum": "max(v)",
    "fos_Range": "max(v) - min(v)",
    "fos_10Percentile": "10th percentile (linear interpolation)",
    "fos_90Percentile": "90th percentile (linear interpolation)",
    "fos_InterquartileRange": "P75 - P25",
    "fos_Energy": "sum v^2",
    "fos_RootMeanSquared": "sqrt(mean v^2)",
    "fos_MeanAbsoluteDeviation": "mean |v - mu|",
    "fos_Entropy": "-sum h log2 h over the quantized histogram",
    "fos_Uniformity": "sum h^2 over the quantized histogram",
}


def first_order(grid: VoxelGrid, mask: RoiMask, levels: int = 32,
                quantized: QuantizedRoi | None = None) -> dict[str, float]:
    _check_pair(grid, mask)
    v = grid.voxels[mask.inside]
    mu = v.mean()
    dev = v - mu
    var = float((dev ** 2).mean())
    if var > 0:
        sd = np.sqrt(var)
        skew = float((dev ** 3).mean() / sd ** 3)
        kurt = float((dev ** 4).mean() / var ** 2 - 3.0)
    else:
        skew = kurt = 0.0

    q = quantized if quantized is not None else quantize(grid, mask, levels)
    hist = np.bincount(q.codes[mask.inside], minlength=q.levels + 1)[1:] / v.size
    nz = hist[hist > 0]
    p10, p25, p50, p75, p90 = np.percentile(v, [10, 25, 50, 75, 90])
    return {
        "fos_Mean": float(mu),
        "fos_Variance": var,
        "fos_Skewness": skew,
        "fos_Kurtosis": kurt,
        "fos_Median": float(p50),
        "fos_Minimum": float(v.min()),
        "fos_Maximum": float(v.max()),
        "fos_Range": float(v.max() - v.min()),
        "fos_10Percentile": float(p10),
        "fos_90Percentile": float(p90),
        "fos_InterquartileRange": float(p75 - p25),
        "fos_Energy": float((v ** 2).sum()),
        "fos_RootMeanSquared": float(np.sqrt((v ** 2).mean())),
        "fos_MeanAbsoluteDeviation": float(np.abs(dev).mean()),
        "fos_Entropy": float(-(nz * np.log2(nz)).sum()),
        "fos_Uniformity": float((hist ** 2).sum()),
    }
