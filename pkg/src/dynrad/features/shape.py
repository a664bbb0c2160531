"""Voxel-counting shape descriptors.

Physical pitch along the array axes (slice, row, col) is (sz, sx, sy).
Perimeter and surface area count exposed voxel faces.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial import ConvexHull, QhullError
from scipy.spatial.distance import pdist

from ..grid import RoiMask

FORMULAS_2D = {
    "shape2D_Area": "N_voxels * sx * sy",
    "shape2D_Perimeter": "exposed edge length",
    "shape2D_Roundness": "4 pi A / P^2",
    "shape2D_CentroidRow": "mean row coordinate (mm)",
    "shape2D_CentroidCol": "mean column coordinate (mm)",
    "shape2D_BoundingBoxExtent": "A / bounding-box area",
}
FORMULAS_3D = {
    "shape_Volume": "N_voxels * sx * sy * sz",
    "shape_SurfaceArea": "exposed face area",
    "shape_Sphericity": "pi^(1/3) (6 V)^(2/3) / S",
    "shape_Maximum3DDiameter": "max distance between ROI voxel centres (mm)",
    "shape_CentroidSlice": "mean slice coordinate (mm)",
    "shape_CentroidRow": "mean row coordinate (mm)",
    "shape_CentroidCol": "mean column coordinate (mm)",
    "shape_BoundingBoxExtent": "V / bounding-box volume",
}


def _exposed_faces(inside: np.ndarray, axis: int) -> int:
    padded = np.pad(inside, [(1, 1) if a == axis else (0, 0) for a in range(3)])
    return int(np.count_nonzero(np.diff(padded.astype(np.int8), axis=axis)))


def _max_diameter(points: np.ndarray) -> float:
    if len(points) < 2:
        return 0.0
    if len(points) > 64:
        try:
            points = points[ConvexHull(points).vertices]
        except (QhullError, ValueError):
            pass
    return float(pdist(points).max())


def shape_features(mask: RoiMask, spacing=(1.0, 1.0, 1.0)) -> dict[str, float]:
    """2-D descriptors for a single-slice mask, 3-D descriptors otherwise."""
    sx, sy, sz = (float(s) for s in spacing)
    inside = mask.inside
    pitch = np.array([sz, sx, sy])
    idx = np.argwhere(inside)
    coords = idx * pitch
    centroid = coords.mean(axis=0)
    n = len(idx)
    bbox = idx.max(axis=0) - idx.min(axis=0) + 1

    if inside.shape[0] == 1:
        area = n * sx * sy
        # edges normal to the row axis have column length sy, and vice versa
        perimeter = _exposed_faces(inside, 1) * sy + _exposed_faces(inside, 2) * sx
        return {
            "shape2D_Area": area,
            "shape2D_Perimeter": perimeter,
            "shape2D_Roundness": 4.0 * np.pi * area / perimeter ** 2,
            "shape2D_CentroidRow": float(centroid[1]),
            "shape2D_CentroidCol": float(centroid[2]),
            "shape2D_BoundingBoxExtent": n / float(bbox[1] * bbox[2]),
        }

    volume = n * sx * sy * sz
    surface = (_exposed_faces(inside, 0) * sx * sy
               + _exposed_faces(inside, 1) * sy * sz
               + _exposed_faces(inside, 2) * sx * sz)
    return {
        "shape_Volume": volume,
        "shape_SurfaceArea": float(surface),
        "shape_Sphericity": float(np.pi ** (1 / 3) * (6 * volume) ** (2 / 3) / surface),
        "shape_Maximum3DDiameter": _max_diameter(coords),
        "shape_CentroidSlice": float(centroid[0]),
        "shape_CentroidRow": float(centroid[1]),
        "shape_CentroidCol": float(centroid[2]),
        "shape_BoundingBoxExtent": n / float(np.prod(bbox)),
    }
