"""Per-timepoint static feature vectors."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import FeatureExtractionError, ValidationError
from ..grid import RoiMask, SeriesSample, VoxelGrid, extract_slice, largest_roi_slice, quantize
from . import firstorder, glcm, ngtdm, shape, sizematrix

FAMILIES = (
    ("first_order", firstorder.FORMULAS),
    ("glcm", glcm.FORMULAS),
    ("glrlm", sizematrix.GLRLM_FORMULAS),
    ("glszm", sizematrix.GLSZM_FORMULAS),
    ("ngtdm", ngtdm.FORMULAS),
)


@dataclass(frozen=True)
class ExtractConfig:
    dimensionality: str = "3D"
    levels: int = 32

    def __post_init__(self):
        if self.dimensionality not in ("2D", "3D"):
            raise ValidationError(f"dimensionality must be '2D' or '3D', got {self.dimensionality!r}")
        if int(self.levels) != self.levels or self.levels < 2:
            raise ValidationError(f"levels must be an integer >= 2, got {self.levels!r}")


@dataclass(frozen=True)
class StaticFeatureVector:
    entries: dict[str, float]
    time_index: int
    time: float
    dimensionality: str
    levels: int
    meta: dict = field(default_factory=dict)

    @property
    def names(self) -> list[str]:
        return list(self.entries)

    def as_array(self) -> np.ndarray:
        return np.fromiter(self.entries.values(), dtype=np.float64, count=len(self.entries))


def feature_dictionary(dimensionality: str = "3D") -> list[dict[str, str]]:
    """Machine-readable list of every feature emitted for a dimensionality, in output order."""
    shape_formulas = shape.FORMULAS_2D if dimensionality == "2D" else shape.FORMULAS_3D
    out = []
    for family, formulas in FAMILIES + (("shape", shape_formulas),):
        out.extend({"name": k, "family": family, "formula": v} for k, v in formulas.items())
    return out


def feature_names(dimensionality: str = "3D") -> list[str]:
    return [d["name"] for d in feature_dictionary(dimensionality)]


def _mean_features(dicts: list[dict[str, float]]) -> dict[str, float]:
    keys = list(dicts[0])
    return {k: float(np.mean([d[k] for d in dicts])) for k in keys}


def static_features(grid: VoxelGrid, mask: RoiMask, levels: int = 32) -> dict[str, float]:
    """All feature families for one ROI, GLCM/GLRLM averaged over directions."""
    q = quantize(grid, mask, levels)
    out = firstorder.first_order(grid, mask, levels, quantized=q)
    out.update(_mean_features([glcm.glcm_features(m) for m in glcm.glcm_all_directions(q)]))
    out.update(_mean_features([sizematrix.glrlm_features(m) for m in sizematrix.glrlm_all_directions(q)]))
    out.update(sizematrix.glszm_features(sizematrix.glszm(q)))
    out.update(ngtdm.ngtdm_features(ngtdm.ngtdm(q)))
    out.update(shape.shape_features(mask, grid.spacing))
    return out


def extract_static(sample: SeriesSample, config: ExtractConfig = ExtractConfig()) -> list[StaticFeatureVector]:
    """One feature vector per timepoint.

    The 2D path works on the largest-ROI slice of each timepoint.  Extractor
    failures are re-raised as ``FeatureExtractionError`` carrying the index.
    """
    expected = feature_names(config.dimensionality)
    vectors = []
    for i, tp in enumerate(sample.timepoints):
        try:
            grid, mask = tp.grid, tp.mask
            meta = {}
            if config.dimensionality == "2D":
                s = largest_roi_slice(mask)
                grid, mask = extract_slice(grid, mask, s)
                meta["slice"] = s
            entries = static_features(grid, mask, config.levels)
            entries = {k: entries[k] for k in expected}
            bad = [k for k, v in entries.items() if not np.isfinite(v)]
            if bad:
                raise ValidationError(f"non-finite feature values: {bad}")
        except FeatureExtractionError:
            raise
        except Exception as exc:
            raise FeatureExtractionError(i, exc) from exc
        vectors.append(StaticFeatureVector(entries, i, tp.time, config.dimensionality, config.levels, meta))
    return vectors
