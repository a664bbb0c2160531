from ._lattice import DIRECTIONS_2D, DIRECTIONS_3D, TextureMatrix
from .extract import (
    ExtractConfig,
    StaticFeatureVector,
    extract_static,
    feature_dictionary,
    feature_names,
    static_features,
)
from .firstorder import first_order
from .glcm import glcm, glcm_all_directions, glcm_features
from .ngtdm import ngtdm, ngtdm_features
from .shape import shape_features
from .sizematrix import glrlm, glrlm_all_directions, glrlm_features, glszm, glszm_features

__all__ = [
    "DIRECTIONS_2D", "DIRECTIONS_3D", "TextureMatrix",
    "ExtractConfig", "StaticFeatureVector", "extract_static", "feature_dictionary",
    "feature_names", "static_features", "first_order", "glcm", "glcm_all_directions",
    "glcm_features", "ngtdm", "ngtdm_features", "shape_features", "glrlm",
    "glrlm_all_directions", "glrlm_features", "glszm", "glszm_features",
]
