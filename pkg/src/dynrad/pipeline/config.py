"""Pipeline configuration: JSON keys, defaults and validation."""

from __future__ import annotations

import json
from dataclasses import dataclass, fields
from pathlib import Path

from ..dynamic import DISCRETE, INTEGRATED, PARAMETER, DynamicConfig
from ..errors import ValidationError
from ..features import ExtractConfig
from ..modellab import KINDS

# JSON key -> attribute name
_KEYS = {
    "dimensionality": "dimensionality",
    "levels": "levels",
    "featureMode": "feature_mode",
    "staticTimepoint": "static_timepoint",
    "integrated": "integrated",
    "discrete": "discrete",
    "parameter": "parameter",
    "rescaleTime": "rescale_time",
    "lassoFolds": "lasso_folds",
    "lassoLambdas": "lasso_lambdas",
    "lassoNLambda": "lasso_n_lambda",
    "lassoMinRatio": "lasso_min_ratio",
    "oneSE": "one_se",
    "classifiers": "classifiers",
    "splitRatio": "split_ratio",
    "seed": "seed",
    "svmC": "svm_c",
    "svmEpochs": "svm_epochs",
    "fnnHidden": "fnn_hidden",
    "fnnEpochs": "fnn_epochs",
    "fnnLearningRate": "fnn_lr",
    "debugFits": "debug_fits",
    "outputDir": "output_dir",
}
_ATTRS = {v: k for k, v in _KEYS.items()}


@dataclass(frozen=True)
class PipelineConfig:
    dimensionality: str = "3D"
    levels: int = 32
    feature_mode: str = "dynamic"
    static_timepoint: int = 0
    integrated: tuple[str, ...] = ()
    discrete: tuple[str, ...] = ("RCR",)
    parameter: tuple[str, ...] = ()
    rescale_time: bool = False
    lasso_folds: int = 5
    lasso_lambdas: tuple[float, ...] | None = None
    lasso_n_lambda: int = 30
    lasso_min_ratio: float | None = None
    one_se: bool = True
    classifiers: tuple[str, ...] = KINDS
    split_ratio: float = 2 / 3
    seed: int = 42
    svm_c: float = 1.0
    svm_epochs: int = 1000
    fnn_hidden: int = 16
    fnn_epochs: int = 500
    fnn_lr: float = 0.1
    debug_fits: bool = False
    output_dir: str | None = None

    def __post_init__(self):
        for name in ("integrated", "discrete", "parameter", "classifiers"):
            val = getattr(self, name)
            if isinstance(val, str) or not isinstance(val, (list, tuple)):
                raise ValidationError(f"{_ATTRS[name]} must be a list")
            object.__setattr__(self, name, tuple(val))
        if self.lasso_lambdas is not None:
            lams = tuple(float(v) for v in self.lasso_lambdas)
            if not lams or min(lams) < 0:
                raise ValidationError("lassoLambdas must be a nonempty list of values >= 0")
            object.__setattr__(self, "lasso_lambdas", lams)
        ExtractConfig(self.dimensionality, self.levels)
        if self.feature_mode not in ("dynamic", "static"):
            raise ValidationError(f"featureMode must be 'dynamic' or 'static', got {self.feature_mode!r}")
        if self.feature_mode == "dynamic":
            self.dynamic_config()
        if not isinstance(self.static_timepoint, int) or self.static_timepoint < 0:
            raise ValidationError("staticTimepoint must be a non-negative integer")
        if not 0 < self.split_ratio < 1:
            raise ValidationError(f"splitRatio must lie in (0, 1), got {self.split_ratio}")
        bad = [c for c in self.classifiers if c not in KINDS]
        if bad or not self.classifiers:
            raise ValidationError(f"classifiers must be a nonempty subset of {KINDS}, got {list(self.classifiers)}")
        for name in ("lasso_folds", "lasso_n_lambda", "fnn_hidden"):
            if not isinstance(getattr(self, name), int) or getattr(self, name) < 2 - (name == "fnn_hidden"):
                raise ValidationError(f"{_ATTRS[name]} is out of range")
        for name in ("svm_c", "fnn_lr"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"{_ATTRS[name]} must be positive")
        for name in ("svm_epochs", "fnn_epochs", "seed"):
            if not isinstance(getattr(self, name), int) or getattr(self, name) < 0:
                raise ValidationError(f"{_ATTRS[name]} must be a non-negative integer")
        if self.lasso_min_ratio is not None and not 0 < self.lasso_min_ratio < 1:
            raise ValidationError("lassoMinRatio must lie in (0, 1)")

    def extract_config(self) -> ExtractConfig:
        return ExtractConfig(self.dimensionality, self.levels)

    def dynamic_config(self) -> DynamicConfig:
        return DynamicConfig(self.integrated, self.discrete, self.parameter, self.rescale_time)

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            val = getattr(self, f.name)
            out[_ATTRS[f.name]] = list(val) if isinstance(val, tuple) else val
        return out

    def section(self, *attrs: str) -> dict:
        """Subset of the JSON form, used to key stage caches."""
        d = self.to_dict()
        return {_ATTRS[a]: d[_ATTRS[a]] for a in attrs}

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        if not isinstance(data, dict):
            raise ValidationError("config must be a JSON object")
        unknown = sorted(set(data) - set(_KEYS))
        if unknown:
            raise ValidationError(f"unknown config keys {unknown}")
        try:
            return cls(**{_KEYS[k]: v for k, v in data.items()})
        except TypeError as exc:
            raise ValidationError(f"bad config value: {exc}") from None

    @classmethod
    def load(cls, path) -> "PipelineConfig":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read config {path}: {exc}") from None
        return cls.from_dict(data)


def _enum_list(allowed) -> dict:
    return {"type": "array", "items": {"enum": list(allowed)}, "uniqueItems": True}


def config_schema() -> dict:
    """JSON schema of the configuration file."""
    props = {
        "dimensionality": {"enum": ["2D", "3D"]},
        "levels": {"type": "integer", "minimum": 2},
        "featureMode": {"enum": ["dynamic", "static"]},
        "staticTimepoint": {"type": "integer", "minimum": 0},
        "integrated": _enum_list(INTEGRATED),
        "discrete": _enum_list(DISCRETE),
        "parameter": _enum_list(PARAMETER),
        "rescaleTime": {"type": "boolean"},
        "lassoFolds": {"type": "integer", "minimum": 2},
        "lassoLambdas": {"type": ["array", "null"], "items": {"type": "number", "minimum": 0}},
        "lassoNLambda": {"type": "integer", "minimum": 2},
        "lassoMinRatio": {"type": ["number", "null"], "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "oneSE": {"type": "boolean"},
        "classifiers": {**_enum_list(KINDS), "minItems": 1},
        "splitRatio": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "seed": {"type": "integer", "minimum": 0},
        "svmC": {"type": "number", "exclusiveMinimum": 0},
        "svmEpochs": {"type": "integer", "minimum": 0},
        "fnnHidden": {"type": "integer", "minimum": 1},
        "fnnEpochs": {"type": "integer", "minimum": 0},
        "fnnLearningRate": {"type": "number", "exclusiveMinimum": 0},
        "debugFits": {"type": "boolean"},
        "outputDir": {"type": ["string", "null"]},
    }
    assert set(props) == set(_KEYS)
    return {
        "$schema": "http://json-schema.org/draft-07/schema#",
        "title": "dynrad pipeline configuration",
        "type": "object",
        "properties": props,
        "additionalProperties": False,
    }
