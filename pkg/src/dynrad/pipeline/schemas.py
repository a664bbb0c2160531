"""JSON schemas for the files the pipeline publishes."""

from __future__ import annotations

from .config import config_schema

_NUM = {"type": "number"}

METRICS_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "title": "dynrad metrics",
    "type": "object",
    "required": ["featureSet", "seed", "selectedFeatures", "models", "pcaScree"],
    "properties": {
        "featureSet": {"type": "string"},
        "seed": {"type": "integer"},
        "selectedFeatures": {"type": "array", "items": {"type": "string"}},
        "nTrain": {"type": "integer", "minimum": 0},
        "nTest": {"type": "integer", "minimum": 0},
        "meanAuc": {"type": ["number", "null"], "minimum": 0, "maximum": 1},
        "pcaScree": {"type": "array", "items": {"type": "number", "minimum": 0, "maximum": 1}},
        "models": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["model", "featureSet", "accuracy", "auc", "rocPoints", "seed"],
                "properties": {
                    "model": {"enum": ["LDA", "LINSVM", "FNN"]},
                    "featureSet": {"type": "string"},
                    "accuracy": {"type": "number", "minimum": 0, "maximum": 1},
                    "auc": {"type": ["number", "null"], "minimum": 0, "maximum": 1},
                    "rocPoints": {
                        "type": "array",
                        "items": {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2},
                    },
                    "seed": {"type": "integer"},
                    "error": {"type": "string"},
                },
                "additionalProperties": False,
            },
        },
    },
    "additionalProperties": False,
}

DYNAMIC_SCHEMA_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "title": "dynrad dynamic table schema sidecar",
    "type": "object",
    "required": ["columns"],
    "properties": {
        "featureSet": {"type": "string"},
        "k": {"type": "integer", "minimum": 1},
        "timeIndices": {"type": "array", "items": {"type": "integer"}},
        "columns": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "staticName", "transform", "index"],
                "properties": {k: {"type": "string"} for k in ("name", "staticName", "transform", "index")},
                "additionalProperties": False,
            },
        },
    },
}

SCHEMAS = {
    "config": config_schema,
    "metrics": lambda: METRICS_SCHEMA,
    "dynamic-schema": lambda: DYNAMIC_SCHEMA_SCHEMA,
}
