"""Versioned JSON documents for fitted models (ensembles nest their members)."""
from __future__ import annotations

import json

import numpy as np

from .ensemble import EnsembleModel
from .errors import SchemaError
from .learners import MODEL_TYPES

FORMAT = "bigtax-model"
VERSION = 1


def model_to_dict(model) -> dict:
    if isinstance(model, EnsembleModel):
        body = {
            "task": model.task,
            "B": model.B,
            "seed": None if model.seed is None else list(model.seed),
            "g": model.g,
            "weights": model.weights.tolist(),
            "feature_sets": None if model.feature_sets is None else [list(f) for f in model.feature_sets],
            "members": [model_to_dict(m) for m in model.members],
        }
        return {"format": FORMAT, "version": VERSION, "kind": "ensemble", "model": body}
    return {"format": FORMAT, "version": VERSION, "kind": model.kind, "model": model.to_dict()}


def model_from_dict(doc: dict):
    if doc.get("format") != FORMAT:
        raise SchemaError("not a model document")
    if doc.get("version") != VERSION:
        raise SchemaError(f"unsupported model document version {doc.get('version')!r}")
    kind, body = doc["kind"], doc["model"]
    if kind == "ensemble":
        fs = body["feature_sets"]
        return EnsembleModel(
            tuple(model_from_dict(m) for m in body["members"]),
            np.array(body["weights"], dtype=float), body["task"], int(body["B"]),
            None if body["seed"] is None else tuple(body["seed"]),
            None if fs is None else tuple(tuple(f) for f in fs), int(body["g"]),
        )
    if kind not in MODEL_TYPES:
        raise SchemaError(f"unknown model kind {kind!r}")
    return MODEL_TYPES[kind].from_dict(body)


def dumps(model, extra=None) -> str:
    doc = model_to_dict(model)
    if extra:
        doc["provenance"] = extra
    return json.dumps(doc, sort_keys=True)


def loads(text: str):
    return model_from_dict(json.loads(text))
