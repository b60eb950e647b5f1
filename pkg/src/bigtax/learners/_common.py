"""Pieces shared by the individual learners."""
from __future__ import annotations

import numpy as np

from ..dataset import VariableKind, encode
from ..errors import InvalidParameter, MissingValues, SchemaError


def features(ds, drop_first=True) -> np.ndarray:
    """Numeric design matrix of ``ds`` (categoricals as indicator columns)."""
    if np.isnan(ds.values).any():
        raise MissingValues("impute missing cells before fitting")
    return encode(ds.values, ds.schema, drop_first=drop_first)


def as_rows(model, X, drop_first=True) -> np.ndarray:
    """Encode query rows given in the training dataset's column layout."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.shape[1] != len(model.schema):
        raise SchemaError(f"model expects {len(model.schema)} columns, got {X.shape[1]}")
    if np.isnan(X).any():
        raise MissingValues("query rows contain missing cells")
    return encode(X, model.schema, drop_first=drop_first)


def require_binary(ds):
    if ds.g != 2:
        raise InvalidParameter(f"this learner is binary; dataset has g={ds.g} classes")


def to_pm1(labels) -> np.ndarray:
    """Class 1 -> -1, class 2 -> +1."""
    return np.where(np.asarray(labels) == 2, 1.0, -1.0)


def from_sign(values) -> np.ndarray:
    """Decision values to class labels; sign(0) counts as +1 (class 2)."""
    return np.where(np.asarray(values) >= 0, 2, 1)


def is_categorical(col) -> bool:
    return col.kind is VariableKind.CATEGORICAL
