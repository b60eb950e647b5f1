"""Minimal regressors used as members of regression ensembles."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class ConstantRegressor:
    value: float

    kind = "constant"

    def predict(self, X) -> np.ndarray:
        return np.full(np.atleast_2d(np.asarray(X, dtype=float)).shape[0], self.value)

    def to_dict(self):
        return {"value": self.value}

    @classmethod
    def from_dict(cls, d):
        return cls(float(d["value"]))


@dataclass(frozen=True, eq=False)
class LinearRegressor:
    intercept: float
    coef: np.ndarray

    kind = "ols"

    def predict(self, X) -> np.ndarray:
        return self.intercept + np.atleast_2d(np.asarray(X, dtype=float)) @ self.coef

    def to_dict(self):
        return {"intercept": self.intercept, "coef": self.coef.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(float(d["intercept"]), np.array(d["coef"], dtype=float))


def fit_mean(X, y) -> ConstantRegressor:
    return ConstantRegressor(float(np.mean(y)))


def fit_ols(X, y) -> LinearRegressor:
    """Least squares with an intercept (minimum-norm solution when rank deficient)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Xa = np.hstack([np.ones((X.shape[0], 1)), X])
    w = np.linalg.lstsq(Xa, np.asarray(y, dtype=float), rcond=None)[0]
    return LinearRegressor(float(w[0]), w[1:])
