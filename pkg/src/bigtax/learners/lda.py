"""Linear discriminant analysis with optional covariance regularization."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from ..dataset import ColumnSchema
from ..errors import InvalidParameter, SchemaError, SingularCovariance
from ._common import as_rows, features

REGULARIZATIONS = ("none", "convex", "ridge", "scaled")
DEFAULT_ALPHA = 0.1


@dataclass(frozen=True)
class Regularization:
    """``convex``: (1-a)S + aI;  ``ridge``: S + lam I;  ``scaled``: lam S + I."""

    kind: str = "none"
    value: float | None = None

    def __post_init__(self):
        if self.kind not in REGULARIZATIONS:
            raise InvalidParameter(f"unknown regularization {self.kind!r}")
        if self.kind == "convex":
            v = DEFAULT_ALPHA if self.value is None else float(self.value)
            if not 0.0 < v < 1.0:
                raise InvalidParameter("convex regularization needs alpha in (0, 1)")
            object.__setattr__(self, "value", v)
        elif self.kind in ("ridge", "scaled"):
            if self.value is None or not float(self.value) > 0:
                raise InvalidParameter(f"{self.kind} regularization needs lambda > 0")
            object.__setattr__(self, "value", float(self.value))

    def apply(self, S):
        p = S.shape[0]
        if self.kind == "none":
            return S.copy()
        if self.kind == "convex":
            return (1.0 - self.value) * S + self.value * np.eye(p)
        if self.kind == "ridge":
            return S + self.value * np.eye(p)
        return self.value * S + np.eye(p)

    def __str__(self):
        return self.kind if self.kind == "none" else f"{self.kind}({self.value!r})"


def as_regularization(reg) -> Regularization:
    if reg is None:
        return Regularization()
    if isinstance(reg, Regularization):
        return reg
    if isinstance(reg, str):
        return Regularization(reg)
    kind, value = reg
    return Regularization(kind, value)


@dataclass(frozen=True, eq=False)
class LdaModel:
    schema: tuple
    priors: np.ndarray
    means: np.ndarray          # (g, p)
    cov: np.ndarray            # pooled, 1/n
    cov_reg: np.ndarray
    regularization: Regularization
    coef: np.ndarray           # (g, p) rows Sigma_reg^-1 mu_j
    intercepts: np.ndarray     # (g,) -mu_j' Sigma^-1 mu_j / 2 + log pi_j
    beta0: float | None = None
    beta: np.ndarray | None = None

    kind = "lda"

    @property
    def g(self):
        return self.priors.shape[0]

    def discriminants(self, X) -> np.ndarray:
        Z = as_rows(self, X)
        return Z @ self.coef.T + self.intercepts

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.discriminants(X), axis=1) + 1

    def scores(self, X):
        return self.discriminants(X)

    def to_dict(self):
        return {
            "schema": [c.to_dict() for c in self.schema],
            "priors": self.priors.tolist(),
            "means": self.means.tolist(),
            "cov": self.cov.tolist(),
            "regularization": {"kind": self.regularization.kind, "value": self.regularization.value},
        }

    @classmethod
    def from_dict(cls, d):
        schema = tuple(ColumnSchema.from_dict(c) for c in d["schema"])
        reg = Regularization(d["regularization"]["kind"], d["regularization"]["value"])
        return _assemble(schema, np.array(d["priors"]), np.array(d["means"]), np.array(d["cov"]), reg)


def _assemble(schema, priors, means, cov, reg):
    cov_reg = reg.apply(cov)
    p = cov.shape[0]
    if reg.kind == "none" and np.linalg.cond(cov_reg) >= 1e12:
        raise SingularCovariance(
            "pooled covariance is singular (p too large for n?); "
            "use a regularized covariance, e.g. convex(alpha=0.1)"
        )
    try:
        fac = cho_factor(cov_reg)
    except np.linalg.LinAlgError as exc:
        raise SingularCovariance("regularized covariance is not positive definite") from exc
    coef = cho_solve(fac, means.T).T.reshape(len(priors), p)
    with np.errstate(divide="ignore"):
        logp = np.log(priors)
    intercepts = -0.5 * np.einsum("jp,jp->j", means, coef) + logp
    beta0 = beta = None
    if len(priors) == 2:
        diff = means[1] - means[0]
        beta = cho_solve(fac, diff)
        beta0 = float(-0.5 * (means[1] + means[0]) @ beta + np.log(priors[1] / priors[0]))
    return LdaModel(schema, priors, means, cov, cov_reg, reg, coef, intercepts, beta0, beta)


def fit_lda(ds, regularization=None) -> LdaModel:
    """Fit LDA with the 1/n pooled within-class covariance.

    ``regularization`` is ``None``/``"none"``, a :class:`Regularization`, or a
    ``(kind, value)`` pair with kind in convex/ridge/scaled.
    """
    reg = as_regularization(regularization)
    X = features(ds)
    y = ds.labels
    counts = ds.class_counts()
    if np.any(counts < 2):
        missing = [j + 1 for j, c in enumerate(counts) if c < 2]
        raise SchemaError(f"classes {missing} have fewer than 2 rows")
    n, p = X.shape
    priors = counts / n
    means = np.vstack([X[y == j].mean(axis=0) for j in range(1, ds.g + 1)])
    R = X - means[y - 1]
    cov = (R.T @ R) / n
    cov = 0.5 * (cov + cov.T)
    return _assemble(ds.schema, priors, means, cov, reg)
