"""Linear logistic regression, unpenalized or with an l1 (lasso) penalty."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from ..dataset import ColumnSchema
from ..errors import InvalidParameter
from ._common import as_rows, features, from_sign, require_binary, to_pm1

DIVERGED_NORM = 1e6


def risk(w, Xa, y) -> float:
    """(1/n) sum log(1 + exp(-y_i w'x_i)) with labels in {-1, +1}."""
    return float(np.mean(np.logaddexp(0.0, -y * (Xa @ w))))


def risk01(w, Xa, z) -> float:
    """The same risk written for 0/1 labels: -(1/n) sum [z eta - log(1 + e^eta)]."""
    eta = Xa @ w
    return float(-np.mean(z * eta - np.logaddexp(0.0, eta)))


def gradient(w, Xa, y) -> np.ndarray:
    m = y * (Xa @ w)
    return -(Xa.T @ (y * expit(-m))) / Xa.shape[0]


def hessian(w, Xa, y) -> np.ndarray:
    m = y * (Xa @ w)
    d = expit(m) * expit(-m)
    return (Xa.T * d) @ Xa / Xa.shape[0]


def lasso_objective(w, Xa, y, lam, penalized) -> float:
    return risk(w, Xa, y) + lam * float(np.abs(w[penalized]).sum())


@dataclass(frozen=True, eq=False)
class LogisticModel:
    schema: tuple
    beta0: float
    beta: np.ndarray
    penalty: str = "none"
    lam: float = 0.0
    penalize_intercept: bool = True
    converged: bool = True
    iterations: int = 0

    kind = "logistic"
    g = 2

    def linear_predictor(self, X) -> np.ndarray:
        return self.beta0 + as_rows(self, X) @ self.beta

    def probability(self, X) -> np.ndarray:
        """P(class 2 | x)."""
        return expit(self.linear_predictor(X))

    def predict(self, X) -> np.ndarray:
        return from_sign(self.linear_predictor(X))

    def scores(self, X):
        return self.probability(X)

    def to_dict(self):
        return {
            "schema": [c.to_dict() for c in self.schema],
            "beta0": self.beta0,
            "beta": self.beta.tolist(),
            "penalty": self.penalty,
            "lam": self.lam,
            "penalize_intercept": self.penalize_intercept,
            "converged": self.converged,
            "iterations": self.iterations,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            tuple(ColumnSchema.from_dict(c) for c in d["schema"]),
            float(d["beta0"]), np.array(d["beta"], dtype=float), d["penalty"], float(d["lam"]),
            bool(d["penalize_intercept"]), bool(d["converged"]), int(d["iterations"]),
        )


def _separates(w, Xa, y) -> bool:
    # a strictly separating w can always be scaled up to lower the risk
    return bool(np.all(y * (Xa @ w) > 0))


def _newton(Xa, y, max_iter=100, tol=1e-8):
    w = np.zeros(Xa.shape[1])
    f = risk(w, Xa, y)
    for it in range(1, max_iter + 1):
        g = gradient(w, Xa, y)
        if np.max(np.abs(g)) < 1e-14:
            return w, not _separates(w, Xa, y), it
        H = hessian(w, Xa, y)
        try:
            step = np.linalg.solve(H, -g)
            if not np.all(np.isfinite(step)):
                raise np.linalg.LinAlgError
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(H, -g, rcond=None)[0]
        t = 1.0
        for _ in range(60):
            w_new = w + t * step
            f_new = risk(w_new, Xa, y)
            if f_new <= f:
                break
            t *= 0.5
        else:
            return w, False, it
        decrease = f - f_new
        w, f = w_new, f_new
        if np.linalg.norm(w) > DIVERGED_NORM:
            return w, False, it
        if decrease <= tol * max(f, 1e-300):
            return w, not _separates(w, Xa, y), it
    return w, False, max_iter


def _soft(u, t):
    return np.sign(u) * max(abs(u) - t, 0.0)


def _prox_newton(Xa, y, lam, penalized, max_iter=100, tol=1e-7, max_sweeps=1000):
    d = Xa.shape[1]
    pen = np.where(penalized, lam, 0.0)
    w = np.zeros(d)
    F = lasso_objective(w, Xa, y, lam, penalized)
    for it in range(1, max_iter + 1):
        g = gradient(w, Xa, y)
        H = hessian(w, Xa, y)
        h = np.maximum(np.diag(H), 1e-12)
        v = w.copy()
        Hd = np.zeros(d)  # H (v - w)
        for _ in range(max_sweeps):
            big = 0.0
            for j in range(d):
                r = g[j] + Hd[j] - h[j] * (v[j] - w[j])
                new = _soft(h[j] * w[j] - r, pen[j]) / h[j]
                delta = new - v[j]
                if delta != 0.0:
                    Hd += H[:, j] * delta
                    v[j] = new
                    big = max(big, abs(delta))
            if big < tol * 0.1:
                break
        direction = v - w
        if np.max(np.abs(direction)) < tol:
            return w, True, it
        # sufficient-decrease backtracking on the composite objective
        model_dec = g @ direction + float(np.abs(pen * v).sum() - np.abs(pen * w).sum())
        t = 1.0
        for _ in range(60):
            w_new = w + t * direction
            F_new = lasso_objective(w_new, Xa, y, lam, penalized)
            if F_new <= F + 1e-4 * t * model_dec:
                break
            t *= 0.5
        else:
            return w, False, it
        w, F = w_new, F_new
        if np.max(np.abs(t * direction)) < tol:
            return w, True, it
    return w, False, max_iter


def _design(ds):
    require_binary(ds)
    X = features(ds)
    Xa = np.hstack([np.ones((X.shape[0], 1)), X])
    return Xa, to_pm1(ds.labels)


def lasso_lambda_max(ds, penalize_intercept=True) -> float:
    """Smallest lambda at which every penalized coefficient is exactly zero."""
    Xa, y = _design(ds)
    if penalize_intercept:
        return float(np.max(np.abs(gradient(np.zeros(Xa.shape[1]), Xa, y))))
    w = np.zeros(Xa.shape[1])
    ybar = np.mean(y > 0)
    w[0] = np.log(ybar / (1 - ybar))
    return float(np.max(np.abs(gradient(w, Xa, y)[1:])))


def fit_logistic(ds, penalty=None, penalize_intercept=True, max_iter=100) -> LogisticModel:
    """Fit binary logistic regression.

    ``penalty`` is ``None``/``"none"`` or ``("lasso", lam)``.  The lasso
    penalty covers the intercept too unless ``penalize_intercept=False``.
    ``converged`` is False when Newton hits the iteration cap or the
    coefficients run off (separable data).
    """
    Xa, y = _design(ds)
    if penalty is None or penalty == "none":
        w, ok, it = _newton(Xa, y, max_iter=max_iter)
        return LogisticModel(ds.schema, float(w[0]), w[1:], "none", 0.0, True, ok, it)
    kind, lam = penalty
    if kind != "lasso" or not lam >= 0:
        raise InvalidParameter(f"unsupported penalty {penalty!r}")
    penalized = np.ones(Xa.shape[1], dtype=bool)
    penalized[0] = penalize_intercept
    w, ok, it = _prox_newton(Xa, y, float(lam), penalized, max_iter=max_iter)
    return LogisticModel(
        ds.schema, float(w[0]), w[1:], "lasso", float(lam), penalize_intercept, ok, it
    )
