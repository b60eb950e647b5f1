"""Kernel logistic regression.

Minimizes (1/n) sum log(1 + exp(-y_i g(x_i))) + (lam/2) w'Kw over
g(x) = v + sum_j w_j k(x, x_j), by damped Newton steps on (v, w).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from ..dataset import ColumnSchema
from ..errors import InvalidParameter
from ..kernels import KernelSpec, cross_gram, parse_kernel
from ._common import as_rows, features, from_sign, require_binary, to_pm1

JITTER = 1e-10


def objective(v, w, K, y, lam) -> float:
    f = v + K @ w
    return float(np.mean(np.logaddexp(0.0, -y * f)) + 0.5 * lam * (w @ K @ w))


@dataclass(frozen=True, eq=False)
class KlrModel:
    schema: tuple
    spec: KernelSpec
    v: float
    w: np.ndarray
    lam: float
    X: np.ndarray
    converged: bool = True
    iterations: int = 0

    kind = "klr"
    g = 2

    def decision(self, X) -> np.ndarray:
        Z = as_rows(self, X)
        return self.v + cross_gram(self.spec, Z, self.X) @ self.w

    def probability(self, X) -> np.ndarray:
        """P(class 2 | x) = 1 / (1 + exp(-g(x)))."""
        return expit(self.decision(X))

    def predict(self, X) -> np.ndarray:
        # sign(prob - 1/2) equals sign(g); g = 0 goes to +1
        return from_sign(self.decision(X))

    def scores(self, X):
        return self.probability(X)

    def to_dict(self):
        return {
            "schema": [c.to_dict() for c in self.schema],
            "kernel": str(self.spec),
            "v": self.v,
            "w": self.w.tolist(),
            "lam": self.lam,
            "X": self.X.tolist(),
            "converged": self.converged,
            "iterations": self.iterations,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            tuple(ColumnSchema.from_dict(c) for c in d["schema"]), parse_kernel(d["kernel"]),
            float(d["v"]), np.array(d["w"], dtype=float), float(d["lam"]),
            np.array(d["X"], dtype=float), bool(d["converged"]), int(d["iterations"]),
        )


def fit_klr(ds, spec, lam, max_iter=100, tol=1e-8) -> KlrModel:
    require_binary(ds)
    if not lam > 0:
        raise InvalidParameter("lambda must be positive")
    if isinstance(spec, str):
        spec = parse_kernel(spec)
    X = features(ds)
    y = to_pm1(ds.labels)
    n = X.shape[0]
    K = cross_gram(spec, X, X)
    K = 0.5 * (K + K.T)
    Kj = K + JITTER * np.eye(n)

    v, w = 0.0, np.zeros(n)
    F = objective(v, w, Kj, y, lam)
    converged, it = False, 0
    for it in range(1, max_iter + 1):
        f = v + Kj @ w
        s = expit(-y * f)            # d/df of the loss is -y s
        d = s * (1.0 - s)
        r = -y * s / n
        gv = r.sum()
        gw = Kj @ r + lam * (Kj @ w)
        H = np.empty((n + 1, n + 1))
        H[0, 0] = d.sum() / n
        H[0, 1:] = H[1:, 0] = Kj @ d / n
        H[1:, 1:] = (Kj * d) @ Kj / n + lam * Kj
        grad = np.concatenate([[gv], gw])
        try:
            step = np.linalg.solve(H, -grad)
            if not np.all(np.isfinite(step)):
                raise np.linalg.LinAlgError
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(H, -grad, rcond=None)[0]
        t = 1.0
        for _ in range(60):
            v_new, w_new = v + t * step[0], w + t * step[1:]
            F_new = objective(v_new, w_new, Kj, y, lam)
            if F_new <= F:
                break
            t *= 0.5
        else:
            converged = True  # no decrease possible at machine precision
            break
        decrease = F - F_new
        v, w, F = v_new, w_new, F_new
        if decrease <= tol * max(abs(F), 1e-300):
            converged = True
            break
    return KlrModel(ds.schema, spec, float(v), w, float(lam), X, converged, it)
