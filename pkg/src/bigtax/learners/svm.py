"""Binary support vector machines.

The linear form minimizes

    (1/n) sum_i (1 - y_i (b0 + b'x_i))_+  +  (lam/2) (b0^2 + |b|^2)

with the intercept included in the penalty, by full-batch
subgradient descent.  The kernel form solves the usual soft-margin dual
(unpenalized bias, box 0 <= a_i <= C with C = 1/(n lam)) by sequential
minimal optimization with second-order working-set selection.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..dataset import ColumnSchema, encoded_columns
from ..errors import InvalidParameter
from ..kernels import KernelSpec, cross_gram, parse_kernel
from ._common import as_rows, features, from_sign, require_binary, to_pm1

SUPPORT_TOL = 1e-8
_TAU = 1e-12


@dataclass(frozen=True)
class SolverOptions:
    max_iter: int = 5000          # subgradient iterations (linear form)
    smo_max_iter: int = 200_000   # SMO pair updates (kernel form)
    tol: float = 1e-3             # KKT tolerance for SMO


@dataclass(frozen=True, eq=False)
class SvmModel:
    schema: tuple
    form: str                      # "linear" or "kernel"
    lam: float
    beta0: float = 0.0
    beta: np.ndarray | None = None
    spec: KernelSpec | None = None
    C: float | None = None
    alpha: np.ndarray | None = None       # support coefficients only
    sv_y: np.ndarray | None = None
    sv_X: np.ndarray | None = None
    sv_index: np.ndarray | None = None    # positions in the training set
    converged: bool = True
    iterations: int = 0
    objective: float = float("nan")
    trace: np.ndarray | None = field(default=None, repr=False)

    kind = "svm"
    g = 2

    def decision(self, X) -> np.ndarray:
        Z = as_rows(self, X)
        if self.form == "linear":
            return self.beta0 + Z @ self.beta
        if self.alpha.size == 0:
            return np.full(Z.shape[0], self.beta0)
        K = cross_gram(self.spec, Z, self.sv_X)
        return K @ (self.alpha * self.sv_y) + self.beta0

    def predict(self, X) -> np.ndarray:
        return from_sign(self.decision(X))

    def scores(self, X):
        return self.decision(X)

    def to_dict(self):
        d = {
            "schema": [c.to_dict() for c in self.schema],
            "form": self.form,
            "lam": self.lam,
            "beta0": self.beta0,
            "converged": self.converged,
            "iterations": self.iterations,
            "objective": self.objective,
        }
        if self.form == "linear":
            d["beta"] = self.beta.tolist()
        else:
            d.update(
                kernel=str(self.spec),
                C=self.C,
                alpha=self.alpha.tolist(),
                sv_y=self.sv_y.tolist(),
                sv_X=self.sv_X.tolist(),
                sv_index=self.sv_index.tolist(),
            )
        return d

    @classmethod
    def from_dict(cls, d):
        schema = tuple(ColumnSchema.from_dict(c) for c in d["schema"])
        common = dict(
            lam=d["lam"], beta0=d["beta0"], converged=d["converged"],
            iterations=d["iterations"], objective=d["objective"],
        )
        if d["form"] == "linear":
            return cls(schema, "linear", beta=np.array(d["beta"], dtype=float), **common)
        width = sum(len(c) for c in encoded_columns(schema, drop_first=True))
        return cls(
            schema, "kernel", spec=parse_kernel(d["kernel"]), C=d["C"],
            alpha=np.array(d["alpha"], dtype=float), sv_y=np.array(d["sv_y"], dtype=float),
            sv_X=np.array(d["sv_X"], dtype=float).reshape(len(d["alpha"]), width),
            sv_index=np.array(d["sv_index"], dtype=np.int64), **common,
        )


def primal_objective(w, Xa, y, lam) -> float:
    """Hinge risk plus (lam/2)|w|^2, where ``Xa`` carries a leading column of ones."""
    margins = y * (Xa @ w)
    return float(np.mean(np.maximum(0.0, 1.0 - margins)) + 0.5 * lam * (w @ w))


def _subgradient(Xa, y, lam, max_iter):
    n, d = Xa.shape
    w = np.zeros(d)
    best_w, best_f = w.copy(), primal_objective(w, Xa, y, lam)
    avg, n_avg = np.zeros(d), 0
    trace = [best_f]
    for t in range(1, max_iter + 1):
        active = y * (Xa @ w) < 1.0
        grad = lam * w - (y[active] @ Xa[active]) / n
        w = w - grad / (lam * t)
        f = primal_objective(w, Xa, y, lam)
        if f < best_f:
            best_f, best_w = f, w.copy()
        if t > max_iter // 2:
            avg += w
            n_avg += 1
        trace.append(best_f)
    avg /= max(n_avg, 1)
    f_avg = primal_objective(avg, Xa, y, lam)
    if f_avg <= best_f:
        best_w, best_f = avg, f_avg
        trace[-1] = min(trace[-1], f_avg)
    return best_w, best_f, np.array(trace)


def _smo(K, y, C, tol, max_iter):
    """Solve min 1/2 a'Qa - e'a, 0 <= a <= C, y'a = 0 with Q = (yy') * K."""
    n = y.shape[0]
    alpha = np.zeros(n)
    G = -np.ones(n)
    QD = np.diag(K).copy()
    pos = y > 0
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        up = np.where(pos, alpha < C, alpha > 0)
        low = np.where(pos, alpha > 0, alpha < C)
        yG = -y * G
        if not up.any() or not low.any():
            converged = True
            break
        cand = np.where(up, yG, -np.inf)
        i = int(np.argmax(cand))
        m_up = cand[i]
        M_low = np.min(np.where(low, yG, np.inf))
        if m_up - M_low < tol:
            converged = True
            break
        Ki = K[i]
        b = m_up - yG
        a = QD[i] + QD - 2.0 * Ki
        a = np.where(a > 0, a, _TAU)
        score = np.where(low & (b > 0), -(b * b) / a, np.inf)
        j = int(np.argmin(score))
        Kj = K[j]
        ai_old, aj_old = alpha[i], alpha[j]
        yi, yj = y[i], y[j]
        Qij = yi * yj * Ki[j]
        if yi != yj:
            quad = QD[i] + QD[j] + 2.0 * Qij
            quad = quad if quad > 0 else _TAU
            delta = (-G[i] - G[j]) / quad
            diff = ai_old - aj_old
            ai, aj = ai_old + delta, aj_old + delta
            if diff > 0:
                if aj < 0:
                    aj, ai = 0.0, diff
            elif ai < 0:
                ai, aj = 0.0, -diff
            if diff > 0:
                if ai > C:
                    ai, aj = C, C - diff
            elif aj > C:
                aj, ai = C, C + diff
        else:
            quad = QD[i] + QD[j] - 2.0 * Qij
            quad = quad if quad > 0 else _TAU
            delta = (G[i] - G[j]) / quad
            total = ai_old + aj_old
            ai, aj = ai_old - delta, aj_old + delta
            if total > C:
                if ai > C:
                    ai, aj = C, total - C
            elif aj < 0:
                aj, ai = 0.0, total
            if total > C:
                if aj > C:
                    aj, ai = C, total - C
            elif ai < 0:
                ai, aj = 0.0, total
        alpha[i], alpha[j] = ai, aj
        # Q[:, i] = y * y_i * K[:, i]
        G += y * (yi * (ai - ai_old) * Ki + yj * (aj - aj_old) * Kj)

    # bias: average over free vectors, midpoint of the feasible interval otherwise
    yG = y * G
    free = (alpha > 0) & (alpha < C)
    if free.any():
        rho = float(np.mean(yG[free]))
    else:
        ub_mask = np.where(pos, alpha <= 0, alpha >= C)
        lb_mask = np.where(pos, alpha >= C, alpha <= 0)
        ub = np.min(yG[ub_mask]) if ub_mask.any() else np.inf
        lb = np.max(yG[lb_mask]) if lb_mask.any() else -np.inf
        rho = 0.5 * (ub + lb) if np.isfinite(ub + lb) else 0.0
    dual = 0.5 * float(alpha @ (G - 1.0)) if n else 0.0  # 1/2 a'Qa - e'a = 1/2 a'(G - e)
    return alpha, -rho, converged, it, dual


def fit_svm(ds, kernel="linear", lam=1.0, solver_opts: SolverOptions | None = None) -> SvmModel:
    """Fit a binary SVM.  ``kernel`` is ``"linear"`` or a KernelSpec / kernel string."""
    require_binary(ds)
    if not lam > 0:
        raise InvalidParameter("lambda must be positive")
    opts = solver_opts or SolverOptions()
    X = features(ds)
    y = to_pm1(ds.labels)
    n = X.shape[0]
    if isinstance(kernel, str) and kernel != "linear":
        kernel = parse_kernel(kernel)
    if kernel == "linear":
        Xa = np.hstack([np.ones((n, 1)), X])
        w, f, trace = _subgradient(Xa, y, float(lam), opts.max_iter)
        return SvmModel(
            ds.schema, "linear", float(lam), beta0=float(w[0]), beta=w[1:],
            converged=True, iterations=opts.max_iter, objective=f, trace=trace,
        )
    C = 1.0 / (n * lam)
    K = cross_gram(kernel, X, X)
    K = 0.5 * (K + K.T)
    alpha, b, converged, it, dual = _smo(K, y, C, opts.tol, opts.smo_max_iter)
    sv = np.flatnonzero(alpha > SUPPORT_TOL)
    return SvmModel(
        ds.schema, "kernel", float(lam), beta0=float(b), spec=kernel, C=C,
        alpha=alpha[sv], sv_y=y[sv], sv_X=X[sv], sv_index=sv,
        converged=converged, iterations=it, objective=dual,
    )


def kkt_residuals(model: SvmModel, ds) -> np.ndarray:
    """Per-point violation of the soft-margin KKT conditions on the training set."""
    y = to_pm1(ds.labels)
    f = y * model.decision(ds.values)
    a = np.zeros(ds.n)
    a[model.sv_index] = model.alpha
    C = model.C
    res = np.zeros(ds.n)
    at_zero = a <= SUPPORT_TOL
    at_c = a >= C - SUPPORT_TOL
    free = ~at_zero & ~at_c
    res[at_zero] = np.maximum(0.0, 1.0 - f[at_zero])
    res[at_c] = np.maximum(0.0, f[at_c] - 1.0)
    res[free] = np.abs(f[free] - 1.0)
    return res
