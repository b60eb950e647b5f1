"""Bootstrap aggregation and convex weighted aggregation of fitted models.

Every bootstrap member draws its resample (and optional column subset) from
its own generator ``default_rng([*seed, b])``, so members can be fitted in
any order or in parallel with identical results.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import BigtaxError, FitError, InvalidParameter
from .kernels import median_distance, parse_kernel, rbf
from .learners import (
    SolverOptions, fit_klr, fit_knn, fit_lda, fit_logistic, fit_mean, fit_ols, fit_svm, fit_tree,
    loocv_errors,
)
from .learners._common import features
from .metrics import parse_distance

METHODS = ("lda", "knn", "svm", "logistic", "klr", "tree", "rforest")
DEFAULT_KS = tuple(range(1, 26, 2))
# rbf(tau) = exp(-d^2 / (2 tau^2)); tau = median / sqrt(2) gives exp(-d^2 / median^2)
MEDIAN_TAU_SCALE = 1.0 / math.sqrt(2.0)


def _seed_tuple(seed) -> tuple:
    if seed is None:
        raise InvalidParameter("a seed is required")
    if np.ndim(seed) == 0:
        return (int(seed),)
    return tuple(int(s) for s in seed)


@dataclass(frozen=True)
class LearnerSpec:
    """A method name plus its hyperparameters.

    Recognized parameters (all optional):

    * ``lda``: ``regularization`` ("none", "convex", "ridge", "scaled"), ``value``
    * ``knn``: ``k`` (int or "loocv"), ``ks`` (candidate set), ``distance``
    * ``svm``: ``kernel`` ("linear", "rbf" or a kernel string), ``tau``
      (number or "median"), ``tau_scale``, ``lam`` (number or "1/n"), ``max_iter``
    * ``logistic``: ``penalty`` ("none" or "lasso"), ``lam``, ``penalize_intercept``
    * ``klr``: ``kernel``, ``tau``, ``tau_scale``, ``lam``
    * ``tree``: ``max_depth``, ``min_leaf``
    * ``rforest``: bagged trees with ``B``, ``feature_subsample`` ("sqrt", int
      or None), ``max_depth``, ``min_leaf``
    """

    method: str
    params: dict = field(default_factory=dict)
    label: str | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise InvalidParameter(f"unknown method {self.method!r}; choose from {', '.join(METHODS)}")

    @property
    def name(self) -> str:
        return self.label or self.method

    def get(self, key, default=None):
        return self.params.get(key, default)

    def to_dict(self):
        return {"method": self.method, "params": dict(self.params), "label": self.name}

    @classmethod
    def from_dict(cls, d):
        return cls(d["method"], dict(d.get("params", {})), d.get("label"))


def _lam(value, n):
    if value in (None, "1/n"):
        return 1.0 / n
    return float(value)


def _kernel(spec: LearnerSpec, X):
    kernel = spec.get("kernel", "rbf")
    if kernel == "linear" or not isinstance(kernel, str):
        return kernel
    if kernel != "rbf":
        return parse_kernel(kernel)
    tau = spec.get("tau", "median")
    if tau == "median":
        tau = median_distance(X) * float(spec.get("tau_scale", MEDIAN_TAU_SCALE))
    return rbf(float(tau))


def select_k_loocv(ds, ks=DEFAULT_KS, distance="euclidean"):
    """(k with the smallest leave-one-out error, ties to the smallest k; score table)."""
    ks = [k for k in sorted(set(int(k) for k in ks)) if k <= ds.n - 1]
    if not ks:
        raise InvalidParameter("no candidate k fits the training set")
    table = loocv_errors(ds, ks, distance)
    return min(table, key=lambda k: (table[k], k)), table


def fit_from_spec(spec: LearnerSpec, ds, seed=0):
    """Fit ``spec`` on ``ds``.  ``seed`` only matters for bagged methods."""
    m = spec.method
    if m == "lda":
        reg = spec.get("regularization", "none")
        value = spec.get("value")
        return fit_lda(ds, reg if reg == "none" else (reg, value))
    if m == "knn":
        distance = parse_distance(spec.get("distance", "euclidean"))
        k = spec.get("k", "loocv")
        if k == "loocv":
            k, _ = select_k_loocv(ds, spec.get("ks", DEFAULT_KS), distance)
        return fit_knn(ds, int(k), distance)
    if m == "svm":
        kernel = _kernel(spec, features(ds))
        opts = SolverOptions(max_iter=int(spec.get("max_iter", 5000)))
        return fit_svm(ds, kernel, _lam(spec.get("lam"), ds.n), opts)
    if m == "logistic":
        penalty = spec.get("penalty", "none")
        if penalty == "lasso":
            return fit_logistic(
                ds, ("lasso", float(spec.get("lam", 0.01))),
                penalize_intercept=bool(spec.get("penalize_intercept", True)),
            )
        return fit_logistic(ds)
    if m == "klr":
        kernel = _kernel(spec, features(ds))
        return fit_klr(ds, "vanilla" if kernel == "linear" else kernel, _lam(spec.get("lam"), ds.n))
    if m == "tree":
        return fit_tree(ds, int(spec.get("max_depth", 10)), int(spec.get("min_leaf", 5)))
    base = LearnerSpec("tree", {k: spec.params[k] for k in ("max_depth", "min_leaf") if k in spec.params})
    fs = spec.get("feature_subsample", "sqrt")
    return bag(base, ds, int(spec.get("B", 100)), seed, feature_subsample=fs)


@dataclass(frozen=True, eq=False)
class EnsembleModel:
    members: tuple
    weights: np.ndarray
    task: str = "classification"
    B: int = 0
    seed: tuple | None = None
    feature_sets: tuple | None = None   # per-member column indices, None = all
    g: int = 2

    kind = "ensemble"

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if len(self.members) < 1 or w.shape != (len(self.members),):
            raise InvalidParameter("one weight per member and at least one member are required")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
            raise InvalidParameter("weights must be non-negative and sum to 1")
        if self.task not in ("classification", "regression"):
            raise InvalidParameter(f"unknown task {self.task!r}")
        object.__setattr__(self, "weights", w)

    @property
    def schema(self):
        return getattr(self.members[0], "schema", None) if self.feature_sets is None else None

    def _member_inputs(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        for b, model in enumerate(self.members):
            cols = None if self.feature_sets is None else self.feature_sets[b]
            yield model, (X if cols is None else X[:, list(cols)])

    def member_predictions(self, X) -> np.ndarray:
        """(B, m) matrix of member outputs."""
        return np.stack([mdl.predict(Z) for mdl, Z in self._member_inputs(X)])

    def predict_with_votes(self, X):
        P = self.member_predictions(X)
        if self.task == "regression":
            return self.weights @ P, P.T
        dist = np.zeros((P.shape[1], self.g))
        for b in range(P.shape[0]):
            dist[np.arange(P.shape[1]), P[b].astype(int) - 1] += self.weights[b]
        # argmax keeps the first maximum: smallest class on ties
        return np.argmax(dist, axis=1) + 1, dist

    def predict(self, X):
        return self.predict_with_votes(X)[0]

    def scores(self, X):
        return self.predict_with_votes(X)[1]


def predict_ensemble(model: EnsembleModel, X):
    """(labels or values, vote distribution or member predictions)."""
    return model.predict_with_votes(X)


def weighted_aggregate(members, weights, task="classification") -> EnsembleModel:
    members = tuple(members)
    w = np.asarray(weights, dtype=float)
    if w.shape != (len(members),):
        raise InvalidParameter("one weight per member is required")
    if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
        raise InvalidParameter(f"weights must be convex (non-negative, sum 1); sum is {w.sum()!r}")
    g = max(getattr(m, "g", 2) for m in members) if task == "classification" else 2
    return EnsembleModel(members, w, task, len(members), None, None, g)


def _resolve_subsample(fs, p):
    if fs in (None, False, "none"):
        return None
    m = math.ceil(math.sqrt(p)) if fs in ("sqrt", True) else int(fs)
    if not 1 <= m <= p:
        raise InvalidParameter(f"feature_subsample must lie in 1..{p}")
    return m


def bootstrap_draw(n, p, seed, b, m=None):
    """Resample indices (and sorted column subset) for member ``b``."""
    rng = np.random.default_rng([*_seed_tuple(seed), b])
    idx = rng.integers(0, n, size=n)
    cols = None if m is None else np.sort(rng.choice(p, size=m, replace=False))
    return idx, cols


def _run(jobs, n_jobs):
    if n_jobs is None or n_jobs <= 1:
        return [job() for job in jobs]
    with ThreadPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(lambda job: job(), jobs))


def bag(spec: LearnerSpec, ds, B: int, seed, feature_subsample=None, n_jobs=1) -> EnsembleModel:
    """Bagged classifier: B members fitted on bootstrap resamples of size n."""
    if int(B) != B or B < 1:
        raise InvalidParameter("B must be a positive integer")
    m = _resolve_subsample(feature_subsample, ds.p)

    def member(b):
        def job():
            idx, cols = bootstrap_draw(ds.n, ds.p, seed, b, m)
            sample = ds.take(idx)
            if cols is not None:
                sample = sample.select_columns(cols)
            try:
                return fit_from_spec(spec, sample, seed=(*_seed_tuple(seed), b)), cols
            except BigtaxError as exc:
                raise FitError(f"member {b} failed: {exc}", index=b) from exc
        return job

    out = _run([member(b) for b in range(1, B + 1)], n_jobs)
    members = tuple(o[0] for o in out)
    fsets = None if m is None else tuple(tuple(int(c) for c in o[1]) for o in out)
    return EnsembleModel(members, np.full(B, 1.0 / B), "classification", int(B),
                         _seed_tuple(seed), fsets, ds.g)


REGRESSORS = {"ols": fit_ols, "mean": fit_mean}


def bag_regression(method: str, X, y, B: int, seed, n_jobs=1) -> EnsembleModel:
    """Bagged regressor: mean of B ``method`` fits on bootstrap resamples."""
    if method not in REGRESSORS:
        raise InvalidParameter(f"unknown regressor {method!r}")
    if int(B) != B or B < 1:
        raise InvalidParameter("B must be a positive integer")
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    y = np.asarray(y, dtype=float)
    fit = REGRESSORS[method]

    def member(b):
        def job():
            idx, _ = bootstrap_draw(len(y), X.shape[1], seed, b)
            return fit(X[idx], y[idx])
        return job

    members = tuple(_run([member(b) for b in range(1, B + 1)], n_jobs))
    return EnsembleModel(members, np.full(B, 1.0 / B), "regression", int(B), _seed_tuple(seed))
