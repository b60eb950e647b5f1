"""Zero-one loss, replicated train/test evaluation, leave-one-out and the benchmark.

Replication r of a run with master seed s splits with the generator
``default_rng([s, r])``; nothing else feeds the split, so replications can be
run in any order or in parallel.
"""
from __future__ import annotations

import json
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dataset import apply_transform, fit_transform, split
from .ensemble import LearnerSpec, _seed_tuple, fit_from_spec, select_k_loocv
from .errors import BigtaxError, DegenerateSplit, FitError, InvalidParameter, SchemaError
from .learners import loocv_errors
from .metrics import parse_distance

# learners whose fit fails when a class is absent from the training rows
NEEDS_EVERY_CLASS = ("lda", "svm", "logistic", "klr")
STAT_NAMES = ("mean", "sd", "min", "q1", "median", "q3", "max")


def epe(model, test) -> float:
    """Share of test rows the model misclassifies."""
    schema = getattr(model, "schema", None)
    if schema is not None and [c.name for c in schema] != test.names:
        raise SchemaError("test columns do not match the model's training columns")
    if test.n < 1:
        raise InvalidParameter("empty test set")
    return float(np.mean(model.predict(test.values) != test.labels))


def summarize(errors) -> dict:
    """mean, sd (n-1), min, quartiles by linear interpolation, max."""
    e = np.asarray(errors, dtype=float)
    e = e[np.isfinite(e)]
    if e.size == 0:
        return {k: float("nan") for k in STAT_NAMES}
    q1, med, q3 = np.quantile(e, [0.25, 0.5, 0.75], method="linear")
    return {
        "mean": float(np.mean(e)),
        "sd": float(np.std(e, ddof=1)) if e.size > 1 else 0.0,
        "min": float(e.min()),
        "q1": float(q1),
        "median": float(med),
        "q3": float(q3),
        "max": float(e.max()),
    }


@dataclass
class EvalEntry:
    dataset: str
    method: str
    errors: np.ndarray                 # E_1..E_R, NaN where a replication failed
    R: int
    test_fraction: float
    seed: tuple
    params: dict = field(default_factory=dict)
    failures: dict = field(default_factory=dict)   # r -> message
    skipped: str | None = None

    @property
    def complete(self) -> bool:
        return self.skipped is None and not self.failures

    @property
    def stats(self) -> dict:
        return summarize(self.errors)

    def to_dict(self):
        return {
            "dataset": self.dataset,
            "method": self.method,
            "errors": [None if not np.isfinite(e) else float(e) for e in self.errors],
            "R": self.R,
            "test_fraction": self.test_fraction,
            "seed": list(self.seed),
            "params": self.params,
            "failures": {str(k): v for k, v in self.failures.items()},
            "skipped": self.skipped,
            "stats": self.stats,
        }

    @classmethod
    def from_dict(cls, d):
        errs = np.array([np.nan if e is None else e for e in d["errors"]], dtype=float)
        return cls(
            d["dataset"], d["method"], errs, int(d["R"]), float(d["test_fraction"]),
            tuple(d["seed"]), d.get("params", {}),
            {int(k): v for k, v in d.get("failures", {}).items()}, d.get("skipped"),
        )


@dataclass
class EvalReport:
    entries: list = field(default_factory=list)
    config: dict = field(default_factory=dict)

    def entry(self, dataset, method) -> EvalEntry:
        for e in self.entries:
            if e.dataset == dataset and e.method == method:
                return e
        raise KeyError((dataset, method))

    @property
    def datasets(self):
        return list(dict.fromkeys(e.dataset for e in self.entries))

    @property
    def methods(self):
        return list(dict.fromkeys(e.method for e in self.entries))

    def to_dict(self):
        return {"config": self.config, "entries": [e.to_dict() for e in self.entries]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d):
        return cls([EvalEntry.from_dict(e) for e in d["entries"]], d.get("config", {}))


def _prepare(train, test, transform, scale_mode):
    if transform in (None, "none"):
        return train, test
    params = fit_transform(train, transform, scale_mode=scale_mode)[1]
    return apply_transform(params, train), apply_transform(params, test)


def run_replication(spec, ds, r, test_fraction, seed, transform="standardize", scale_mode="sd"):
    """E_r: split with stream (seed, r), preprocess on train only, fit, score."""
    key = (*_seed_tuple(seed), r)
    train, test = split(ds, test_fraction, list(key))
    train, test = _prepare(train, test, transform, scale_mode)
    model = fit_from_spec(spec, train, seed=key)
    return epe(model, test)


def replicate_epe(spec: LearnerSpec, ds, R: int, test_fraction: float = 1 / 3, seed=42,
                  transform="standardize", scale_mode="sd", dataset_name="data",
                  n_jobs=1) -> EvalEntry:
    if int(R) != R or R < 1:
        raise InvalidParameter("R must be a positive integer")
    if not 0.0 < test_fraction < 1.0:
        raise InvalidParameter("test_fraction must lie in (0, 1)")
    errors = np.full(int(R), np.nan)
    failures = {}

    def job(r):
        try:
            return r, run_replication(spec, ds, r, test_fraction, seed, transform, scale_mode), None
        except BigtaxError as exc:
            return r, np.nan, f"{type(exc).__name__}: {exc}"

    rs = range(1, int(R) + 1)
    if n_jobs and n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(job, rs))
    else:
        results = [job(r) for r in rs]
    for r, e, msg in results:
        errors[r - 1] = e
        if msg is not None:
            failures[r] = msg
    params = dict(spec.params, transform=transform or "none", scale_mode=scale_mode)
    return EvalEntry(dataset_name, spec.name, errors, int(R), float(test_fraction),
                     _seed_tuple(seed), params, failures)


def loocv(spec: LearnerSpec, ds) -> float:
    """Leave-one-out misclassification rate with a refit per held-out row.

    kNN with a fixed k uses one distance matrix; the neighbour ranking of the
    remaining rows is unchanged by deleting a row, so the result is exact.
    """
    counts = ds.class_counts()
    for i in range(ds.n if spec.method in NEEDS_EVERY_CLASS else 0):
        if counts[ds.labels[i] - 1] == 1:
            raise DegenerateSplit(f"holding out row {i} removes class {ds.labels[i]} entirely")
    k = spec.get("k", "loocv")
    if spec.method == "knn" and k != "loocv":
        k = int(k)
        return loocv_errors(ds, [k], parse_distance(spec.get("distance", "euclidean")))[k]
    wrong = 0
    for i in range(ds.n):
        keep = np.r_[0:i, i + 1:ds.n]
        try:
            model = fit_from_spec(spec, ds.take(keep), seed=(0, i))
        except BigtaxError as exc:
            raise FitError(f"fold {i}: {exc}", index=i) from exc
        wrong += int(model.predict(ds.values[i])[0] != ds.labels[i])
    return wrong / ds.n


def select_k(ds, ks, spec="euclidean", criterion="loocv"):
    """k with the smallest criterion value (ties to the smallest k) and the score table.

    ``criterion`` is ``"loocv"`` or ``("replicate", R, test_fraction, seed)``.
    """
    ks = sorted({int(k) for k in ks})
    if not ks:
        raise InvalidParameter("empty candidate set")
    distance = parse_distance(spec) if isinstance(spec, str) else spec
    if criterion == "loocv":
        return select_k_loocv(ds, ks, distance)
    _, R, frac, seed = criterion
    table = {}
    for k in ks:
        entry = replicate_epe(LearnerSpec("knn", {"k": k, "distance": str(distance)}), ds, R, frac, seed)
        table[k] = entry.stats["mean"]
    return min(table, key=lambda k: (table[k], k)), table


def dataset_seed(seed, name: str) -> tuple:
    """Per-dataset stream shared by every method, so methods see the same splits."""
    return (*_seed_tuple(seed), zlib.crc32(name.encode()))


def benchmark(datasets, specs, R=100, test_fraction=1 / 3, seed=42, transform="standardize",
              scale_mode="sd", n_jobs=1, progress=None) -> EvalReport:
    """Every method on every dataset.  ``datasets`` maps names to Datasets.

    ``specs`` holds LearnerSpecs, or (name, reason) pairs for methods that
    could not be built; those are recorded as skipped.
    """
    report = EvalReport(config={
        "R": R, "test_fraction": test_fraction, "seed": list(_seed_tuple(seed)),
        "transform": transform, "scale_mode": scale_mode,
    })
    for name, ds in datasets.items():
        dseed = dataset_seed(seed, name)
        for spec in specs:
            if not isinstance(spec, LearnerSpec):
                label, reason = spec
                entry = EvalEntry(name, label, np.full(R, np.nan), R, test_fraction, dseed,
                                  {}, {}, reason)
                report.entries.append(entry)
                if progress:
                    progress(entry)
                continue
            entry = replicate_epe(spec, ds, R, test_fraction, dseed, transform, scale_mode,
                                  dataset_name=name, n_jobs=n_jobs)
            if len(entry.failures) == R:
                entry.skipped = next(iter(entry.failures.values()))
            report.entries.append(entry)
            if progress:
                progress(entry)
    return report


BENCH_DEFAULTS = {
    "lda": LearnerSpec("lda", {"regularization": "convex", "value": 0.1}),
    "lda_plain": LearnerSpec("lda", {"regularization": "none"}, "lda_plain"),
    "knn": LearnerSpec("knn", {"k": "loocv", "ks": list(range(1, 26, 2)), "distance": "euclidean"}),
    "svm": LearnerSpec("svm", {"kernel": "rbf", "tau": "median", "lam": "1/n"}),
    "logistic": LearnerSpec("logistic", {"penalty": "none"}),
    "logistic_lasso": LearnerSpec("logistic", {"penalty": "lasso", "lam": 0.01}, "logistic_lasso"),
    "klr": LearnerSpec("klr", {"kernel": "rbf", "tau": "median", "lam": "1/n"}),
    "cart": LearnerSpec("tree", {"max_depth": 10, "min_leaf": 5}, "cart"),
    "rforest": LearnerSpec("rforest", {"B": 100, "feature_subsample": "sqrt",
                                       "max_depth": 10, "min_leaf": 5}),
}
BENCH_DEFAULTS["tree"] = BENCH_DEFAULTS["cart"]
DEFAULT_METHODS = ("lda", "lda_plain", "logistic", "cart", "knn", "svm", "rforest")


def parse_methods(text: str) -> list:
    """LearnerSpecs for comma-separated method names; unknown names become (name, reason)."""
    out = []
    for name in (t.strip() for t in text.split(",")):
        if not name:
            continue
        spec = BENCH_DEFAULTS.get(name)
        out.append(spec if spec is not None else (name, f"unknown method {name!r}"))
    return out
