import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bigtax.dataset import from_arrays, split
from bigtax.ensemble import LearnerSpec, fit_from_spec
from bigtax.errors import DegenerateSplit, InvalidParameter, SchemaError
from bigtax.evaluation import (
    EvalReport, benchmark, epe, loocv, parse_methods, replicate_epe, run_replication,
    select_k, summarize,
)
from bigtax.learners import fit_knn, fit_lda, fit_tree
from conftest import two_gaussians
from oracles import knn_loocv, refit_loocv

LOOCV_SPECS = [
    LearnerSpec("lda"),
    LearnerSpec("lda", {"regularization": "convex", "value": 0.1}),
    LearnerSpec("knn", {"k": 3}),
    LearnerSpec("knn", {"k": "loocv", "ks": [1, 3, 5]}),
    LearnerSpec("svm", {"kernel": "linear", "lam": 0.1, "max_iter": 300}),
    LearnerSpec("svm", {"kernel": "rbf", "tau": "median", "lam": "1/n"}),
    LearnerSpec("logistic"),
    LearnerSpec("logistic", {"penalty": "lasso", "lam": 0.02}),
    LearnerSpec("klr", {"kernel": "rbf", "tau": 1.0, "lam": 0.1}),
    LearnerSpec("tree", {"max_depth": 3, "min_leaf": 2}),
    LearnerSpec("rforest", {"B": 5, "min_leaf": 2}),
]


def random_small(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(12, 31))
    y = np.where(np.arange(n) % 2 == 0, 1, 2)
    X = rng.normal(size=(n, 2)) + (y == 2)[:, None] * rng.normal(1.0, 0.5, size=2)
    return from_arrays(rng.permutation(X), y)


def loocv_oracle(spec, ds):
    if spec.method == "knn" and spec.get("k") != "loocv":
        return knn_loocv(ds.values, ds.labels, int(spec.get("k")), ds.g)
    return refit_loocv(lambda train, i: fit_from_spec(spec, train, seed=(0, i)), ds)


# --- epe ---------------------------------------------------------------------

class Const:
    schema = None

    def __init__(self, label):
        self.label = label

    def predict(self, X):
        return np.full(np.atleast_2d(X).shape[0], self.label)


def test_epe_examples():
    ds = from_arrays(np.arange(10.0)[:, None], [1] * 5 + [2] * 5)
    assert epe(fit_knn(ds, 1), ds) == 0
    assert epe(Const(1), ds) == 0.5
    wrong3 = from_arrays(np.arange(10.0)[:, None], [2, 2, 2] + [1] * 7)
    assert epe(Const(1), wrong3) == pytest.approx(0.3)


def test_epe_schema_mismatch():
    ds = from_arrays(np.zeros((4, 2)), [1, 2, 1, 2])
    other = from_arrays(np.zeros((4, 2)), [1, 2, 1, 2], names=["a", "b"])
    with pytest.raises(SchemaError):
        epe(fit_knn(ds, 1), other)


# --- replication ---------------------------------------------------------------

def test_replicate_deterministic():
    ds = two_gaussians(90, [1.0, 0.5], np.random.default_rng(0))
    spec = LearnerSpec("lda")
    a = replicate_epe(spec, ds, 10, 1 / 3, 5)
    b = replicate_epe(spec, ds, 10, 1 / 3, 5, n_jobs=3)
    np.testing.assert_array_equal(a.errors, b.errors)
    assert a.to_dict() == b.to_dict()


@pytest.mark.parametrize("R", [0, -1, 2.5])
def test_replicate_bad_R(R):
    with pytest.raises(InvalidParameter):
        replicate_epe(LearnerSpec("lda"), two_gaussians(30, [1, 0], np.random.default_rng(0)), R)


def test_seed_hygiene():
    ds = two_gaussians(60, [1.0, 0.5], np.random.default_rng(1))
    spec = LearnerSpec("knn", {"k": 3})
    entry = replicate_epe(spec, ds, 8, 0.25, 11)
    reversed_order = [run_replication(spec, ds, r, 0.25, 11) for r in range(8, 0, -1)]
    np.testing.assert_array_equal(entry.errors, reversed_order[::-1])


def test_summary_recomputable():
    ds = two_gaussians(60, [1.0, 0.0], np.random.default_rng(2))
    e = replicate_epe(LearnerSpec("tree", {"min_leaf": 2}), ds, 12, 1 / 3, 3)
    assert np.all((e.errors >= 0) & (e.errors <= 1))
    s = e.stats
    assert s["mean"] == pytest.approx(np.mean(e.errors), abs=1e-12)
    assert s["sd"] == pytest.approx(np.std(e.errors, ddof=1), abs=1e-12)
    assert s["median"] == pytest.approx(np.median(e.errors), abs=1e-12)
    q = sorted(e.errors)
    # linear interpolation: position (m - 1) * 0.25 = 2.75
    assert s["q1"] == pytest.approx(q[2] + 0.75 * (q[3] - q[2]), abs=1e-12)


def test_summarize_ignores_failed_runs():
    s = summarize([0.1, np.nan, 0.3])
    assert s["mean"] == pytest.approx(0.2)
    assert np.isnan(summarize([np.nan])["mean"])


def test_failures_recorded():
    ds = from_arrays(np.random.default_rng(0).normal(size=(12, 20)), [1, 2] * 6)
    e = replicate_epe(LearnerSpec("lda"), ds, 3, 1 / 3, 1)
    assert not e.complete and set(e.failures) == {1, 2, 3}
    assert "SingularCovariance" in e.failures[1]


def test_majority_predictor_matches_minority_fraction():
    rng = np.random.default_rng(3)
    ds = from_arrays(rng.normal(size=(150, 1)), [1] * 100 + [2] * 50)
    e = replicate_epe(LearnerSpec("tree", {"max_depth": 0}), ds, 100, 1 / 3, 4, transform="none")
    minority = []
    for r in range(1, 101):
        _, test = split(ds, 1 / 3, [*e.seed, r])
        minority.append(np.mean(test.labels == 2))
    se = np.std(e.errors, ddof=1) / np.sqrt(100)
    assert abs(np.mean(e.errors) - np.mean(minority)) <= 3 * se + 1e-12


def test_empirical_risk_consistency():
    rng = np.random.default_rng(5)
    test = two_gaussians(20000, [2.0, 0.0], rng)
    means = []
    for n_train in (200, 2000):
        errs = []
        for _ in range(10):
            m = fit_lda(two_gaussians(n_train, [2.0, 0.0], rng))
            errs.append(np.mean(m.predict(test.values) != test.labels))
        means.append(np.mean(errs))
    assert means[1] <= means[0]
    assert abs(means[1] - 0.15866) <= 0.02


# --- loocv -------------------------------------------------------------------

def test_loocv_two_points():
    assert loocv(LearnerSpec("knn", {"k": 1}), from_arrays([[0.0], [1.0]], [1, 2])) == 1.0


def test_loocv_separated_pairs():
    ds = from_arrays([[0.0], [0.1], [5.0], [5.1]], [1, 1, 2, 2])
    assert loocv(LearnerSpec("knn", {"k": 1}), ds) == 0
    assert loocv(LearnerSpec("knn", {"k": 1, "distance": "manhattan"}), ds) == 0


def test_loocv_degenerate_fold():
    ds = from_arrays([[0.0], [1.0], [2.0]], [1, 1, 2])
    with pytest.raises(DegenerateSplit, match="row 2"):
        loocv(LearnerSpec("logistic"), ds)


@pytest.mark.parametrize("spec", LOOCV_SPECS, ids=lambda s: f"{s.method}-{len(s.params)}")
@pytest.mark.parametrize("seed", range(3))
def test_loocv_matches_refit_oracle(spec, seed):
    ds = random_small(seed)
    assert loocv(spec, ds) == loocv_oracle(spec, ds)


# --- select_k ----------------------------------------------------------------

def test_select_k_tie_and_table():
    ds = from_arrays([[0.0], [0.1], [5.0], [5.1]], [1, 1, 2, 2])
    k, table = select_k(ds, [3, 1])
    assert k == 1 and set(table) == {1, 3}
    assert table[1] == 0


def test_select_k_radius_ball():
    rng = np.random.default_rng(2024)
    X = rng.uniform(-1, 1, size=(200, 2))
    y = np.where(np.linalg.norm(X, axis=1) < 0.7, 2, 1)
    flip = rng.random(200) < 0.2
    y[flip] = 3 - y[flip]
    k, table = select_k(from_arrays(X, y), range(1, 26, 2))
    assert k == 21
    assert table[k] < table[1]


def test_select_k_replicate_criterion():
    ds = two_gaussians(60, [2.0, 0.0], np.random.default_rng(0))
    k, table = select_k(ds, [1, 5, 9], criterion=("replicate", 5, 1 / 3, 1))
    assert k == min(table, key=lambda c: (table[c], c))


def test_select_k_empty():
    with pytest.raises(InvalidParameter):
        select_k(from_arrays([[0.0], [1.0]], [1, 2]), [])


# --- benchmark ---------------------------------------------------------------

def test_benchmark_cross_product():
    rng = np.random.default_rng(0)
    data = {f"d{i}": two_gaussians(40, [1.5, 0.0], rng) for i in range(3)}
    specs = [LearnerSpec("lda"), LearnerSpec("knn", {"k": 3}), LearnerSpec("tree"),
             LearnerSpec("logistic"), LearnerSpec("svm", {"kernel": "linear", "max_iter": 200})]
    report = benchmark(data, specs, R=4, seed=1)
    assert len(report.entries) == 15
    assert all(e.errors.shape == (4,) for e in report.entries)
    again = EvalReport.from_dict(json.loads(report.to_json()))
    assert again.to_json() == report.to_json()


def test_benchmark_unknown_method_skipped():
    specs = parse_methods("lda, bogus")
    report = benchmark({"d": two_gaussians(30, [1, 0], np.random.default_rng(0))}, specs, R=2)
    assert report.entry("d", "bogus").skipped == "unknown method 'bogus'"
    assert report.entry("d", "lda").complete


def test_methods_share_splits():
    ds = two_gaussians(60, [1.0, 0.0], np.random.default_rng(0))
    report = benchmark({"d": ds}, [LearnerSpec("lda"), LearnerSpec("knn", {"k": 1})], R=2)
    assert report.entries[0].seed == report.entries[1].seed
