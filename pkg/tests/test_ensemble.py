import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bigtax.dataset import from_arrays
from bigtax.ensemble import (
    EnsembleModel, LearnerSpec, bag, bag_regression, bootstrap_draw, fit_from_spec,
    predict_ensemble, weighted_aggregate,
)
from bigtax.errors import FitError, InvalidParameter
from bigtax.learners import ConstantRegressor, fit_knn, fit_tree
from bigtax.serialize import dumps
from conftest import two_gaussians

TREE = LearnerSpec("tree", {"max_depth": 3, "min_leaf": 2})


def _ds(seed=0, n=60):
    return two_gaussians(n, [1.5, 0.0], np.random.default_rng(seed))


class Fixed:
    """Stub member that predicts one class everywhere."""

    def __init__(self, label, g=2):
        self.label, self.g = label, g

    def predict(self, X):
        return np.full(np.atleast_2d(X).shape[0], self.label)


def test_b1_equals_base_learner_on_bootstrap():
    ds = _ds()
    ens = bag(TREE, ds, 1, 7)
    idx, _ = bootstrap_draw(ds.n, ds.p, 7, 1)
    base = fit_tree(ds.take(idx), 3, 2)
    np.testing.assert_array_equal(ens.predict(ds.values), base.predict(ds.values))


def test_unanimous_vote():
    ens = weighted_aggregate([Fixed(2)] * 3, [1 / 3] * 3)
    label, dist = predict_ensemble(ens, [[0.0]])
    assert label[0] == 2
    np.testing.assert_allclose(dist, [[0, 1]])


def test_majority_and_ties():
    assert weighted_aggregate([Fixed(1), Fixed(1), Fixed(2)], [1 / 3] * 3).predict([[0.0]])[0] == 1
    assert weighted_aggregate([Fixed(1), Fixed(2)], [0.5, 0.5]).predict([[0.0]])[0] == 1
    assert weighted_aggregate([Fixed(2), Fixed(1)], [0.5, 0.5]).predict([[0.0]])[0] == 1


def test_weighted_vote():
    ens = weighted_aggregate([Fixed(2), Fixed(1), Fixed(1)], [0.6, 0.2, 0.2])
    label, dist = ens.predict_with_votes([[0.0]])
    assert label[0] == 2
    np.testing.assert_allclose(dist, [[0.4, 0.6]], atol=1e-12)


def test_degenerate_weights_follow_first_member():
    ds = _ds()
    a, b = fit_knn(ds, 1), fit_tree(ds, 1, 1)
    ens = weighted_aggregate([a, b], [1.0, 0.0])
    Q = np.random.default_rng(1).normal(size=(40, 2)) * 2
    np.testing.assert_array_equal(ens.predict(Q), a.predict(Q))


@pytest.mark.parametrize("w", [[0.5, 0.4], [1.2, -0.2], [1.0]])
def test_rejects_non_convex(w):
    with pytest.raises(InvalidParameter):
        weighted_aggregate([Fixed(1), Fixed(2)], w)


def test_uniform_weights_match_bag_vote():
    ds = _ds()
    ens = bag(TREE, ds, 9, 3)
    again = weighted_aggregate(ens.members, np.full(9, 1 / 9))
    np.testing.assert_array_equal(again.predict(ds.values), ens.predict(ds.values))


def test_regression_mean_of_constants():
    ens = weighted_aggregate([ConstantRegressor(2.5)] * 4, [0.25] * 4, task="regression")
    value, members = predict_ensemble(ens, np.zeros((3, 1)))
    np.testing.assert_allclose(value, 2.5)
    assert members.shape == (3, 4)


def test_bag_regression_constant_target():
    x = np.linspace(0, 1, 20)
    for method in ("mean", "ols"):
        ens = bag_regression(method, x, np.full(20, 4.0), 10, 1)
        np.testing.assert_allclose(ens.predict(x[:, None]), 4.0, atol=1e-9)


def test_bag_regression_ols_recovers_line():
    x = np.linspace(0, 1, 30)
    ens = bag_regression("ols", x, 1 + 2 * x, 5, 0)
    np.testing.assert_allclose(ens.predict(np.array([[0.5]])), 2.0, atol=1e-9)


def test_vote_distribution():
    ds = _ds()
    ens = bag(TREE, ds, 11, 5)
    label, dist = ens.predict_with_votes(ds.values)
    np.testing.assert_allclose(dist.sum(1), 1, atol=1e-12)
    P = ens.member_predictions(ds.values)
    np.testing.assert_allclose(dist[:, 1], (P == 2).mean(0), atol=1e-12)


def test_feature_subsample():
    rng = np.random.default_rng(0)
    ds = from_arrays(rng.normal(size=(40, 9)), rng.integers(1, 3, 40))
    ens = bag(TREE, ds, 6, 2, feature_subsample="sqrt")
    assert all(len(f) == 3 for f in ens.feature_sets)
    assert ens.predict(ds.values).shape == (40,)
    with pytest.raises(InvalidParameter):
        bag(TREE, ds, 2, 2, feature_subsample=10)


def test_deterministic_across_threads():
    ds = _ds(n=80)
    docs = {dumps(bag(TREE, ds, 12, 99, n_jobs=j)) for j in (1, 1, 4)}
    assert len(docs) == 1
    assert dumps(bag(TREE, ds, 12, 98)) not in docs


def test_member_failure_carries_index():
    # three rows of class 1, one of class 2: some resample loses class 2 and LDA fails
    ds = from_arrays([[0.0], [1.0], [2.0], [3.0], [4.0]], [1, 1, 1, 2, 2])
    with pytest.raises(FitError) as info:
        bag(LearnerSpec("lda"), ds, 50, 0)
    assert info.value.index >= 1


def test_invalid_B():
    with pytest.raises(InvalidParameter):
        bag(TREE, _ds(), 0, 1)


@settings(max_examples=15)
@given(st.integers(0, 10**6))
def test_vote_floor(seed):
    ds = _ds(seed, n=40)
    ens = bag(TREE, ds, 7, seed)
    P = ens.member_predictions(ds.values)
    right = (P == ds.labels[None, :])
    votes = ens.scores(ds.values)[np.arange(ds.n), ds.labels - 1]
    np.testing.assert_allclose(votes, right.mean(0), atol=1e-12)
    assert np.all(votes + 1e-12 >= right.min(0))


def test_variance_reduction():
    rng = np.random.default_rng(2024)
    single, bagged = [], []
    for d in range(50):
        train = two_gaussians(100, [1.0, 1.0], rng)
        # large test sets keep binomial noise below the estimator variance
        test = two_gaussians(5000, [1.0, 1.0], rng)
        t = fit_tree(train, 10, 1)
        b = bag(LearnerSpec("tree", {"max_depth": 10, "min_leaf": 1}), train, 50, (2024, d))
        single.append(np.mean(t.predict(test.values) != test.labels))
        bagged.append(np.mean(b.predict(test.values) != test.labels))
    assert np.var(bagged, ddof=1) <= np.var(single, ddof=1)


def test_ensemble_requires_member():
    with pytest.raises(InvalidParameter):
        EnsembleModel((), np.array([]))


def test_rforest_spec():
    ds = _ds()
    m = fit_from_spec(LearnerSpec("rforest", {"B": 5, "min_leaf": 1}), ds, seed=4)
    assert m.B == 5 and len(m.feature_sets) == 5
