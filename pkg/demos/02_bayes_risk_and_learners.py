"""Five classifiers on a two-Gaussian problem whose Bayes risk is known exactly.

    python3 demos/02_bayes_risk_and_learners.py
"""
import numpy as np

from bigtax.dataset import from_arrays
from bigtax.ensemble import LearnerSpec, fit_from_spec
from bigtax.learners import bayes_risk


def two_gaussians(n, delta, rng):
    y = np.where(np.arange(n) % 2 == 0, 1, 2)
    X = rng.standard_normal((n, len(delta))) + (y == 2)[:, None] * np.asarray(delta)
    return from_arrays(X, y)


rng = np.random.default_rng(0)
delta = [2.0, 0.0]
floor = bayes_risk([0, 0], delta, np.eye(2))
print(f"Bayes risk: {floor:.4f}\n")

test = two_gaussians(20000, delta, rng)
specs = [
    LearnerSpec("lda"),
    LearnerSpec("logistic"),
    LearnerSpec("knn", {"k": "loocv"}),
    LearnerSpec("svm", {"kernel": "rbf", "tau": "median", "lam": "1/n"}),
    LearnerSpec("tree"),
    LearnerSpec("rforest", {"B": 50}),
]
for n_train in (100, 1000):
    train = two_gaussians(n_train, delta, rng)
    print(f"n_train = {n_train}")
    for spec in specs:
        model = fit_from_spec(spec, train, seed=1)
        err = np.mean(model.predict(test.values) != test.labels)
        print(f"    {spec.name:<9} test error {err:.4f}  (excess {err - floor:+.4f})")
