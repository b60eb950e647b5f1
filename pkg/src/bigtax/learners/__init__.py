"""Classifiers sharing one prediction interface, plus the Gaussian Bayes risk."""
from __future__ import annotations

import math

import numpy as np

from ..errors import InvalidParameter
from .klr import KlrModel, fit_klr
from .knn import KnnModel, fit_knn, loocv_errors
from .lda import LdaModel, Regularization, fit_lda
from .logistic import LogisticModel, fit_logistic, lasso_lambda_max
from .regression import ConstantRegressor, LinearRegressor, fit_mean, fit_ols
from .svm import SolverOptions, SvmModel, fit_svm, kkt_residuals
from .tree import TreeModel, fit_tree

MODEL_TYPES = {
    "lda": LdaModel,
    "knn": KnnModel,
    "svm": SvmModel,
    "logistic": LogisticModel,
    "klr": KlrModel,
    "tree": TreeModel,
    "constant": ConstantRegressor,
    "ols": LinearRegressor,
}


def predict(model, x):
    """Label(s) and per-model scores for one row or a matrix of rows.

    Scores: LDA discriminants, kNN neighbour fractions, SVM decision values,
    logistic/KLR probabilities of class 2, tree leaf frequencies.  Ensembles
    return their vote distribution.
    """
    X = np.asarray(x, dtype=float)
    single = X.ndim == 1
    if hasattr(model, "predict_with_votes"):
        labels, scores = model.predict_with_votes(X)
    else:
        labels, scores = model.predict(X), model.scores(X)
    if single:
        return int(labels[0]), scores[0]
    return labels, scores


def bayes_risk(mu0, mu1, sigma) -> float:
    """Phi(-sqrt(Delta)/2) with Delta the Mahalanobis separation of the means."""
    mu0 = np.atleast_1d(np.asarray(mu0, dtype=float))
    mu1 = np.atleast_1d(np.asarray(mu1, dtype=float))
    S = np.atleast_2d(np.asarray(sigma, dtype=float))
    if S.shape != (mu0.size, mu0.size) or mu1.shape != mu0.shape:
        raise InvalidParameter("dimension mismatch between means and covariance")
    if not np.allclose(S, S.T, rtol=0, atol=1e-12 * max(1.0, np.abs(S).max())):
        raise InvalidParameter("covariance must be symmetric")
    try:
        L = np.linalg.cholesky(S)
    except np.linalg.LinAlgError as exc:
        raise InvalidParameter("covariance must be positive definite") from exc
    z = np.linalg.solve(L, mu1 - mu0)
    delta = float(z @ z)
    # Phi(-t) = erfc(t / sqrt 2) / 2
    return 0.5 * math.erfc(math.sqrt(delta) / 2.0 / math.sqrt(2.0))


__all__ = [
    "KlrModel", "KnnModel", "LdaModel", "LogisticModel", "SvmModel", "TreeModel",
    "ConstantRegressor", "LinearRegressor", "Regularization", "SolverOptions", "MODEL_TYPES",
    "fit_klr", "fit_knn", "fit_lda", "fit_logistic", "fit_svm", "fit_tree", "fit_mean", "fit_ols",
    "loocv_errors", "lasso_lambda_max", "kkt_residuals", "predict", "bayes_risk",
]
