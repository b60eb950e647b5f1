"""Classification trees grown greedily on weighted Gini impurity.

Numeric columns split at midpoints between consecutive distinct values
(``x <= t`` goes left); categorical columns split on membership of a single
level (``x == level`` goes left).  Growth stops at ``max_depth``, when a
child would hold fewer than ``min_leaf`` rows, or when a node is pure.
Each leaf predicts its most frequent class, the smallest class on ties.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..dataset import ColumnSchema, VariableKind
from ..errors import InvalidParameter, MissingValues, SchemaError

LEAF = -1


@dataclass(frozen=True, eq=False)
class TreeModel:
    schema: tuple
    g: int
    feature: np.ndarray      # split column per node, LEAF for leaves
    threshold: np.ndarray    # numeric threshold or category code
    categorical: np.ndarray  # True when the node tests x == threshold
    left: np.ndarray
    right: np.ndarray
    counts: np.ndarray       # (nodes, g) training class counts

    kind = "tree"

    @property
    def n_leaves(self) -> int:
        return int(np.sum(self.feature == LEAF))

    @property
    def leaf_labels(self) -> np.ndarray:
        return np.argmax(self.counts, axis=1) + 1

    def apply(self, X) -> np.ndarray:
        """Index of the leaf each row of ``X`` falls in."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != len(self.schema):
            raise SchemaError(f"model expects {len(self.schema)} columns, got {X.shape[1]}")
        if np.isnan(X).any():
            raise MissingValues("query rows contain missing cells")
        node = np.zeros(X.shape[0], dtype=np.int64)
        rows = np.arange(X.shape[0])
        while True:
            f = self.feature[node[rows]]
            inner = f != LEAF
            if not inner.any():
                return node
            rows = rows[inner]
            nd = node[rows]
            f = self.feature[nd]
            val = X[rows, f]
            thr = self.threshold[nd]
            go_left = np.where(self.categorical[nd], val == thr, val <= thr)
            node[rows] = np.where(go_left, self.left[nd], self.right[nd])

    def predict(self, X) -> np.ndarray:
        return self.leaf_labels[self.apply(X)]

    def scores(self, X) -> np.ndarray:
        """Training class frequencies of the leaf each row lands in."""
        c = self.counts[self.apply(X)]
        return c / c.sum(axis=1, keepdims=True)

    def to_dict(self):
        return {
            "schema": [c.to_dict() for c in self.schema],
            "g": self.g,
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "categorical": self.categorical.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "counts": self.counts.tolist(),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            tuple(ColumnSchema.from_dict(c) for c in d["schema"]), int(d["g"]),
            np.array(d["feature"], dtype=np.int64), np.array(d["threshold"], dtype=float),
            np.array(d["categorical"], dtype=bool), np.array(d["left"], dtype=np.int64),
            np.array(d["right"], dtype=np.int64),
            np.array(d["counts"], dtype=np.int64).reshape(len(d["feature"]), int(d["g"])),
        )


def _best_numeric(Xn, yn, cols, g, min_leaf):
    """Best midpoint split over the numeric columns ``cols``; (score, col, thr) or None."""
    m = Xn.shape[0]
    sub = Xn[:, cols]
    order = np.argsort(sub, axis=0, kind="stable")
    xs = np.take_along_axis(sub, order, axis=0)
    ys = yn[order]
    n_left = np.arange(1, m)[:, None]
    n_right = m - n_left
    left_sq = np.zeros((m - 1, len(cols)))
    right_sq = np.zeros((m - 1, len(cols)))
    for c in range(1, g + 1):
        cum = np.cumsum(ys == c, axis=0)
        cl = cum[:-1]
        cr = cum[-1] - cl
        left_sq += cl * cl
        right_sq += cr * cr
    score = left_sq / n_left + right_sq / n_right
    valid = (xs[:-1] < xs[1:]) & (n_left >= min_leaf) & (n_right >= min_leaf)
    if not valid.any():
        return None
    score = np.where(valid, score, -np.inf).T  # (cols, positions): column-major tie order
    k = int(np.argmax(score))
    ci, pos = divmod(k, m - 1)
    lo, hi = xs[pos, ci], xs[pos + 1, ci]
    thr = 0.5 * (lo + hi)
    if not lo <= thr < hi:
        thr = lo
    return float(score[ci, pos]), cols[ci], float(thr)


def _best_categorical(Xn, yn, cols, g, min_leaf):
    m = Xn.shape[0]
    best = None
    for col in cols:
        x = Xn[:, col]
        for level in np.unique(x):
            mask = x == level
            nl = int(mask.sum())
            nr = m - nl
            if nl < min_leaf or nr < min_leaf:
                continue
            cl = np.bincount(yn[mask], minlength=g + 1)[1:].astype(float)
            cr = np.bincount(yn[~mask], minlength=g + 1)[1:].astype(float)
            score = (cl @ cl) / nl + (cr @ cr) / nr
            if best is None or score > best[0]:
                best = (float(score), col, float(level))
    return best


def fit_tree(ds, max_depth: int = 10, min_leaf: int = 5) -> TreeModel:
    if min_leaf < 1:
        raise InvalidParameter("min_leaf must be at least 1")
    if max_depth < 0:
        raise InvalidParameter("max_depth must be non-negative")
    if ds.n < min_leaf:
        raise InvalidParameter(f"n={ds.n} is smaller than min_leaf={min_leaf}")
    X = np.asarray(ds.values)
    if np.isnan(X).any():
        raise MissingValues("impute missing cells before fitting")
    y = np.asarray(ds.labels)
    g = ds.g
    cat_cols = [j for j, c in enumerate(ds.schema) if c.kind is VariableKind.CATEGORICAL]
    num_cols = [j for j in range(ds.p) if j not in cat_cols]

    feature, threshold, categorical, left, right, counts = [], [], [], [], [], []

    def new_node(cnt):
        feature.append(LEAF)
        threshold.append(0.0)
        categorical.append(False)
        left.append(LEAF)
        right.append(LEAF)
        counts.append(cnt)
        return len(feature) - 1

    root = new_node(np.bincount(y, minlength=g + 1)[1:])
    stack = [(root, np.arange(ds.n), 0)]
    while stack:
        node, idx, depth = stack.pop()
        cnt = counts[node]
        if depth >= max_depth or idx.size < 2 * min_leaf or np.count_nonzero(cnt) <= 1:
            continue
        Xn, yn = X[idx], y[idx]
        best = _best_numeric(Xn, yn, num_cols, g, min_leaf) if num_cols else None
        if cat_cols:
            cb = _best_categorical(Xn, yn, cat_cols, g, min_leaf)
            if cb is not None and (best is None or cb[0] > best[0] or (cb[0] == best[0] and cb[1] < best[1])):
                best = (cb[0], cb[1], cb[2], True)
        if best is None:
            continue
        is_cat = len(best) == 4
        _, col, thr = best[:3]
        go_left = (Xn[:, col] == thr) if is_cat else (Xn[:, col] <= thr)
        li, ri = idx[go_left], idx[~go_left]
        feature[node], threshold[node], categorical[node] = col, thr, is_cat
        left[node] = new_node(np.bincount(y[li], minlength=g + 1)[1:])
        right[node] = new_node(np.bincount(y[ri], minlength=g + 1)[1:])
        # right pushed first so the left subtree is expanded first (preorder ids)
        stack.append((right[node], ri, depth + 1))
        stack.append((left[node], li, depth + 1))

    return TreeModel(
        ds.schema, g,
        np.array(feature, dtype=np.int64), np.array(threshold, dtype=float),
        np.array(categorical, dtype=bool), np.array(left, dtype=np.int64),
        np.array(right, dtype=np.int64), np.array(counts, dtype=np.int64).reshape(-1, g),
    )
