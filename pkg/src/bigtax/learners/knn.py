"""k-nearest-neighbour classification with pluggable distances."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..dataset import ColumnSchema, encoded_columns
from ..errors import InvalidParameter
from ..metrics import DistanceSpec, distances_to, pairwise, parse_distance
from ._common import as_rows, features


def _remap(spec: DistanceSpec, colmap) -> DistanceSpec:
    """Translate hybrid column groups from dataset columns to encoded columns."""
    if spec.name != "hybrid":
        return spec
    c1 = tuple(e for c in spec.columns1 for e in colmap[c])
    c2 = tuple(e for c in spec.columns2 for e in colmap[c])
    return DistanceSpec(
        "hybrid", _remap(spec.d1, colmap), _remap(spec.d2, colmap), c1, c2, spec.mode, spec.alpha
    )


@dataclass(frozen=True, eq=False)
class KnnModel:
    schema: tuple
    k: int
    spec: DistanceSpec
    X: np.ndarray        # encoded training rows
    y: np.ndarray
    g: int

    kind = "knn"

    @property
    def encoded_spec(self):
        return _remap(self.spec, encoded_columns(self.schema))

    def neighbours(self, x) -> np.ndarray:
        """Indices of the k nearest training rows, ties broken by row index."""
        d = distances_to(self.encoded_spec, self.X, x)
        return np.argsort(d, kind="stable")[: self.k]

    def scores(self, X) -> np.ndarray:
        """Per-class neighbour fractions p_j, shape (m, g)."""
        Z = as_rows(self, X, drop_first=False)
        D = pairwise(self.encoded_spec, Z, self.X)
        idx = np.argsort(D, axis=1, kind="stable")[:, : self.k]
        votes = self.y[idx]
        counts = np.stack([(votes == j).sum(axis=1) for j in range(1, self.g + 1)], axis=1)
        return counts / self.k

    def predict(self, X) -> np.ndarray:
        # argmax returns the first maximum, i.e. the smallest class on a tie
        return np.argmax(self.scores(X), axis=1) + 1

    def to_dict(self):
        return {
            "schema": [c.to_dict() for c in self.schema],
            "k": self.k,
            "distance": str(self.spec),
            "X": self.X.tolist(),
            "y": self.y.tolist(),
            "g": self.g,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            tuple(ColumnSchema.from_dict(c) for c in d["schema"]),
            int(d["k"]),
            parse_distance(d["distance"]),
            np.array(d["X"], dtype=float),
            np.array(d["y"], dtype=np.int64),
            int(d["g"]),
        )


def fit_knn(ds, k: int, spec: DistanceSpec | str = "euclidean") -> KnnModel:
    if isinstance(spec, str):
        spec = parse_distance(spec)
    if int(k) != k or not 1 <= k <= ds.n:
        raise InvalidParameter(f"k must lie in 1..{ds.n}, got {k}")
    if spec.name == "hybrid":
        covered = set(spec.columns1) | set(spec.columns2)
        if covered != set(range(ds.p)):
            raise InvalidParameter("hybrid column groups must cover every column exactly once")
    X = features(ds, drop_first=False)
    return KnnModel(ds.schema, int(k), spec, X, ds.labels.copy(), ds.g)


def loocv_errors(ds, ks, spec: DistanceSpec | str = "euclidean") -> dict:
    """Leave-one-out error rate for every k in ``ks`` from one distance matrix.

    Removing row i does not change the relative order of the remaining rows,
    so the stable sort of row i's distances (self excluded) gives exactly the
    neighbourhoods a refit without row i would use.
    """
    if isinstance(spec, str):
        spec = parse_distance(spec)
    ks = sorted({int(k) for k in ks})
    if not ks or ks[0] < 1 or ks[-1] > ds.n - 1:
        raise InvalidParameter(f"every k must lie in 1..{ds.n - 1} for leave-one-out")
    X = features(ds, drop_first=False)
    enc = _remap(spec, encoded_columns(ds.schema))
    D = pairwise(enc, X, X)
    np.fill_diagonal(D, np.inf)
    order = np.argsort(D, axis=1, kind="stable")[:, : ks[-1]]
    votes = ds.labels[order]
    # cumulative vote counts per class along the neighbour ranking
    cum = np.stack([np.cumsum(votes == j, axis=1) for j in range(1, ds.g + 1)], axis=2)
    out = {}
    for k in ks:
        pred = np.argmax(cum[:, k - 1, :], axis=1) + 1
        out[k] = float(np.mean(pred != ds.labels))
    return out
