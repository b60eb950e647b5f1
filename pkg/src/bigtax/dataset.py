"""Data model, CSV ingestion, missing values and column rescaling.

A :class:`Dataset` keeps every cell in one float matrix.  Numeric kinds hold
their value, categorical and ordinal columns hold the integer code of their
level (index into ``ColumnSchema.levels``) and ``NaN`` marks a missing cell.
"""
from __future__ import annotations

import csv
import errno
import json
import math
import os
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import (
    ConstantColumn,
    EmptyData,
    InvalidParameter,
    MissingValues,
    SchemaError,
)

MISSING_MARKERS = ("?", "")


class VariableKind(str, Enum):
    CATEGORICAL = "categorical"
    ORDINAL = "ordinal"
    INTERVAL = "interval"
    COUNT = "count"
    REAL = "real"
    BINARY = "binary"

    @property
    def numeric(self) -> bool:
        return self in NUMERIC_KINDS


NUMERIC_KINDS = frozenset(
    {VariableKind.INTERVAL, VariableKind.COUNT, VariableKind.REAL, VariableKind.BINARY}
)

# (n, p) of the public files used by the benchmark; load_csv checks these when
# the file name matches.
KNOWN_SHAPES = {
    "musk_clean1.csv": (476, 166),
    "pima.csv": (768, 8),
    "crabs.csv": (200, 5),
}


@dataclass(frozen=True)
class ColumnSchema:
    name: str
    kind: VariableKind
    levels: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "kind", VariableKind(self.kind))
        object.__setattr__(self, "levels", tuple(self.levels))
        if self.kind is VariableKind.ORDINAL and not self.levels:
            raise SchemaError(f"ordinal column {self.name!r} needs an explicit level ordering")

    def to_dict(self):
        d = {"name": self.name, "kind": self.kind.value}
        if self.levels:
            d["levels"] = list(self.levels)
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(d["name"], VariableKind(d["kind"]), tuple(d.get("levels", ())))


@dataclass(frozen=True, eq=False)
class Dataset:
    """An n x p table with per-column kinds and class labels in 1..g."""

    values: np.ndarray
    schema: tuple
    labels: np.ndarray
    g: int
    label_names: tuple = ()

    def __post_init__(self):
        values = np.array(self.values, dtype=float, ndmin=2)
        labels = np.asarray(self.labels, dtype=np.int64).ravel()
        schema = tuple(self.schema)
        n, p = values.shape
        if n < 1 or p < 1:
            raise EmptyData("a dataset needs at least one row and one column")
        if len(schema) != p:
            raise SchemaError(f"schema has {len(schema)} columns, data has {p}")
        names = [c.name for c in schema]
        if len(set(names)) != len(names):
            raise SchemaError("column names must be unique")
        if labels.shape[0] != n:
            raise SchemaError("one label per row is required")
        if self.g < 2:
            raise SchemaError("at least two classes are required")
        if labels.min() < 1 or labels.max() > self.g:
            raise SchemaError(f"labels must lie in 1..{self.g}")
        for j, col in enumerate(schema):
            _check_column(values[:, j], col)
        values.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "schema", schema)
        if not self.label_names:
            object.__setattr__(self, "label_names", tuple(str(j) for j in range(1, self.g + 1)))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]

    @property
    def names(self):
        return [c.name for c in self.schema]

    def take(self, rows) -> "Dataset":
        rows = np.asarray(rows)
        return replace(self, values=self.values[rows], labels=self.labels[rows])

    def select_columns(self, cols) -> "Dataset":
        cols = [int(c) for c in cols]
        return replace(
            self, values=self.values[:, cols], schema=tuple(self.schema[c] for c in cols)
        )

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.g + 1)[1:]

    def numeric_columns(self):
        return [j for j, c in enumerate(self.schema) if c.kind.numeric]


def _check_column(col, schema: ColumnSchema):
    obs = col[~np.isnan(col)]
    if obs.size == 0:
        return
    kind = schema.kind
    if kind is VariableKind.BINARY and not np.all((obs == 0) | (obs == 1)):
        raise SchemaError(f"binary column {schema.name!r} holds values other than 0/1")
    if kind is VariableKind.COUNT and not np.all((obs >= 0) & (obs == np.floor(obs))):
        raise SchemaError(f"count column {schema.name!r} holds non-count values")
    if kind in (VariableKind.CATEGORICAL, VariableKind.ORDINAL):
        if not np.all((obs >= 0) & (obs < len(schema.levels)) & (obs == np.floor(obs))):
            raise SchemaError(f"column {schema.name!r} holds codes outside its levels")
    if not np.all(np.isfinite(obs)):
        raise SchemaError(f"column {schema.name!r} holds non-finite values")


# ---------------------------------------------------------------------------
# feature encoding used by the numeric learners


def encoded_columns(schema, drop_first=False):
    """Map each dataset column to its slice of encoded columns.

    Numeric and ordinal columns keep one column; categorical columns expand
    to one indicator per level (minus the first level when ``drop_first``).
    """
    out, at = [], 0
    for col in schema:
        if col.kind is VariableKind.CATEGORICAL:
            width = len(col.levels) - (1 if drop_first else 0)
        else:
            width = 1
        out.append(list(range(at, at + width)))
        at += width
    return out


def encode(X, schema, drop_first=False) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    single = X.ndim == 1
    X = np.atleast_2d(X)
    if X.shape[1] != len(schema):
        raise SchemaError(f"expected {len(schema)} columns, got {X.shape[1]}")
    if all(c.kind is not VariableKind.CATEGORICAL for c in schema):
        out = X
    else:
        parts = []
        for j, col in enumerate(schema):
            if col.kind is VariableKind.CATEGORICAL:
                start = 1 if drop_first else 0
                levels = np.arange(start, len(col.levels))
                parts.append((X[:, j:j + 1] == levels[None, :]).astype(float))
            else:
                parts.append(X[:, j:j + 1])
        out = np.hstack(parts)
    return out[0] if single else out


# ---------------------------------------------------------------------------
# CSV


def _parse_float(text):
    try:
        v = float(text)
    except ValueError:
        return None
    return v if math.isfinite(v) else None


def _infer_kind(cells):
    observed = [c for c in cells if c not in MISSING_MARKERS]
    if not observed:
        return VariableKind.REAL
    nums = [_parse_float(c) for c in observed]
    if any(v is None for v in nums):
        return VariableKind.CATEGORICAL
    if all(v in (0.0, 1.0) for v in nums):
        return VariableKind.BINARY
    if all(v >= 0 and v == math.floor(v) for v in nums):
        return VariableKind.COUNT
    return VariableKind.REAL


def _sort_key(raw):
    v = _parse_float(raw)
    return (0, v, raw) if v is not None else (1, 0.0, raw)


def read_schema(path) -> list:
    with open(path) as fh:
        doc = json.load(fh)
    return [ColumnSchema.from_dict(c) for c in doc["columns"]]


def load_csv(path, label_column, schema=None, expect_shape=None) -> Dataset:
    """Read a comma-separated file with a header row into a :class:`Dataset`.

    ``schema`` is an optional JSON sidecar path (or a list of ColumnSchema);
    without it column kinds are inferred.  Cells equal to ``?`` or empty are
    missing.  Labels are re-encoded 1..g by sorted distinct raw value.
    """
    if not os.path.exists(path):
        raise FileNotFoundError(errno.ENOENT, "no such file", str(path))
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    if not rows:
        raise EmptyData(f"{path}: no header row")
    header, body = [h.strip() for h in rows[0]], rows[1:]
    if not body:
        raise EmptyData(f"{path}: header only, no data rows")
    if label_column not in header:
        raise SchemaError(f"label column {label_column!r} not in header")
    for i, r in enumerate(body):
        if len(r) != len(header):
            raise SchemaError(f"{path}: row {i + 2} has {len(r)} cells, header has {len(header)}")
    li = header.index(label_column)
    feat_idx = [j for j in range(len(header)) if j != li]
    columns = [[r[j].strip() for r in body] for j in feat_idx]

    if schema is None:
        cols = []
        for j, cells in zip(feat_idx, columns):
            kind = _infer_kind(cells)
            levels = ()
            if kind is VariableKind.CATEGORICAL:
                levels = tuple(sorted({c for c in cells if c not in MISSING_MARKERS}, key=_sort_key))
            cols.append(ColumnSchema(header[j], kind, levels))
    else:
        declared = read_schema(schema) if isinstance(schema, (str, os.PathLike)) else list(schema)
        by_name = {c.name: c for c in declared}
        cols = []
        for j, cells in zip(feat_idx, columns):
            if header[j] not in by_name:
                raise SchemaError(f"schema has no entry for column {header[j]!r}")
            c = by_name[header[j]]
            if c.kind is VariableKind.CATEGORICAL and not c.levels:
                levels = tuple(sorted({x for x in cells if x not in MISSING_MARKERS}, key=_sort_key))
                c = ColumnSchema(c.name, c.kind, levels)
            cols.append(c)

    values = np.empty((len(body), len(cols)))
    for j, (col, cells) in enumerate(zip(cols, columns)):
        for i, cell in enumerate(cells):
            if cell in MISSING_MARKERS:
                values[i, j] = np.nan
            elif col.kind in (VariableKind.CATEGORICAL, VariableKind.ORDINAL):
                if cell not in col.levels:
                    raise SchemaError(f"row {i + 2}: {cell!r} is not a level of {col.name!r}")
                values[i, j] = col.levels.index(cell)
            else:
                v = _parse_float(cell)
                if v is None:
                    raise SchemaError(f"row {i + 2}: {cell!r} is not numeric ({col.name!r})")
                values[i, j] = v

    raw = [r[li].strip() for r in body]
    if any(x in MISSING_MARKERS for x in raw):
        raise SchemaError("missing labels are not supported")
    distinct = sorted(set(raw), key=_sort_key)
    if len(distinct) < 2:
        raise SchemaError("need at least two distinct labels")
    code = {x: k + 1 for k, x in enumerate(distinct)}
    labels = np.array([code[x] for x in raw])

    ds = Dataset(values, tuple(cols), labels, len(distinct), tuple(distinct))
    if expect_shape is None:
        expect_shape = KNOWN_SHAPES.get(os.path.basename(path))
    if expect_shape is not None and (ds.n, ds.p) != tuple(expect_shape):
        raise SchemaError(f"{path}: expected (n, p) = {tuple(expect_shape)}, got {(ds.n, ds.p)}")
    return ds


def _format_cell(v, col):
    if np.isnan(v):
        return "?"
    if col.kind in (VariableKind.CATEGORICAL, VariableKind.ORDINAL):
        return col.levels[int(v)]
    if v == math.floor(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(float(v))


def write_csv(ds: Dataset, path, label_column="class", comment=None):
    """Write ``ds`` in the dialect :func:`load_csv` reads; missing cells become ``?``.

    ``comment`` is written first as a ``#`` line, which :func:`load_csv` skips.
    """
    tmp = f"{path}.tmp"
    with open(tmp, "w", newline="") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ds.names + [label_column])
        for i in range(ds.n):
            row = [_format_cell(ds.values[i, j], c) for j, c in enumerate(ds.schema)]
            w.writerow(row + [ds.label_names[ds.labels[i] - 1]])
    os.replace(tmp, path)


def write_schema(ds: Dataset, path):
    with open(path, "w") as fh:
        json.dump({"columns": [c.to_dict() for c in ds.schema]}, fh, indent=2)


# ---------------------------------------------------------------------------
# missing values


@dataclass(frozen=True)
class MissingnessSummary:
    rates: np.ndarray
    counts: np.ndarray
    total: int
    rows_affected: int


def missing_summary(ds: Dataset) -> MissingnessSummary:
    mask = np.isnan(ds.values)
    counts = mask.sum(axis=0)
    return MissingnessSummary(
        rates=counts / ds.n,
        counts=counts,
        total=int(counts.sum()),
        rows_affected=int(mask.any(axis=1).sum()),
    )


def _lower_median(x):
    s = np.sort(x)
    return s[(s.size - 1) // 2]


def _mode(x):
    vals, counts = np.unique(x, return_counts=True)
    return vals[np.argmax(counts)]  # np.unique sorts, so ties go to the smallest value


def impute(ds: Dataset, policy="central") -> Dataset:
    """Remove (``delete``) or fill (``central``) missing cells.

    Central filling uses the mean for real/interval columns, the lower median
    for count/ordinal columns and the mode for categorical/binary columns.
    """
    mask = np.isnan(ds.values)
    if policy == "delete":
        keep = ~mask.any(axis=1)
        if not keep.any():
            raise EmptyData("deleting incomplete rows leaves no data")
        return ds.take(np.flatnonzero(keep))
    if policy != "central":
        raise InvalidParameter(f"unknown impute policy {policy!r}")
    values = ds.values.copy()
    for j, col in enumerate(ds.schema):
        miss = mask[:, j]
        if not miss.any():
            continue
        obs = values[~miss, j]
        if obs.size == 0:
            raise MissingValues(f"column {col.name!r} has no observed cells")
        if col.kind in (VariableKind.REAL, VariableKind.INTERVAL):
            fill = obs.mean()
        elif col.kind in (VariableKind.COUNT, VariableKind.ORDINAL):
            fill = _lower_median(obs)
        else:
            fill = _mode(obs)
        values[miss, j] = fill
    return replace(ds, values=values)


# ---------------------------------------------------------------------------
# rescaling


@dataclass(frozen=True)
class TransformParams:
    """Per-column statistics of a fitted rescaling.

    For ``standardize`` ``offset`` is the column mean and ``scale`` is the
    root sum of squared deviations (``scale_mode="norm"``) or the sample
    standard deviation (``scale_mode="sd"``).  For ``unitize`` ``offset`` is
    the column minimum and ``scale`` is max - min.
    """

    kind: str
    columns: tuple
    names: tuple
    offset: tuple
    scale: tuple
    scale_mode: str = "norm"

    def to_dict(self):
        return {
            "kind": self.kind,
            "scale_mode": self.scale_mode,
            "columns": [
                {"index": j, "name": nm, "offset": o, "scale": s}
                for j, nm, o, s in zip(self.columns, self.names, self.offset, self.scale)
            ],
        }

    @classmethod
    def from_dict(cls, d):
        cols = d["columns"]
        return cls(
            kind=d["kind"],
            columns=tuple(c["index"] for c in cols),
            names=tuple(c["name"] for c in cols),
            offset=tuple(float(c["offset"]) for c in cols),
            scale=tuple(float(c["scale"]) for c in cols),
            scale_mode=d.get("scale_mode", "norm"),
        )

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def fit_transform(ds: Dataset, kind="standardize", scale_mode="norm"):
    """Rescale every numeric column; returns ``(transformed, params)``.

    ``standardize`` subtracts the column mean and divides by
    sqrt(sum((x - mean)^2)), so each column has zero mean and unit Euclidean
    norm.  ``scale_mode="sd"`` divides by the sample standard deviation
    instead.  ``unitize`` maps each column onto [0, 1] by its min and max.
    """
    if kind not in ("standardize", "unitize"):
        raise InvalidParameter(f"unknown transform {kind!r}")
    if scale_mode not in ("norm", "sd"):
        raise InvalidParameter(f"unknown scale mode {scale_mode!r}")
    cols = ds.numeric_columns()
    X = ds.values[:, cols]
    if np.isnan(X).any():
        raise MissingValues("impute missing cells before rescaling")
    if kind == "standardize":
        offset = X.mean(axis=0)
        ss = ((X - offset) ** 2).sum(axis=0)
        scale = np.sqrt(ss) if scale_mode == "norm" else np.sqrt(ss / max(ds.n - 1, 1))
    else:
        offset = X.min(axis=0)
        scale = X.max(axis=0) - offset
    bad = [ds.schema[c].name for c, s in zip(cols, scale) if not s > 0]
    if bad:
        raise ConstantColumn(f"constant numeric column(s): {', '.join(bad)}")
    params = TransformParams(
        kind=kind,
        columns=tuple(cols),
        names=tuple(ds.schema[c].name for c in cols),
        offset=tuple(offset.tolist()),
        scale=tuple(scale.tolist()),
        scale_mode=scale_mode,
    )
    return apply_transform(params, ds), params


def apply_transform(params: TransformParams, ds: Dataset) -> Dataset:
    """Apply stored statistics to ``ds`` (no clamping for unitize)."""
    if any(j >= ds.p or ds.schema[j].name != nm for j, nm in zip(params.columns, params.names)):
        raise SchemaError("dataset columns do not match the transform")
    cols = list(params.columns)
    values = ds.values.copy()
    values[:, cols] = (values[:, cols] - np.asarray(params.offset)) / np.asarray(params.scale)
    schema = list(ds.schema)
    for j in cols:
        # rescaled cells are no longer 0/1 or counts
        if schema[j].kind in (VariableKind.BINARY, VariableKind.COUNT):
            schema[j] = ColumnSchema(schema[j].name, VariableKind.REAL)
    return replace(ds, values=values, schema=tuple(schema))


# ---------------------------------------------------------------------------
# resampling


def split(ds: Dataset, test_fraction: float, seed) -> tuple:
    """Uniformly random train/test partition driven only by ``seed``.

    ``seed`` may be an int or a sequence of ints (fed to numpy's SeedSequence),
    which is how replications derive independent streams from a master seed.
    """
    if not 0.0 < test_fraction < 1.0:
        raise InvalidParameter("test_fraction must lie in (0, 1)")
    m = int(round(ds.n * test_fraction))
    if m < 1 or ds.n - m < 1:
        raise InvalidParameter(f"split of n={ds.n} at {test_fraction} leaves an empty side")
    train, test = split_indices(ds.n, test_fraction, seed)
    return ds.take(train), ds.take(test)


def split_indices(n: int, test_fraction: float, seed) -> tuple:
    m = int(round(n * test_fraction))
    perm = np.random.default_rng(seed).permutation(n)
    return np.sort(perm[m:]), np.sort(perm[:m])


def from_arrays(X, y, names: Sequence[str] | None = None, kinds=None) -> Dataset:
    """Build an all-numeric Dataset from a matrix and integer labels 1..g."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    y = np.asarray(y, dtype=np.int64)
    names = names or [f"x{j + 1}" for j in range(X.shape[1])]
    kinds = kinds or [VariableKind.REAL] * X.shape[1]
    schema = tuple(ColumnSchema(nm, k) for nm, k in zip(names, kinds))
    g = max(2, int(y.max()))
    return Dataset(X, schema, y, g)
