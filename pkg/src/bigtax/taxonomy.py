"""Classify a dataset's size regime and suggest tools for it.

Thresholds: p <= 50 standard, 50 < p <= 100 big, p > 100 massive;
n <= 1000 ordinary, n > 1000 observation-massive; n/p < 1 poverty,
1 <= n/p < 10 scarcity, n/p >= 10 abundance.  The six cells::

                 poverty  scarcity  abundance
    n > 1000        A        B         C
    n <= 1000       D        E         F
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from fractions import Fraction

from .errors import InvalidParameter

TOOLS = (
    "regularization",
    "kernelization_dual",
    "dimensionality_reduction",
    "variable_selection",
    "subsampling_or_sequentialization",
    "bagging_variance_reduction",
    "hybridization",
    "transformation_scaling",
)

_CELLS = {
    ("observation_massive", "poverty"): "A",
    ("observation_massive", "scarcity"): "B",
    ("observation_massive", "abundance"): "C",
    ("ordinary", "poverty"): "D",
    ("ordinary", "scarcity"): "E",
    ("ordinary", "abundance"): "F",
}


@dataclass(frozen=True)
class TaxonomyReport:
    n: int
    p: int
    ratio: float
    p_class: str
    n_class: str
    info_class: str
    cell: str

    def to_json(self):
        return json.dumps(asdict(self), sort_keys=True)

    def __str__(self):
        return (
            f"n={self.n} p={self.p} n/p={self.ratio:.4g}\n"
            f"cell {self.cell}: p_class {self.p_class}, n_class {self.n_class}, "
            f"information {self.info_class}"
        )


def classify_dims(n: int, p: int) -> TaxonomyReport:
    if int(n) != n or int(p) != p or n < 1 or p < 1:
        raise InvalidParameter("n and p must be positive integers")
    n, p = int(n), int(p)
    # exact rational comparison so n/p == 1 and n/p == 10 land on the right side
    r = Fraction(n, p)
    if p <= 50:
        p_class = "standard"
    elif p <= 100:
        p_class = "big"
    else:
        p_class = "massive"
    n_class = "observation_massive" if n > 1000 else "ordinary"
    if r < 1:
        info = "poverty"
    elif r < 10:
        info = "scarcity"
    else:
        info = "abundance"
    return TaxonomyReport(n, p, n / p, p_class, n_class, info, _CELLS[(n_class, info)])


@dataclass(frozen=True)
class Recommendation:
    tags: tuple
    rationale: dict
    notes: tuple = ()

    def to_json(self):
        return json.dumps(
            {"tags": list(self.tags), "rationale": self.rationale, "notes": list(self.notes)},
            sort_keys=True,
        )


def is_heterogeneous(schema) -> bool:
    """True when numeric columns sit beside categorical or ordinal ones."""
    numeric = {c.kind.numeric for c in schema}
    return len(numeric) > 1


def recommend(report: TaxonomyReport, has_heterogeneous_schema=False, has_missing=False):
    why = {}
    if report.info_class == "poverty":
        why["regularization"] = "n < p: covariance estimates are singular without a penalty"
        why["kernelization_dual"] = "work in the n-dimensional dual instead of p"
        why["dimensionality_reduction"] = "project onto a low intrinsic dimension first"
        why["variable_selection"] = "most of the p inputs are likely noise"
        why["bagging_variance_reduction"] = "estimators are unstable in this regime"
    if report.n_class == "observation_massive":
        why["subsampling_or_sequentialization"] = (
            "n > 1000: O(n^3) dual/kernel methods get expensive; subsample or stream"
        )
    if report.p_class in ("big", "massive"):
        why.setdefault("variable_selection", f"p = {report.p} exceeds 50 inputs")
    if has_heterogeneous_schema:
        why["hybridization"] = "mixed column kinds: combine type-specific kernels or distances"
    why["transformation_scaling"] = "put columns on a common scale"
    tags = tuple(t for t in TOOLS if t in why)
    notes = ("impute or delete missing cells before anything else",) if has_missing else ()
    return Recommendation(tags, {t: why[t] for t in tags}, notes)
