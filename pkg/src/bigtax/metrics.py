"""Distances for nearest-neighbour classification, including hybrid sums."""
from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameter

BASIC = ("euclidean", "manhattan", "hamming", "jaccard")


@dataclass(frozen=True)
class DistanceSpec:
    """A distance name, or a hybrid of two specs over disjoint column groups.

    Column indices are 0-based positions in the vectors handed to
    :func:`distance`.  ``mode`` is ``"direct"`` (d1 + d2) or ``"convex"``
    (alpha * d1 + (1 - alpha) * d2).
    """

    name: str
    d1: "DistanceSpec | None" = None
    d2: "DistanceSpec | None" = None
    columns1: tuple = ()
    columns2: tuple = ()
    mode: str = "direct"
    alpha: float = 0.5

    def __post_init__(self):
        if self.name in BASIC:
            return
        if self.name != "hybrid":
            raise InvalidParameter(f"unknown distance {self.name!r}")
        if self.d1 is None or self.d2 is None:
            raise InvalidParameter("hybrid distance needs two component specs")
        object.__setattr__(self, "columns1", tuple(int(c) for c in self.columns1))
        object.__setattr__(self, "columns2", tuple(int(c) for c in self.columns2))
        if set(self.columns1) & set(self.columns2):
            raise InvalidParameter("hybrid column groups must be disjoint")
        if self.mode not in ("direct", "convex"):
            raise InvalidParameter(f"unknown hybrid mode {self.mode!r}")
        if self.mode == "convex" and not 0.0 < self.alpha < 1.0:
            raise InvalidParameter("convex hybrid needs alpha in (0, 1)")

    def __str__(self):
        if self.name != "hybrid":
            return self.name
        tail = f", alpha={self.alpha!r}" if self.mode == "convex" else ""
        return (
            f"hybrid({self.d1}@cols:{_fmt_cols(self.columns1)}, "
            f"{self.d2}@cols:{_fmt_cols(self.columns2)}{tail})"
        )

    def to_dict(self):
        return {"spec": str(self)}

    @classmethod
    def from_dict(cls, d):
        return parse_distance(d["spec"])


def _fmt_cols(cols):
    """1-based runs joined by ``+``, e.g. (0, 1, 2, 6) -> ``"1-3+7"``."""
    runs, cols = [], list(cols)
    i = 0
    while i < len(cols):
        j = i
        while j + 1 < len(cols) and cols[j + 1] == cols[j] + 1:
            j += 1
        runs.append(str(cols[i] + 1) if i == j else f"{cols[i] + 1}-{cols[j] + 1}")
        i = j + 1
    return "+".join(runs)


def _check_binary(*arrays):
    for a in arrays:
        if not np.all((a == 0) | (a == 1)):
            raise InvalidParameter("hamming/jaccard distances need 0/1 inputs")


def distances_to(spec: DistanceSpec, Z, x) -> np.ndarray:
    """Distances from the vector ``x`` to every row of ``Z``.

    Every other entry point computes distances through here, row by row,
    so a pair of points always gets the same floating-point distance.
    """
    Z = np.asarray(Z, dtype=float)
    x = np.asarray(x, dtype=float)
    if Z.ndim != 2 or Z.shape[1] != x.shape[0]:
        raise InvalidParameter(f"dimension mismatch: {Z.shape} vs {x.shape}")
    name = spec.name
    if name == "euclidean":
        return np.sqrt(((Z - x) ** 2).sum(axis=1))
    if name == "manhattan":
        return np.abs(Z - x).sum(axis=1)
    if name == "hamming":
        _check_binary(Z, x)
        return (Z != x).sum(axis=1).astype(float)
    if name == "jaccard":
        _check_binary(Z, x)
        inner = Z @ x
        denom = (Z * Z).sum(axis=1) + x @ x - inner
        if np.any(denom == 0):
            raise InvalidParameter("jaccard distance undefined for two all-zero vectors")
        return 1.0 - inner / denom
    c1, c2 = list(spec.columns1), list(spec.columns2)
    a = distances_to(spec.d1, Z[:, c1], x[c1])
    b = distances_to(spec.d2, Z[:, c2], x[c2])
    if spec.mode == "direct":
        return a + b
    return spec.alpha * a + (1.0 - spec.alpha) * b


def distance(spec: DistanceSpec, x, z) -> float:
    x = np.asarray(x, dtype=float)
    return float(distances_to(spec, np.atleast_2d(z), x)[0])


def pairwise(spec: DistanceSpec, A, B) -> np.ndarray:
    """Matrix ``D[i, j] = distance(spec, A[i], B[j])``."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    D = np.empty((A.shape[0], B.shape[0]))
    for i in range(A.shape[0]):
        D[i] = distances_to(spec, B, A[i])
    return D


# ---------------------------------------------------------------------------
# config syntax: "euclidean", "hybrid(euclidean@cols:1-5, hamming@cols:6-9, alpha=0.5)"

_COLS = re.compile(r"^\s*(.+?)\s*@\s*cols\s*:\s*([0-9,+\-\s]+)$")


def parse_columns(text) -> tuple:
    """``"1-3+7"`` or ``"1-3,7"`` -> ``(0, 1, 2, 6)`` (1-based ranges in, 0-based out)."""
    out = []
    for part in re.split(r"[,+]", text):
        part = part.strip()
        if not part:
            continue
        if "-" in part:
            lo, hi = (int(v) for v in part.split("-"))
            out.extend(range(lo - 1, hi))
        else:
            out.append(int(part) - 1)
    if any(c < 0 for c in out):
        raise InvalidParameter(f"column numbers start at 1: {text!r}")
    return tuple(out)


def split_top_level(text):
    """Split on commas that are not inside parentheses."""
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur).strip())
            cur = []
        else:
            cur.append(ch)
    if "".join(cur).strip():
        parts.append("".join(cur).strip())
    return parts


def parse_distance(text: str) -> DistanceSpec:
    text = text.strip()
    if text in BASIC:
        return DistanceSpec(text)
    if not (text.startswith("hybrid(") and text.endswith(")")):
        raise InvalidParameter(f"cannot parse distance {text!r}")
    parts = split_top_level(text[len("hybrid("):-1])
    comps, alpha = [], None
    for part in parts:
        if part.startswith("alpha"):
            alpha = float(part.split("=", 1)[1])
            continue
        m = _COLS.match(part)
        if not m:
            raise InvalidParameter(f"hybrid component needs '@cols:': {part!r}")
        comps.append((parse_distance(m.group(1)), parse_columns(m.group(2))))
    if len(comps) != 2:
        raise InvalidParameter("hybrid distance takes exactly two components")
    (d1, c1), (d2, c2) = comps
    if alpha is None:
        return DistanceSpec("hybrid", d1, d2, c1, c2, "direct")
    return DistanceSpec("hybrid", d1, d2, c1, c2, "convex", alpha)
