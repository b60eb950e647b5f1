"""Kernel functions, Gram matrices, centering and kernel PCA."""
from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh
from scipy.spatial.distance import cdist, pdist

from .errors import InvalidParameter
from .metrics import _fmt_cols, parse_columns, split_top_level

KINDS = ("vanilla", "rbf", "laplace", "polynomial", "hybrid")


@dataclass(frozen=True)
class KernelSpec:
    kind: str
    tau: float = 1.0
    scale: float = 1.0
    offset: float = 1.0
    degree: int = 2
    alpha: float = 0.5
    k1: "KernelSpec | None" = None
    k2: "KernelSpec | None" = None
    columns1: tuple = ()
    columns2: tuple = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidParameter(f"unknown kernel {self.kind!r}")
        if self.kind in ("rbf", "laplace") and not self.tau > 0:
            raise InvalidParameter("tau must be positive")
        if self.kind == "polynomial" and (int(self.degree) != self.degree or self.degree < 1):
            raise InvalidParameter("polynomial degree must be a positive integer")
        if self.kind == "hybrid":
            if self.k1 is None or self.k2 is None:
                raise InvalidParameter("hybrid kernel needs two component kernels")
            if not 0.0 < self.alpha < 1.0:
                raise InvalidParameter("hybrid alpha must lie in (0, 1)")
            object.__setattr__(self, "columns1", tuple(int(c) for c in self.columns1))
            object.__setattr__(self, "columns2", tuple(int(c) for c in self.columns2))
            if set(self.columns1) & set(self.columns2):
                raise InvalidParameter("hybrid column groups must be disjoint")

    def __str__(self):
        if self.kind == "vanilla":
            return "vanilla"
        if self.kind in ("rbf", "laplace"):
            return f"{self.kind}(tau={self.tau!r})"
        if self.kind == "polynomial":
            return f"poly(scale={self.scale!r},offset={self.offset!r},degree={int(self.degree)})"
        return (
            f"hybrid({self.k1}@cols:{_fmt_cols(self.columns1)}, "
            f"{self.k2}@cols:{_fmt_cols(self.columns2)}, alpha={self.alpha!r})"
        )

    def to_dict(self):
        return {"spec": str(self)}

    @classmethod
    def from_dict(cls, d):
        return parse_kernel(d["spec"])


def rbf(tau):
    return KernelSpec("rbf", tau=float(tau))


def laplace(tau):
    return KernelSpec("laplace", tau=float(tau))


def polynomial(scale=1.0, offset=1.0, degree=2):
    return KernelSpec("polynomial", scale=float(scale), offset=float(offset), degree=int(degree))


VANILLA = KernelSpec("vanilla")


def cross_gram(spec: KernelSpec, A, B) -> np.ndarray:
    """``K[i, j] = k(A[i], B[j])``."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if A.shape[1] != B.shape[1]:
        raise InvalidParameter(f"dimension mismatch: {A.shape[1]} vs {B.shape[1]}")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(B))):
        raise InvalidParameter("kernel inputs must be finite")
    kind = spec.kind
    if kind == "vanilla":
        return A @ B.T
    if kind == "polynomial":
        return (spec.scale * (A @ B.T) + spec.offset) ** int(spec.degree)
    if kind == "rbf":
        return np.exp(-0.5 * cdist(A, B, "sqeuclidean") / spec.tau**2)
    if kind == "laplace":
        return np.exp(-0.5 * cdist(A, B, "cityblock") / spec.tau)
    c1, c2 = list(spec.columns1), list(spec.columns2)
    return spec.alpha * cross_gram(spec.k1, A[:, c1], B[:, c1]) + (1 - spec.alpha) * cross_gram(
        spec.k2, A[:, c2], B[:, c2]
    )


def kernel_eval(spec: KernelSpec, x, z) -> float:
    """Single kernel value; computed directly from the defining formula."""
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    if x.shape != z.shape:
        raise InvalidParameter("dimension mismatch")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(z))):
        raise InvalidParameter("kernel inputs must be finite")
    kind = spec.kind
    if kind == "vanilla":
        return float(x @ z)
    if kind == "rbf":
        return float(np.exp(-0.5 * np.sum((x - z) ** 2) / spec.tau**2))
    if kind == "laplace":
        return float(np.exp(-0.5 * np.sum(np.abs(x - z)) / spec.tau))
    if kind == "polynomial":
        return float((spec.scale * (x @ z) + spec.offset) ** int(spec.degree))
    c1, c2 = list(spec.columns1), list(spec.columns2)
    return spec.alpha * kernel_eval(spec.k1, x[c1], z[c1]) + (1 - spec.alpha) * kernel_eval(
        spec.k2, x[c2], z[c2]
    )


@dataclass(frozen=True, eq=False)
class GramMatrix:
    K: np.ndarray
    spec: KernelSpec
    centered: bool = False


def gram(spec: KernelSpec, X) -> GramMatrix:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    K = cross_gram(spec, X, X)
    K = 0.5 * (K + K.T)  # exact symmetry
    if spec.kind in ("rbf", "laplace"):
        np.fill_diagonal(K, 1.0)
    K.setflags(write=False)
    return GramMatrix(K, spec, False)


def center_gram(g: GramMatrix) -> GramMatrix:
    """(I - 1/n)K(I - 1/n), expanded as K - 1K - K1 + 1K1."""
    K = np.asarray(g.K, dtype=float)
    row = K.mean(axis=0, keepdims=True)
    col = K.mean(axis=1, keepdims=True)
    Kc = K - row - col + K.mean()
    Kc = 0.5 * (Kc + Kc.T)
    Kc.setflags(write=False)
    return GramMatrix(Kc, g.spec, True)


@dataclass(frozen=True, eq=False)
class KpcaResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    projections: np.ndarray


def kernel_pca(g: GramMatrix, q: int) -> KpcaResult:
    """Top-``q`` eigenpairs of (1/n) times the centred Gram matrix.

    Scores are sqrt(n * lambda_j) * v_j, which for the vanilla kernel on
    centred data equal ordinary PCA scores X w_j.  Each eigenvector is
    signed so that its largest-magnitude entry is positive.
    """
    n = g.K.shape[0]
    if not 1 <= q <= n:
        raise InvalidParameter(f"q must lie in 1..{n}")
    Kc = g if g.centered else center_gram(g)
    lam, V = eigh(np.asarray(Kc.K) / n)
    order = np.argsort(lam, kind="stable")[::-1][:q]
    lam, V = lam[order], V[:, order]
    lam = np.where((lam < 0) & (lam >= -1e-10), 0.0, lam)
    for j in range(q):
        i = np.argmax(np.abs(V[:, j]))
        if V[i, j] < 0:
            V[:, j] = -V[:, j]
    scores = V * np.sqrt(np.maximum(n * lam, 0.0))[None, :]
    return KpcaResult(lam, V, scores)


def median_distance(X) -> float:
    """Median Euclidean distance over distinct row pairs (a common rbf tau)."""
    d = pdist(np.asarray(X, dtype=float))
    return float(np.median(d)) if d.size else 1.0


# ---------------------------------------------------------------------------
# config syntax

_ARGS = re.compile(r"^(\w+)\((.*)\)$")
_COLS = re.compile(r"^\s*(.+?)\s*@\s*cols\s*:\s*([0-9,+\-\s]+)$")


def parse_kernel(text: str) -> KernelSpec:
    """Parse ``"rbf(tau=1.0)"``, ``"poly(scale=1,offset=1,degree=2)"``, ``"vanilla"``,
    ``"hybrid(rbf(tau=1)@cols:1-5, vanilla@cols:6-9, alpha=0.5)"``."""
    text = text.strip()
    if text in ("vanilla", "linear_kernel"):
        return VANILLA
    m = _ARGS.match(text)
    if not m:
        raise InvalidParameter(f"cannot parse kernel {text!r}")
    name, body = m.group(1), m.group(2)
    if name == "hybrid":
        comps, alpha = [], 0.5
        for part in split_top_level(body):
            if part.startswith("alpha"):
                alpha = float(part.split("=", 1)[1])
                continue
            cm = _COLS.match(part)
            if not cm:
                raise InvalidParameter(f"hybrid component needs '@cols:': {part!r}")
            comps.append((parse_kernel(cm.group(1)), parse_columns(cm.group(2))))
        if len(comps) != 2:
            raise InvalidParameter("hybrid kernel takes exactly two components")
        (k1, c1), (k2, c2) = comps
        return KernelSpec("hybrid", alpha=alpha, k1=k1, k2=k2, columns1=c1, columns2=c2)
    kw = {}
    for part in split_top_level(body):
        key, _, val = part.partition("=")
        kw[key.strip()] = float(val)
    if name in ("rbf", "laplace"):
        return KernelSpec(name, tau=kw.get("tau", 1.0))
    if name in ("poly", "polynomial"):
        return polynomial(kw.get("scale", 1.0), kw.get("offset", 1.0), int(kw.get("degree", 2)))
    raise InvalidParameter(f"unknown kernel {name!r}")
